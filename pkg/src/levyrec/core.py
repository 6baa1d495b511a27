"""Radial Levy triplets in the plane and the tail functionals built on them.

A triplet here is (0, c(x) I, n(x, |y|) dy) plus an optional finite
rotation-invariant part stored as rings.  All functionals reduce to
one-dimensional radial integrals:

    q(x, rho)      = c(x) rho^2 / 2 + 2 pi int (1 - J0(rho u)) u n(x, u) du
    nu(B_u^c)      = 2 pi int_u^inf r n(x, r) dr
    N(x, u)        = 2 int_u^inf r n(x, r) arccos(u / r) dr
    int_{B_rho} |y|^2 nu = 2 pi int_0^rho u^3 n(x, u) du
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from . import quadrature as quad
from .errors import FitError, ModelError, QuadratureError, TruncationError, UnsupportedModelError
from .special import j0, one_minus_j0

TWO_PI = 2.0 * math.pi
ORIGIN = np.zeros(2)

# oscillation periods integrated directly before switching to the accelerated tail
_NEAR_PERIODS = 16
_TOL = 1e-11


@dataclass(frozen=True)
class DeclaredTail:
    """Asymptotic form n(x, u) ~ beta (ln u)^log_exponent u^delta as u -> inf."""

    delta: float
    log_exponent: float = 0.0

    def __post_init__(self):
        if self.delta > -2.0:
            raise ModelError(f"tail index {self.delta} > -2 is not a planar Levy density tail")


@dataclass(frozen=True)
class RadialDensity:
    """Jump density ``u -> n(x, u)`` of a rotation-invariant Levy measure.

    ``density(x, u)`` receives a state point and an array of radii and
    returns an array.  Values outside [support_floor, support_cap] are
    forced to zero.
    """

    density: Callable
    support_floor: float = 0.0
    support_cap: float = math.inf
    breakpoints: tuple = ()
    decreasing_beyond: Optional[float] = None
    declared_tail: Optional[DeclaredTail] = None
    is_zero: bool = False
    label: str = ""

    @staticmethod
    def zero():
        return RadialDensity(lambda x, u: np.zeros_like(u), is_zero=True, label="zero")

    @staticmethod
    def from_profile(profile, **kw):
        """Wrap an x-independent profile ``u -> n(u)``."""
        return RadialDensity(lambda x, u: profile(u), **kw)

    def evaluate(self, x, u):
        u = np.asarray(u, dtype=float)
        if self.is_zero:
            return np.zeros_like(u)
        inside = (u >= self.support_floor) & (u <= self.support_cap) & (u > 0)
        filler = self.support_floor if self.support_floor > 0 else min(1.0, self.support_cap)
        safe = np.where(inside, u, filler)
        with np.errstate(all="ignore"):
            vals = np.asarray(self.density(x, safe), dtype=float) * np.ones_like(safe)
        vals = np.where(inside, vals, 0.0)
        if np.any(vals < 0) or np.any(np.isnan(vals)):
            raise ModelError(f"density {self.label or ''} returned a negative or NaN sample")
        return vals

    def profile(self, x):
        return lambda u: self.evaluate(x, u)

    def cuts(self):
        """Finite radii where the density may be discontinuous."""
        pts = [self.support_floor, self.support_cap, *self.breakpoints]
        return sorted({float(p) for p in pts if 0 < p < math.inf})

    def scaled(self, k):
        return replace(self, density=lambda x, u, _d=self.density: k * np.asarray(_d(x, u), dtype=float))

    def without_ball(self, r):
        """Same density with the jumps of size < r removed."""
        return replace(self, support_floor=max(self.support_floor, r),
                       breakpoints=tuple(sorted(set(self.breakpoints) | {r})))


@dataclass(frozen=True)
class FinitePart:
    """Finite rotation-invariant measure inside the ball of radius r0, as (radius, mass) rings."""

    r0: float
    rings: tuple = ()

    def __post_init__(self):
        for radius, mass in self.rings:
            if not (0 < radius <= self.r0) or mass < 0:
                raise ModelError("finite part rings must sit in (0, r0] with nonnegative mass")


def _as_callable(c):
    if callable(c):
        return c
    value = float(c)
    return lambda x: value


@dataclass(frozen=True)
class LevyTriplet2D:
    """Levy triplet (0, c(x) I, nu(x, dy)) with radial nu; killing is identically zero."""

    diffusion: Callable = 0.0
    jump_density: RadialDensity = field(default_factory=RadialDensity.zero)
    finite_part: Optional[FinitePart] = None
    x_dependent: bool = False

    def __post_init__(self):
        object.__setattr__(self, "diffusion", _as_callable(self.diffusion))

    def c(self, x):
        value = float(self.diffusion(np.asarray(x, dtype=float)))
        if value < 0 or not math.isfinite(value):
            raise ModelError(f"diffusion coefficient {value} is not a finite nonnegative number")
        return value

    def frozen(self, x):
        """x-independent triplet with every coefficient fixed at state ``x``."""
        x = np.asarray(x, dtype=float)
        dens = self.jump_density
        frozen_density = replace(dens, density=lambda _x, u, _d=dens.density, _p=x: _d(_p, u))
        return LevyTriplet2D(self.c(x), frozen_density, self.finite_part, x_dependent=False)

    def rings(self):
        return self.finite_part.rings if self.finite_part else ()

    def has_jumps(self):
        return not self.jump_density.is_zero or any(m > 0 for _, m in self.rings())

    def scaled(self, k):
        """Levy measure multiplied by k, diffusion untouched."""
        fp = None
        if self.finite_part:
            fp = FinitePart(self.finite_part.r0, tuple((r, k * m) for r, m in self.finite_part.rings))
        return LevyTriplet2D(self.diffusion, self.jump_density.scaled(k), fp, self.x_dependent)

    def validate(self, xs=(ORIGIN,), radii=None):
        """Check the triplet invariants at sample states; raises ModelError."""
        if radii is None:
            radii = np.geomspace(1e-4, 1e6, 201)
        sup_total = 0.0
        for x in xs:
            c = self.c(x)
            vals = self.jump_density.evaluate(x, radii)
            u0 = self.jump_density.decreasing_beyond
            if u0 is not None:
                tail = vals[radii > u0]
                if np.any(np.diff(tail) > 1e-12 * np.abs(tail[:-1]) + 1e-300):
                    raise ModelError(f"density is not nonincreasing beyond declared u0={u0}")
            if not self.jump_density.is_zero:
                try:
                    small = truncated_second_moment(self, x, 1.0)
                    big = ball_tail(self, x, 1.0)
                except QuadratureError as exc:
                    raise ModelError(f"Levy measure integrability fails at x={list(x)}: {exc}") from exc
                if not (math.isfinite(small) and math.isfinite(big)):
                    raise ModelError("Levy measure integrability fails")
                sup_total = max(sup_total, c + small + big)
            else:
                sup_total = max(sup_total, c)
        if not math.isfinite(sup_total):
            raise ModelError("sup of c(x) + int min(1,|y|^2) nu(x,dy) is infinite")
        return sup_total


# ---------------------------------------------------------------------------
# symbol


def eval_symbol(triplet: LevyTriplet2D, x, rho: float, tol=_TOL) -> float:
    """q(x, (rho, 0)) for a radial triplet."""
    if rho < 0:
        raise ValueError("radial frequency must be nonnegative")
    if rho == 0:
        return 0.0
    x = np.asarray(x, dtype=float)
    value = 0.5 * triplet.c(x) * rho * rho
    dens = triplet.jump_density
    if not dens.is_zero:
        value += TWO_PI * _jump_symbol(dens.profile(x), dens, rho, tol)
    for radius, mass in triplet.rings():
        value += mass * float(one_minus_j0(np.array([rho * radius]))[0])
    return value


def _jump_symbol(n, dens: RadialDensity, rho, tol):
    lo = dens.support_floor
    cap = dens.support_cap
    width = math.pi / rho
    near_end = max(_NEAR_PERIODS * width, lo)
    cuts = dens.cuts()

    def f(u):
        return one_minus_j0(rho * u) * u * n(u)

    total = 0.0
    if near_end > lo:
        stop = min(near_end, cap)
        edges = [p for p in (width * k for k in range(1, _NEAR_PERIODS + 1)) if lo < p < stop]
        total += quad.integrate(f, lo, stop, breakpoints=cuts + edges, tol=tol)
    if cap > near_end:
        def g(u):
            return u * n(u)

        if math.isinf(cap):
            plain = quad.integrate_to_infinity(g, near_end, tol=tol) if not [p for p in cuts if p > near_end] \
                else _integrate_tail(g, near_end, cap, cuts, tol)
        else:
            plain = quad.integrate(g, near_end, cap, breakpoints=cuts, tol=tol)
        osc = quad.bessel_tail(g, rho, near_end, cap=cap, tol=tol, breakpoints=cuts)
        total += plain - osc
    return max(total, 0.0)


def _integrate_tail(g, a, cap, cuts, tol):
    """Integral of g over [a, cap) honouring discontinuities; cap may be infinite."""
    inner = [p for p in cuts if a < p < cap]
    if math.isinf(cap):
        if inner:
            last = inner[-1]
            return quad.integrate(g, a, last, breakpoints=inner, tol=tol) + quad.integrate_to_infinity(g, last, tol=tol)
        return quad.integrate_to_infinity(g, a, tol=tol)
    return quad.integrate(g, a, cap, breakpoints=inner, tol=tol)


# ---------------------------------------------------------------------------
# tails and moments


def ball_tail(triplet: LevyTriplet2D, x, u: float, tol=_TOL) -> float:
    """nu(x, B_u(0)^c)."""
    if u <= 0:
        raise ValueError("ball radius must be positive")
    x = np.asarray(x, dtype=float)
    dens = triplet.jump_density
    total = 0.0
    if not dens.is_zero:
        a = max(u, dens.support_floor)
        if a < dens.support_cap:
            n = dens.profile(x)
            total = TWO_PI * _integrate_tail(lambda r: r * n(r), a, dens.support_cap, dens.cuts(), tol)
    total += sum(m for r, m in triplet.rings() if r >= u)
    return total


def _halfplane_density_part(n, dens: RadialDensity, u, tol):
    """2 int_{max(u, floor)}^{cap} r n(r) arccos(u/r) dr."""
    lo = max(u, dens.support_floor)
    cap = dens.support_cap
    if lo >= cap:
        return 0.0
    cuts = dens.cuts()
    if u <= 0:
        g = lambda r: r * n(r)
        if dens.support_floor > 0:
            return math.pi * _integrate_tail(g, dens.support_floor, cap, cuts, tol)
        return math.pi * _integrate_from_zero(g, cap, cuts, tol)

    def h(r):
        return 2.0 * r * n(r) * np.arccos(np.minimum(1.0, u / r))

    if lo > u:
        return _integrate_tail(h, lo, cap, cuts, tol)
    # r = u (1 + s^2) removes the square-root edge at r = u
    mid = min(2.0 * u, cap)
    s_max = math.sqrt(mid / u - 1.0)
    s_cuts = [math.sqrt(p / u - 1.0) for p in cuts if u < p < mid]

    def hs(s):
        r = u * (1.0 + s * s)
        return h(r) * 2.0 * u * s

    total = quad.integrate(hs, 0.0, s_max, breakpoints=s_cuts, tol=tol) if s_max > 0 else 0.0
    if cap > mid:
        total += _integrate_tail(h, mid, cap, cuts, tol)
    return total


def _integrate_from_zero(g, cap, cuts, tol):
    inner = [p for p in cuts if 0 < p < cap]
    first = inner[0] if inner else (1.0 if math.isinf(cap) else cap)
    head = quad.integrate(g, 0.0, first, tol=tol)
    return head + (_integrate_tail(g, first, cap, cuts, tol) if cap > first else 0.0)


def halfplane_tail(triplet: LevyTriplet2D, x, u: float, tol=_TOL) -> float:
    """N(x, u) = nu(x, (u, inf) x R)."""
    if u < 0:
        raise ValueError("half-plane offset must be nonnegative")
    x = np.asarray(x, dtype=float)
    dens = triplet.jump_density
    total = 0.0
    if not dens.is_zero:
        total = _halfplane_density_part(dens.profile(x), dens, u, tol)
    for r, m in triplet.rings():
        if r > u:
            total += m * math.acos(min(1.0, u / r)) / math.pi
    return total


def truncated_second_moment(triplet: LevyTriplet2D, x, rho: float, tol=_TOL) -> float:
    """int_{B_rho(0)} |y|^2 nu(x, dy)."""
    if rho <= 0:
        raise ValueError("radius must be positive")
    x = np.asarray(x, dtype=float)
    dens = triplet.jump_density
    total = 0.0
    if not dens.is_zero:
        top = min(rho, dens.support_cap)
        lo = dens.support_floor
        if top > lo:
            n = dens.profile(x)
            cuts = [p for p in dens.cuts() if p < top]
            total = TWO_PI * quad.integrate(lambda r: r ** 3 * n(r), lo, top, breakpoints=cuts, tol=tol)
    total += sum(r * r * m for r, m in triplet.rings() if r < rho)
    return total


def cumulative_tail_integral_at(triplet: LevyTriplet2D, x, rho: float, tol=_TOL) -> float:
    """int_0^rho u nu(x, B_u^c) du via rho^2/2 nu(B_rho^c) + 1/2 int_{B_rho} |y|^2 nu."""
    return 0.5 * rho * rho * ball_tail(triplet, x, rho, tol) + 0.5 * truncated_second_moment(triplet, x, rho, tol)


def cumulative_tail_integral_direct(triplet: LevyTriplet2D, x, rho: float, tol=_TOL) -> float:
    """Same quantity by quadrature of u -> u nu(B_u^c) over (0, rho)."""
    dens = triplet.jump_density
    cuts = [p for p in dens.cuts() if p < rho] + [r for r, _ in triplet.rings() if r < rho]

    def f(us):
        return np.array([u * ball_tail(triplet, x, u, tol) for u in np.atleast_1d(us)])

    return quad.integrate(f, 0.0, rho, breakpoints=cuts, tol=max(tol, 1e-12))


# ---------------------------------------------------------------------------
# strip mass


def _restricted(triplet: LevyTriplet2D) -> LevyTriplet2D:
    """The Levy measure restricted to the complement of the unit ball (no diffusion)."""
    dens = triplet.jump_density
    fp = None
    if triplet.finite_part:
        rings = tuple((r, m) for r, m in triplet.finite_part.rings if r >= 1.0)
        fp = FinitePart(triplet.finite_part.r0, rings) if rings else None
    return LevyTriplet2D(0.0, dens.without_ball(1.0) if not dens.is_zero else dens, fp, triplet.x_dependent)


def _marginal_density(triplet, x, v, tol=_TOL):
    """Density of the first-coordinate marginal of the (unit-ball restricted) measure at v > 0."""
    dens = triplet.jump_density
    if dens.is_zero:
        return 0.0
    n = dens.profile(x)
    lo = max(v, dens.support_floor)
    if lo >= dens.support_cap:
        return 0.0
    if lo > v:
        return _integrate_tail(lambda r: 2.0 * r * n(r) / np.sqrt(r * r - v * v), lo, dens.support_cap, dens.cuts(), tol)
    mid = min(2.0 * v, dens.support_cap)
    s_max = math.sqrt(mid / v - 1.0)
    s_cuts = [math.sqrt(p / v - 1.0) for p in dens.cuts() if v < p < mid]

    def hs(s):
        # r = v (1 + s^2): the 1/sqrt(r^2 - v^2) edge becomes smooth
        r = v * (1.0 + s * s)
        return 4.0 * r * n(r) / np.sqrt(2.0 + s * s)

    total = quad.integrate(hs, 0.0, s_max, breakpoints=s_cuts, tol=tol)
    if dens.support_cap > mid:
        total += _integrate_tail(lambda r: 2.0 * r * n(r) / np.sqrt(r * r - v * v), mid, dens.support_cap,
                                 dens.cuts(), tol)
    return total


def strip_mass(triplet: LevyTriplet2D, x, rho: float, u: float, tol=1e-12, max_terms=10 ** 6,
               batch=64) -> float:
    """M(x, rho, u): mass of the unit-ball-restricted measure on the strips (2n rho + u, 2(n+1) rho - u] x R.

    Terms are summed directly; the remainder beyond the current index is
    closed with the period-average (strip fraction) and its first periodic
    correction.  Summation stops once the size of the neglected correction
    drops below ``tol`` times the accumulated value.
    """
    if rho <= 0 or not (0 <= u <= rho):
        raise ValueError("need rho > 0 and 0 <= u <= rho")
    if u == rho:
        return 0.0
    x = np.asarray(x, dtype=float)
    restricted = _restricted(triplet)
    if not restricted.has_jumps():
        return 0.0
    frac = (rho - u) / rho
    q_mean = u * (rho - u) / rho
    cap = restricted.jump_density.support_cap
    ring_max = max((r for r, _ in restricted.rings()), default=0.0)
    reach = max(cap if math.isfinite(cap) else 0.0, ring_max)
    finite_support = math.isfinite(cap) or restricted.jump_density.is_zero

    def n1(v):
        return halfplane_tail(restricted, x, v, tol=min(tol, _TOL))

    acc = 0.0
    k = 0
    while k < max_terms:
        idx = np.arange(k, min(k + batch, max_terms))
        a = 2.0 * idx * rho + u
        b = 2.0 * (idx + 1) * rho - u
        na = np.array([n1(v) for v in a])
        nb = np.array([n1(v) for v in b])
        terms = na - nb
        acc += float(math.fsum(terms))
        k = int(idx[-1]) + 1
        a_next = 2.0 * k * rho + u
        if finite_support and a_next > reach:
            return acc
        f_here = _marginal_density(restricted, x, a_next)
        f_next = _marginal_density(restricted, x, a_next + 2.0 * rho)
        neglected = 2.0 * rho * abs(f_here - f_next) * rho
        if neglected <= tol * (acc + 1e-30):
            tail = frac * n1(a_next) + q_mean * f_here
            return acc + tail
    raise TruncationError("strip series did not reach its truncation bound", partial=acc)


# ---------------------------------------------------------------------------
# families and envelopes


class EnvelopeSelector(Enum):
    SUP = "sup_over_x"
    INF = "inf_over_x"

    def pick(self, values):
        return max(values) if self is EnvelopeSelector.SUP else min(values)


SUP = EnvelopeSelector.SUP
INF = EnvelopeSelector.INF


@dataclass(frozen=True)
class ParamField:
    """A coefficient field x -> value with declared inf/sup over the plane."""

    fn: Callable
    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ModelError("parameter bounds must satisfy inf <= sup")

    @staticmethod
    def constant(value):
        v = float(value)
        return ParamField(lambda x: v, v, v)

    def __call__(self, x):
        return float(self.fn(np.asarray(x, dtype=float)))


@dataclass(frozen=True)
class State:
    """One sample of the state space used to form sup/inf envelopes."""

    label: str
    triplet: LevyTriplet2D
    symbol: Optional[Callable] = None
    params: Optional[Mapping[str, float]] = None

    def q(self, rho, tol=_TOL):
        if self.symbol is not None:
            return float(self.symbol(rho))
        return eval_symbol(self.triplet, ORIGIN, rho, tol)


@dataclass(frozen=True)
class ProcessFamily:
    """A planar Levy-type model with radial symbol.

    state_mode:
      * ``constant``   - a Levy process; one state.
      * ``parametric`` - coefficients through ``param_fields`` with declared
        bounds; ``param_model(params)`` builds the frozen triplet and
        ``param_symbol(params, rho)`` optionally gives q in closed form.
        Envelopes use the box corners when ``envelope_hint == "monotone"``
        and a tensor grid of ``param_grid`` points per field otherwise.
      * ``grid``       - sup/inf over a sample grid of the box ``grid_box``.
    """

    name: str
    triplet: Optional[LevyTriplet2D]
    state_mode: str = "constant"
    param_fields: Mapping[str, ParamField] = field(default_factory=dict)
    param_model: Optional[Callable] = None
    param_symbol: Optional[Callable] = None
    symbol_override: Optional[Callable] = None
    envelope_hint: Optional[str] = None
    param_grid: Optional[int] = None
    grid_box: Optional[tuple] = None
    grid_points: int = 9
    kind: str = "custom"
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.state_mode not in ("constant", "parametric", "grid"):
            raise ModelError(f"unknown state mode {self.state_mode!r}")
        if self.state_mode == "grid" and self.grid_box is None:
            raise ModelError("grid mode needs a bounding box")
        if self.state_mode == "parametric":
            if not self.param_fields or (self.param_model is None and self.param_symbol is None):
                raise ModelError("parametric mode needs parameter fields and a parameter model")
        if self.triplet is None and self.symbol_override is None and self.param_symbol is None \
                and self.param_model is None:
            raise ModelError("family needs a triplet or a closed-form symbol")
        for name, pf in self.param_fields.items():
            if name == "beta" and pf.lo <= 0:
                raise ModelError("inf beta must be positive")
            if name == "alpha":
                if pf.lo <= 0:
                    raise ModelError("inf alpha must be positive")
                if self.kind == "stable_like" and pf.hi >= 2:
                    raise ModelError("stable-like families need sup alpha < 2")

    # -- state sampling ----------------------------------------------------

    def params_at(self, x):
        return {k: pf(x) for k, pf in self.param_fields.items()}

    def triplet_at(self, x):
        """Frozen triplet at a state point."""
        if self.state_mode == "parametric" and self.param_model is not None:
            return self.param_model(self.params_at(x))
        if self.triplet is None:
            raise UnsupportedModelError(f"{self.name}: no Levy triplet declared")
        return self.triplet.frozen(x) if self.triplet.x_dependent else self.triplet

    def grid_xs(self):
        x0, x1, y0, y1 = self.grid_box
        gx = np.linspace(x0, x1, self.grid_points)
        gy = np.linspace(y0, y1, self.grid_points)
        return [np.array([a, b]) for a in gx for b in gy]

    def grid_spacing(self):
        x0, x1, y0, y1 = self.grid_box
        return ((x1 - x0) / (self.grid_points - 1), (y1 - y0) / (self.grid_points - 1))

    def _param_points(self):
        names = list(self.param_fields)
        if self.envelope_hint == "monotone":
            axes = [sorted({self.param_fields[k].lo, self.param_fields[k].hi}) for k in names]
        elif self.param_grid:
            axes = [np.unique(np.linspace(self.param_fields[k].lo, self.param_fields[k].hi, self.param_grid)).tolist()
                    for k in names]
        else:
            raise UnsupportedModelError(
                f"{self.name}: parametric envelope needs a monotone hint or a parameter grid")
        return [dict(zip(names, combo)) for combo in itertools.product(*axes)]

    def states(self):
        if self.state_mode == "constant":
            trip = self.triplet.frozen(ORIGIN) if self.triplet is not None and self.triplet.x_dependent else self.triplet
            sym = (lambda rho: self.symbol_override(ORIGIN, rho)) if self.symbol_override else None
            return [State("const", trip, sym)]
        if self.state_mode == "grid":
            out = []
            for x in self.grid_xs():
                trip = self.triplet.frozen(x) if self.triplet is not None else None
                sym = (lambda rho, _x=x: self.symbol_override(_x, rho)) if self.symbol_override else None
                out.append(State(f"x={x[0]:.4g},{x[1]:.4g}", trip, sym))
            return out
        out = []
        for p in self._param_points():
            trip = self.param_model(p) if self.param_model is not None else None
            sym = (lambda rho, _p=p: self.param_symbol(_p, rho)) if self.param_symbol else None
            label = ",".join(f"{k}={v:.4g}" for k, v in p.items())
            out.append(State(label, trip, sym, params=p))
        return out

    def strategy(self):
        """Description of how sup/inf over x are formed (for reports)."""
        if self.state_mode == "constant":
            return {"mode": "constant"}
        if self.state_mode == "grid":
            return {"mode": "grid", "box": list(self.grid_box), "points_per_axis": self.grid_points,
                    "spacing": list(self.grid_spacing())}
        return {"mode": "parametric",
                "hint": self.envelope_hint or f"grid:{self.param_grid}",
                "bounds": {k: [pf.lo, pf.hi] for k, pf in self.param_fields.items()},
                "assumption": "fields vary independently and attain their declared bounds"}

    def envelope(self, sel: EnvelopeSelector, fn):
        """sup or inf over the state samples of fn(state)."""
        return sel.pick([fn(s) for s in self.states()])

    def has_measure(self):
        try:
            return any(s.triplet is not None and s.triplet.has_jumps() for s in self.states())
        except UnsupportedModelError:
            return False

    def scaled(self, k):
        """Family with every Levy measure multiplied by k (diffusion unchanged)."""
        trip = self.triplet.scaled(k) if self.triplet is not None else None
        model = (lambda p, _m=self.param_model: _m(p).scaled(k)) if self.param_model else None
        return replace(self, triplet=trip, param_model=model, param_symbol=None, symbol_override=None,
                       name=f"{self.name}*{k:g}")

    def verify_symbol_override(self, rel_tol=1e-6, rhos=(0.01, 0.1, 1.0, 10.0)):
        """Largest relative gap between closed-form and quadrature symbols over the states."""
        worst = 0.0
        for s in self.states():
            if s.symbol is None or s.triplet is None:
                continue
            for rho in rhos:
                exact = eval_symbol(s.triplet, ORIGIN, rho)
                closed = s.symbol(rho)
                gap = abs(closed - exact) / max(abs(exact), 1e-300)
                worst = max(worst, gap)
        if worst > rel_tol:
            raise ModelError(f"{self.name}: closed-form symbol deviates from quadrature by {worst:.3g}")
        return worst

    def validate(self):
        for s in self.states():
            if s.triplet is not None:
                s.triplet.validate()
        return True


def radial_symbol_profile(family: ProcessFamily, sel: EnvelopeSelector, rho: float) -> float:
    """sup_x or inf_x of q(x, (rho, 0))."""
    if rho < 0:
        raise ValueError("radial frequency must be nonnegative")
    if rho == 0:
        return 0.0
    return family.envelope(sel, lambda s: s.q(rho))


def cumulative_tail_integral(family: ProcessFamily, sel: EnvelopeSelector, rho: float) -> float:
    """sup_x or inf_x of int_0^rho u nu(x, B_u^c) du."""
    if rho <= 0:
        raise ValueError("radius must be positive")
    return family.envelope(sel, lambda s: cumulative_tail_integral_at(s.triplet, ORIGIN, rho)
                           if s.triplet is not None else _no_measure(family))


def envelope_ball_tail(family, sel, rho):
    return family.envelope(sel, lambda s: ball_tail(s.triplet, ORIGIN, rho) if s.triplet else _no_measure(family))


def envelope_second_moment(family, sel, rho):
    return family.envelope(sel, lambda s: truncated_second_moment(s.triplet, ORIGIN, rho)
                           if s.triplet else _no_measure(family))


def envelope_density(family, sel, u):
    return family.envelope(sel, lambda s: float(s.triplet.jump_density.evaluate(ORIGIN, np.array([u]))[0])
                           if s.triplet else _no_measure(family))


def _no_measure(family):
    raise UnsupportedModelError(f"{family.name}: no Levy measure declared")


# ---------------------------------------------------------------------------
# second moment and quasi-unimodality


class SecondMoment(str, Enum):
    FINITE = "Finite"
    INFINITE = "Infinite"
    INDETERMINATE = "Indeterminate"


def declared_second_moment(triplet: LevyTriplet2D) -> Optional[SecondMoment]:
    """Second-moment class implied by a declared tail, None when undeclared."""
    dens = triplet.jump_density
    if dens.is_zero or math.isfinite(dens.support_cap):
        return SecondMoment.FINITE
    tail = dens.declared_tail
    if tail is None:
        return None
    if tail.delta > -4 or (tail.delta == -4 and tail.log_exponent >= -1):
        return SecondMoment.INFINITE
    return SecondMoment.FINITE


def second_moment_classifier(family: ProcessFamily, sel: EnvelopeSelector = INF,
                             probe=(1e2, 1e8), points=25, growth_tol=0.02) -> SecondMoment:
    """Finite / Infinite / Indeterminate class of the (sup or inf) second moment int |y|^2 nu."""
    states = family.states()
    if any(s.triplet is None for s in states):
        return SecondMoment.INDETERMINATE
    declared = [declared_second_moment(s.triplet) for s in states]
    if all(d is not None for d in declared):
        if sel is INF:
            return SecondMoment.INFINITE if all(d is SecondMoment.INFINITE for d in declared) else SecondMoment.FINITE
        return SecondMoment.INFINITE if any(d is SecondMoment.INFINITE for d in declared) else SecondMoment.FINITE
    radii = np.geomspace(probe[0], probe[1], points)
    vals = np.array([family.envelope(sel, lambda s, r=r: truncated_second_moment(s.triplet, ORIGIN, r))
                     for r in radii])
    if vals[-1] == 0.0:
        return SecondMoment.FINITE
    if np.any(vals <= 0):
        vals = vals[vals > 0]
        radii = radii[-vals.size:]
    from .asymptotics import INFINITY, fit_samples
    try:
        fit = fit_samples(radii, vals, INFINITY)
    except FitError:
        return SecondMoment.INDETERMINATE
    rel_growth = (vals[-1] - vals[-points // 3]) / vals[-1]
    if fit.exponent_a > growth_tol:
        return SecondMoment.INFINITE
    if rel_growth < 1e-3 and fit.exponent_a <= growth_tol:
        return SecondMoment.FINITE
    if fit.log_exponent_b > 0.5 and rel_growth > 0.05:
        return SecondMoment.INFINITE
    return SecondMoment.INDETERMINATE


@dataclass(frozen=True)
class UnimodalityCertificate:
    holds: bool
    u0: Optional[float] = None
    method: str = ""

    def __bool__(self):
        return self.holds


def quasi_unimodality_certificate(triplet: LevyTriplet2D, xs: Sequence = (ORIGIN,), grid=(1e-3, 1e7),
                                  per_decade=64, margin=1e-12, tail_decades=2.0) -> UnimodalityCertificate:
    """Holds(u0) when u -> n(x, u) is nonincreasing beyond u0 for every sampled x.

    A declared ``decreasing_beyond`` is trusted (it is checked by
    ``LevyTriplet2D.validate``); otherwise monotonicity is sampled on a
    geometric grid and u0 is the first grid point past the last increase.
    The certificate is withheld when increases persist into the last
    ``tail_decades`` of the grid.
    """
    dens = triplet.jump_density
    if dens.is_zero:
        return UnimodalityCertificate(True, 0.0, "zero measure")
    if dens.decreasing_beyond is not None:
        return UnimodalityCertificate(True, float(dens.decreasing_beyond), "declared")
    k = int(round(math.log10(grid[1] / grid[0]) * per_decade)) + 1
    radii = np.geomspace(grid[0], grid[1], k)
    last_bad = -1
    for x in xs:
        vals = dens.evaluate(np.asarray(x, dtype=float), radii)
        rises = np.nonzero(np.diff(vals) > margin * np.abs(vals[:-1]) + 1e-300)[0]
        if rises.size:
            last_bad = max(last_bad, int(rises[-1]) + 1)
    if last_bad < 0:
        return UnimodalityCertificate(True, 0.0, "sampled")
    if last_bad >= k - int(tail_decades * per_decade):
        return UnimodalityCertificate(False, None, "sampled")
    return UnimodalityCertificate(True, float(radii[last_bad]), "sampled")
