"""Linear images, perturbation equivalence and tail comparison as verdict-transfer rules."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import quadrature as quad
from .asymptotics import End, corroborates, fit_samples
from .core import (INF, ORIGIN, SUP, TWO_PI, LevyTriplet2D, ProcessFamily, RadialDensity, SecondMoment, ball_tail,
                   eval_symbol, halfplane_tail, quasi_unimodality_certificate, radial_symbol_profile,
                   second_moment_classifier)
from .criteria import (CriteriaConfig, DEFAULT_CONFIG, INCONCLUSIVE, RECURRENT, TRANSIENT, UNKNOWN, Gate, Verdict,
                       _envelope_class, symbol_class_origin)
from .errors import FitError, LevyRecError, ModelError, QuadratureError


@dataclass(frozen=True)
class PlaneRotation:
    angle: float

    def __post_init__(self):
        object.__setattr__(self, "angle", float(self.angle) % TWO_PI)

    @property
    def matrix(self):
        c, s = math.cos(self.angle), math.sin(self.angle)
        return np.array([[c, -s], [s, c]])

    def inverse(self):
        return PlaneRotation(TWO_PI - self.angle)

    def __call__(self, x):
        return self.matrix @ np.asarray(x, dtype=float)


IDENTITY = PlaneRotation(0.0)


def _is_orthogonal(m):
    return np.allclose(m @ m.T, np.eye(2), atol=1e-12)


@dataclass(frozen=True)
class LinearImage:
    """The process M F for a base triplet F and a regular matrix M.

    q_M(x, xi) = q(M^-1 x, M^T xi), C_M(x) = c(M^-1 x) M M^T and
    nu_M(x, dy) = nu(M^-1 x, M^-1 dy).  The drift correction of the
    unit-ball cutoff vanishes because nu is symmetric.  ``triplet`` is set
    only when M is orthogonal, the case in which the image stays radial.
    """

    base: LevyTriplet2D
    matrix: np.ndarray

    @property
    def inverse(self):
        return np.linalg.inv(self.matrix)

    @property
    def radial(self):
        return _is_orthogonal(self.matrix)

    @property
    def triplet(self) -> Optional[LevyTriplet2D]:
        if not self.radial:
            return None
        if not self.base.x_dependent:
            return self.base
        inv = self.inverse
        dens = self.base.jump_density
        moved = replace(dens, density=lambda x, u, _d=dens.density: _d(inv @ np.asarray(x, dtype=float), u))
        return LevyTriplet2D(lambda x, _c=self.base.diffusion: _c(inv @ np.asarray(x, dtype=float)), moved,
                             self.base.finite_part, x_dependent=True)

    def symbol(self, x, xi):
        y = self.inverse @ np.asarray(x, dtype=float)
        eta = self.matrix.T @ np.asarray(xi, dtype=float)
        return eval_symbol(self.base, y, float(np.hypot(*eta)))

    def diffusion_matrix(self, x):
        c = self.base.c(self.inverse @ np.asarray(x, dtype=float))
        return c * self.matrix @ self.matrix.T

    drift_correction = np.zeros(2)

    def ball_tail(self, x, u, angles=256):
        """nu_M(x, B_u^c) = (1/2pi) int_0^{2pi} nu(M^-1 x, B^c_{u/|M e_theta|}) d theta."""
        y = self.inverse @ np.asarray(x, dtype=float)
        if self.radial:
            return ball_tail(self.base, y, u)
        theta = np.arange(angles) * TWO_PI / angles
        stretch = np.hypot(*(self.matrix @ np.vstack([np.cos(theta), np.sin(theta)])))
        # periodic trapezoid rule, exact up to spectral error
        return float(np.mean([ball_tail(self.base, y, u / s) for s in stretch]))

    def transform(self, m2):
        """Image under a further matrix m2, i.e. the image of the base under m2 @ M."""
        return linear_transform(self.base, np.asarray(m2, dtype=float) @ self.matrix)


def linear_transform(triplet: LevyTriplet2D, m) -> LinearImage:
    m = np.asarray(m.matrix if isinstance(m, PlaneRotation) else m, dtype=float)
    if m.shape != (2, 2):
        raise ModelError("transform matrix must be 2x2")
    if abs(np.linalg.det(m)) < 1e-14 * max(1.0, np.abs(m).max() ** 2):
        raise ModelError("transform matrix is singular")
    return LinearImage(triplet, m)


def rotate_family(family: ProcessFamily, rotation: PlaneRotation) -> ProcessFamily:
    """Family of the rotated process; coefficient fields are composed with the inverse rotation."""
    inv = rotation.inverse().matrix
    out = replace(family, name=f"{family.name}@rot{rotation.angle:.4g}")
    if family.triplet is not None:
        out = replace(out, triplet=linear_transform(family.triplet, rotation).triplet)
    if family.param_fields:
        from .core import ParamField
        fields = {k: ParamField(lambda x, _f=pf.fn: _f(inv @ np.asarray(x, dtype=float)), pf.lo, pf.hi)
                  for k, pf in family.param_fields.items()}
        out = replace(out, param_fields=fields)
    if family.symbol_override is not None:
        out = replace(out, symbol_override=lambda x, rho, _s=family.symbol_override: _s(inv @ np.asarray(x), rho))
    return out


# ---------------------------------------------------------------------------
# perturbation


@dataclass
class PerturbationReport:
    distance: float
    constant_c: float
    gate_liminf: str
    conclusion: str
    gate_basis: str = ""
    liminf_estimate: Optional[float] = None
    sample_states: int = 1
    notes: list = field(default_factory=list)

    def as_dict(self):
        return {"distance": self.distance, "constant_c": self.constant_c, "gate_liminf": self.gate_liminf,
                "gate_basis": self.gate_basis, "liminf_estimate": self.liminf_estimate,
                "conclusion": self.conclusion, "sample_states": self.sample_states, "notes": list(self.notes)}


DEFAULT_BOX = (-4.0, 4.0, -4.0, 4.0)


def _sample_states(*families, box=DEFAULT_BOX, points=5):
    for f in families:
        if f.state_mode == "grid":
            return f.grid_xs()
    if all(f.state_mode == "constant" for f in families):
        return [ORIGIN]
    x0, x1, y0, y1 = box
    return [np.array([a, b]) for a in np.linspace(x0, x1, points) for b in np.linspace(y0, y1, points)]


def _moment_distance(ta: LevyTriplet2D, tb: LevyTriplet2D, tol=1e-10) -> float:
    """int |y|^2 |nu_A - nu_B|(dy) for frozen radial triplets."""
    da, db = ta.jump_density, tb.jump_density
    cuts = sorted(set(da.cuts()) | set(db.cuts()))

    def f(u):
        return u ** 3 * np.abs(da.evaluate(ORIGIN, u) - db.evaluate(ORIGIN, u))

    total = 0.0
    if not (da.is_zero and db.is_zero):
        cap = max(da.support_cap, db.support_cap)
        inner = [p for p in cuts if p < cap]
        first = inner[0] if inner else 1.0
        total = quad.integrate(f, 0.0, first, tol=tol)
        if math.isinf(cap):
            last = inner[-1] if inner else first
            if last > first:
                total += quad.integrate(f, first, last, breakpoints=inner, tol=tol)
            total += quad.integrate_to_infinity(f, last, tol=tol)
        elif cap > first:
            total += quad.integrate(f, first, cap, breakpoints=inner, tol=tol)
        total *= TWO_PI
    rings = {}
    for r, m in ta.rings():
        rings[r] = rings.get(r, 0.0) + m
    for r, m in tb.rings():
        rings[r] = rings.get(r, 0.0) - m
    return total + sum(r * r * abs(m) for r, m in rings.items())


def _liminf_symbol_ratio(family: ProcessFamily, cfg: CriteriaConfig):
    """Estimate of liminf_{rho -> 0} inf_x q(x, rho) / rho^2 from the origin fit of inf_x q."""
    rho = cfg.origin_grid.radii()
    vals = np.array([radial_symbol_profile(family, INF, r) for r in rho])
    if np.all(vals == 0):
        return 0.0, "inf symbol vanishes"
    fit = fit_samples(rho, vals, End.ORIGIN, cfg.bands.residual_ceiling)
    a, b = fit.exponent_a, fit.log_exponent_b
    declared = _envelope_class(family, INF, End.ORIGIN, lambda s: symbol_class_origin(s.triplet, s.triplet.c(ORIGIN)))
    if declared not in (None, UNKNOWN) and corroborates(declared, fit, cfg.corroborate_a, cfg.corroborate_b):
        a, b = declared
        eps_a = eps_b = 0.0
    else:
        eps_a, eps_b = cfg.bands.eps_a, cfg.bands.eps_b
    if a < 2 - eps_a:
        return math.inf, f"a={a:.4g} < 2"
    if a > 2 + eps_a:
        return 0.0, f"a={a:.4g} > 2"
    if b > eps_b:
        return math.inf, f"a=2, log exponent {b:.4g} > 0"
    if b < -eps_b:
        return 0.0, f"a=2, log exponent {b:.4g} < 0"
    return float(np.min(vals[:8] / rho[:8] ** 2)), "a=2: finite limit read off the smallest radii"


def perturbation_equivalent(fam_a: ProcessFamily, fam_b: ProcessFamily, rotation: PlaneRotation = IDENTITY,
                            cfg: CriteriaConfig = DEFAULT_CONFIG, rel_tie=1e-3) -> PerturbationReport:
    """Whether A and B = A perturbed in second moment share their recurrence (and transience) verdicts."""
    xs = _sample_states(fam_a, fam_b)
    notes = []
    distance = 0.0
    cdiff = 0.0
    for x in xs:
        ta, tb = fam_a.triplet_at(x), fam_b.triplet_at(rotation(x))
        cdiff = max(cdiff, abs(ta.c(x) - tb.c(rotation(x))))
        try:
            distance = max(distance, _moment_distance(ta, tb))
        except QuadratureError as exc:
            distance = math.inf
            notes.append(f"distance integral diverges: {exc}")
            break
    constant_c = 0.5 * cdiff + distance
    if not math.isfinite(distance):
        return PerturbationReport(math.inf, math.inf, "unknown", "NotEstablished", sample_states=len(xs), notes=notes)

    gate, basis, est = "unknown", "", None
    if second_moment_classifier(fam_a, SUP) is SecondMoment.FINITE:
        # with finite second moments the transience equivalence needs no liminf bound on inf_x q / |xi|^2
        gate, basis = "holds", "finite second moment: both verdicts follow without the liminf condition"
    else:
        try:
            est, why = _liminf_symbol_ratio(fam_a, cfg)
        except (FitError, LevyRecError) as exc:
            why = f"origin fit failed: {exc}"
        basis = why
        if est is not None:
            if math.isinf(est):
                gate = "holds"
            elif est > constant_c * (1 + rel_tie):
                gate = "holds"
            elif est < constant_c * (1 - rel_tie):
                gate = "fails"
            else:
                gate = "unknown"
                notes.append("liminf ties with the constant c: no conclusion")
    conclusion = "FullyEquivalent" if gate == "holds" else "RecurrenceEquivalent"
    return PerturbationReport(float(distance), float(constant_c), gate, conclusion, basis,
                              None if est is None else float(est), len(xs), notes)


# ---------------------------------------------------------------------------
# tail comparison


@dataclass
class Domination:
    dominates: bool
    mode: str
    u0: float
    witness: Optional[float] = None
    witness_state: Optional[list] = None
    grid: tuple = ()

    def as_dict(self):
        return {"dominates": self.dominates, "mode": self.mode, "u0": self.u0, "witness": self.witness,
                "witness_state": self.witness_state, "grid": [self.grid[0], self.grid[-1], len(self.grid)]}


def tail_dominates(fam_a: ProcessFamily, fam_b: ProcessFamily, u0: float = 0.0, mode: str = "BallTail",
                   per_decade: int = 64, decades: float = 4.0, margin: float = 1e-12) -> Domination:
    """nu_A(x, .) tails >= nu_B(x, .) tails for all sampled x and u >= u0 on a geometric grid."""
    if mode not in ("BallTail", "HalfPlaneTail"):
        raise ValueError("mode must be BallTail or HalfPlaneTail")
    fn = ball_tail if mode == "BallTail" else halfplane_tail
    start = u0 if u0 > 0 else 1e-2
    us = np.geomspace(start, start * 10 ** decades, int(per_decade * decades) + 1)
    for x in _sample_states(fam_a, fam_b):
        ta, tb = fam_a.triplet_at(x), fam_b.triplet_at(x)
        for u in us:
            va, vb = fn(ta, x, float(u)), fn(tb, x, float(u))
            if va - vb < -margin * max(1.0, abs(vb)):
                return Domination(False, mode, u0, float(u), [float(v) for v in x], tuple(us.tolist()))
    return Domination(True, mode, u0, grid=tuple(us.tolist()))


def comparison_gates(dominating: ProcessFamily):
    """Gates of the comparison theorem that concern the dominating family."""
    certs = [quasi_unimodality_certificate(s.triplet) for s in dominating.states()]
    qu = Gate("quasi-unimodality of the dominating family", "holds" if all(certs) else "unknown",
              f"u0={max(c.u0 for c in certs):g}" if all(certs) else "not certified")
    sm = second_moment_classifier(dominating, INF)
    g38 = Gate("infinite quadratic liminf on the dominating family", {SecondMoment.INFINITE: "holds", SecondMoment.FINITE: "fails"}
               .get(sm, "unknown"), f"inf second moment {sm.value}")
    return [qu, g38]


def transfer_classification(verdict_src: Verdict, domination: Domination, direction: str,
                            dominating: Optional[ProcessFamily] = None, gates: Optional[Sequence[Gate]] = None
                            ) -> Verdict:
    """Carry a verdict across a tail domination A >= B.

    direction "recurrence": verdict_src is about A; recurrence of A gives
    recurrence of B.  direction "transience": verdict_src is about B;
    transience of B gives transience of A when inf_x q_A(x, xi) / |xi|^2 -> infinity as xi -> 0.
    """
    if direction not in ("recurrence", "transience"):
        raise ValueError("direction must be 'recurrence' or 'transience'")
    if gates is None:
        gates = comparison_gates(dominating) if dominating is not None else [
            Gate("quasi-unimodality of the dominating family", "unknown", "dominating family not supplied")]
    gates = list(gates)
    chain = [f"source {verdict_src.criterion}: {verdict_src.value.value}",
             f"domination ({domination.mode}, u0={domination.u0:g}): "
             f"{'Dominates' if domination.dominates else f'Fails at u={domination.witness:g}'}"]
    crit = f"transfer:{direction}<-{verdict_src.criterion}"
    if not domination.dominates:
        return Verdict(INCONCLUSIVE, crit, assumptions=gates, notes=chain + ["domination fails"])
    needed = ["quasi-unimodality of the dominating family"]
    want = RECURRENT
    if direction == "transience":
        needed.append("infinite quadratic liminf on the dominating family")
        want = TRANSIENT
    status = {g.name: g.outcome for g in gates}
    missing = [n for n in needed if status.get(n) != "holds"]
    if verdict_src.value is not want:
        return Verdict(INCONCLUSIVE, crit, assumptions=gates,
                       notes=chain + [f"source verdict is not {want.value}; nothing to transfer"])
    if missing:
        return Verdict(INCONCLUSIVE, crit, assumptions=gates, notes=chain + [f"gates not established: {missing}"])
    return Verdict(want, crit, verdict_src.fits, gates, verdict_src.assessments, chain)
