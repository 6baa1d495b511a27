"""Ready-made process families: Brownian, isotropic stable, stable-like, log-power tails, annuli.

The stable constant ``gamma_constant`` follows the d-dimensional formula

    int_{R^d} (1 - cos <xi, y>) |y|^{-d-alpha} dy
        = |xi|^alpha pi^{d/2} Gamma(1 - alpha/2) / (alpha 2^{alpha-1} Gamma((d + alpha)/2))

so ``dim=1`` reproduces the one-dimensional constant and ``dim=2`` the
planar one used for the symbols below.
"""
from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np

from .core import (DeclaredTail, FinitePart, LevyTriplet2D, ParamField, ProcessFamily, RadialDensity)
from .errors import ModelError


def gamma_constant(alpha: float, beta: float = 1.0, dim: int = 2) -> float:
    """Symbol constant of the isotropic density beta |y|^{-dim-alpha} in R^dim."""
    if not 0 < alpha < 2:
        raise ModelError("stable index must lie in (0, 2)")
    return beta * math.pi ** (dim / 2) * math.gamma(1 - alpha / 2) / (
        alpha * 2 ** (alpha - 1) * math.gamma((dim + alpha) / 2))


def brownian(c: float = 1.0, name: str = "brownian") -> ProcessFamily:
    if c < 0:
        raise ModelError("diffusion coefficient must be nonnegative")
    return ProcessFamily(name, LevyTriplet2D(float(c)), kind="brownian", meta={"c": c})


def stable_density(alpha: float, beta: float = 1.0) -> RadialDensity:
    p = 2.0 + alpha
    return RadialDensity.from_profile(lambda u: beta * u ** -p, decreasing_beyond=0.0,
                                      declared_tail=DeclaredTail(-p, 0.0), label=f"stable({alpha:g})")


def stable(alpha: float, beta: float = 1.0, c: float = 0.0, name: Optional[str] = None) -> ProcessFamily:
    """Rotation-invariant alpha-stable Levy process, optionally with a Gaussian part."""
    if beta <= 0:
        raise ModelError("beta must be positive")
    g = gamma_constant(alpha, beta)
    trip = LevyTriplet2D(float(c), stable_density(alpha, beta))
    return ProcessFamily(name or f"stable_{alpha:g}", trip, symbol_override=lambda x, rho: 0.5 * c * rho * rho + g * rho ** alpha,
                         kind="stable", meta={"alpha": alpha, "beta": beta, "c": c, "gamma": g})


def stable_like(alpha: ParamField, beta: ParamField, name: str = "stable_like", param_grid: Optional[int] = None
                ) -> ProcessFamily:
    """Stable-like family: jump density beta(x) |y|^{-2-alpha(x)}, symbol gamma(x) |xi|^alpha(x).

    Without ``param_grid`` the envelopes use the corners of the declared
    parameter box.  q is linear in beta, and for rho near 0 (or the tails
    near infinity) the factor rho^alpha outweighs the variation of the
    constant in alpha, so the corners carry the sup and inf on the fit grids.
    """
    def model(p):
        return LevyTriplet2D(0.0, stable_density(p["alpha"], p["beta"]))

    def symbol(p, rho):
        return gamma_constant(p["alpha"], p["beta"]) * rho ** p["alpha"]

    return ProcessFamily(name, None, state_mode="parametric", param_fields={"alpha": alpha, "beta": beta},
                         param_model=model, param_symbol=symbol,
                         envelope_hint=None if param_grid else "monotone", param_grid=param_grid,
                         kind="stable_like", meta={"alpha": [alpha.lo, alpha.hi], "beta": [beta.lo, beta.hi]})


def log_power_density(alpha: float, beta: float = 1.0, gamma: float = 0.0, floor: float = math.e) -> RadialDensity:
    """n(u) = beta ln^gamma(u) u^{-2-alpha} on [floor, inf), floor >= e."""
    if floor < math.e:
        raise ModelError("log-power densities start at u >= e")
    p = 2.0 + alpha
    # ln^g(u) u^-p has its maximum at u = exp(g/p)
    turn = max(floor, math.exp(gamma / p)) if gamma > 0 else floor
    if gamma == 0:
        profile = lambda u: beta * u ** -p
    else:
        profile = lambda u: beta * np.log(u) ** gamma * u ** -p
    return RadialDensity.from_profile(profile, support_floor=floor, decreasing_beyond=turn,
                                      declared_tail=DeclaredTail(-p, gamma),
                                      label=f"logpow(a={alpha:g},g={gamma:g})")


def log_power(alpha, beta=1.0, gamma=0.0, name: Optional[str] = None) -> ProcessFamily:
    """Log-power tail family n(x,u) = beta(x) ln^gamma(x)(u) u^{-2-alpha(x)} 1_{u >= e}.

    Scalars give a Levy process; ParamField arguments give a parametric
    Levy-type family whose envelopes are read off the parameter box.
    """
    fields = {k: v if isinstance(v, ParamField) else ParamField.constant(v)
              for k, v in (("alpha", alpha), ("beta", beta), ("gamma", gamma))}
    constant = all(f.lo == f.hi for f in fields.values())
    label = name or "log_power(a={},g={})".format(*(_fmt(fields[k]) for k in ("alpha", "gamma")))
    meta = {k: [f.lo, f.hi] for k, f in fields.items()}
    if constant:
        dens = log_power_density(fields["alpha"].lo, fields["beta"].lo, fields["gamma"].lo)
        return ProcessFamily(label, LevyTriplet2D(0.0, dens), kind="log_power", meta=meta)

    def model(p):
        return LevyTriplet2D(0.0, log_power_density(p["alpha"], p["beta"], p["gamma"]))

    return ProcessFamily(label, None, state_mode="parametric", param_fields=fields, param_model=model,
                         envelope_hint="monotone", kind="log_power", meta=meta)


def _fmt(f: ParamField):
    return f"{f.lo:g}" if f.lo == f.hi else f"[{f.lo:g},{f.hi:g}]"


def power_tail(delta: float, gamma: float = 0.0, beta: float = 1.0, floor: Optional[float] = None,
               name: Optional[str] = None) -> ProcessFamily:
    """Levy process with n(u) = beta ln^gamma(u) u^delta beyond ``floor`` (1, or e with a log factor)."""
    if floor is None:
        floor = math.e if gamma != 0 else 1.0
    if gamma != 0 and floor <= 1.0:
        raise ModelError("a log factor needs a floor above 1")
    if gamma == 0:
        profile = lambda u: beta * u ** delta
        turn = floor
    else:
        profile = lambda u: beta * np.log(u) ** gamma * u ** delta
        turn = max(floor, math.exp(gamma / -delta)) if gamma > 0 else floor
    dens = RadialDensity.from_profile(profile, support_floor=floor, decreasing_beyond=turn,
                                      declared_tail=DeclaredTail(delta, gamma),
                                      label=f"power(d={delta:g},g={gamma:g})")
    return ProcessFamily(name or f"power_tail({delta:g},{gamma:g})", LevyTriplet2D(0.0, dens), kind="regvar",
                         meta={"delta": delta, "gamma": gamma, "beta": beta, "floor": floor})


def annulus(inner: float = 1.0, outer: float = 2.0, level: float = 1.0, c: float = 0.0,
            name: str = "annulus") -> ProcessFamily:
    """Constant density on inner < |y| < outer (a compound Poisson process), plus optional diffusion."""
    dens = RadialDensity.from_profile(lambda u: np.full_like(u, level), support_floor=inner, support_cap=outer,
                                      decreasing_beyond=outer, label="annulus")
    return ProcessFamily(name, LevyTriplet2D(float(c), dens), kind="radial_density",
                         meta={"inner": inner, "outer": outer, "level": level, "c": c})


def with_rings(family: ProcessFamily, rings, r0: Optional[float] = None) -> ProcessFamily:
    """Add a finite rotation-invariant part given as (radius, mass) rings."""
    from dataclasses import replace
    r0 = r0 or max(r for r, _ in rings)
    trip = family.triplet
    return replace(family, triplet=LevyTriplet2D(trip.diffusion, trip.jump_density, FinitePart(r0, tuple(rings)),
                                                 trip.x_dependent), name=f"{family.name}+rings")


def subordinated(base: Callable, alpha: ParamField, name: str = "subordinated", threshold: float = 1.0
                 ) -> ProcessFamily:
    """Variable-order subordination q(x, rho) = base(rho)^alpha(x), symbol only.

    ``threshold`` is a radius below which base(rho) <= 1, so that on
    (0, threshold) the sup envelope is base^inf(alpha) and the inf envelope
    base^sup(alpha).  The corner states realise exactly these envelopes.
    """
    if not 0 < alpha.lo <= alpha.hi <= 1:
        raise ModelError("subordination orders must lie in (0, 1]")

    def symbol(p, rho):
        return float(base(rho)) ** p["alpha"]

    return ProcessFamily(name, None, state_mode="parametric", param_fields={"alpha": alpha},
                         param_symbol=symbol, envelope_hint="monotone", kind="subordinated",
                         meta={"alpha": [alpha.lo, alpha.hi], "threshold": threshold})


def grid_family(triplet: LevyTriplet2D, box, points: int = 9, name: str = "grid", symbol=None) -> ProcessFamily:
    """Levy-type family with x-dependent triplet; envelopes over a sample grid of ``box``."""
    from dataclasses import replace
    trip = replace(triplet, x_dependent=True)
    return ProcessFamily(name, trip, state_mode="grid", grid_box=tuple(box), grid_points=points,
                         symbol_override=symbol, kind="grid")
