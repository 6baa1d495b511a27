"""Power-log asymptotic fits and the divergence decisions built on them."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import FitError


class End(str, Enum):
    ORIGIN = "Origin"
    INFINITY = "Infinity"


ORIGIN_END = End.ORIGIN
INFINITY = End.INFINITY


class IntegralForm(str, Enum):
    ORIGIN_WEIGHTED = "OriginWeighted"  # int_0 rho drho / g
    INFINITY_RECIPROCAL = "InfinityReciprocal"  # int^inf drho / g


class Decision(str, Enum):
    DIVERGENT = "Divergent"
    CONVERGENT = "Convergent"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class GridSpec:
    lo: float
    hi: float
    points: int = 48

    def radii(self):
        return np.geomspace(self.lo, self.hi, self.points)


@dataclass(frozen=True)
class DecisionBands:
    eps_a: float = 0.02
    eps_b: float = 0.05
    residual_ceiling: float = 0.05


@dataclass(frozen=True)
class AsymptoticFit:
    """g(rho) ~ C rho^a L^b with L = ln(1/rho) at the origin and ln(rho) at infinity.

    ``source`` is "numeric" for a least-squares fit and "declared" when the
    exponents come from declared tail metadata (exact; the scale is still
    fitted).  A declared fit carries the numeric fit that corroborates it.
    """

    end: End
    exponent_a: float
    log_exponent_b: float
    scale_C: float
    residual: float
    grid: tuple = ()
    reliable: bool = True
    source: str = "numeric"
    corroboration: Optional["AsymptoticFit"] = None
    label: str = ""

    def as_dict(self):
        out = {"label": self.label, "end": self.end.value, "a": self.exponent_a, "b": self.log_exponent_b,
               "C": self.scale_C, "residual": self.residual, "reliable": self.reliable, "source": self.source,
               "grid": [float(self.grid[0]), float(self.grid[-1]), len(self.grid)] if len(self.grid) else []}
        if self.corroboration is not None:
            out["numeric"] = self.corroboration.as_dict()
        return out


def _log_coordinate(rho, end):
    return np.log(np.log(1.0 / rho)) if end is End.ORIGIN else np.log(np.log(rho))


def _check_grid(rho, end):
    if rho.size < 16:
        raise FitError("asymptotic fit needs at least 16 grid points")
    if math.log10(rho.max() / rho.min()) < 3.0 - 1e-9:
        raise FitError("asymptotic fit needs a grid spanning at least 3 decades")
    if end is End.ORIGIN and rho.max() >= 1.0:
        raise FitError("origin grid must lie in (0, 1)")
    if end is End.INFINITY and rho.min() <= 1.0:
        raise FitError("infinity grid must lie in (1, inf)")


def fit_asymptote(profile, end, grid_spec, residual_ceiling=0.05, log_values=False, label="") -> AsymptoticFit:
    """Least-squares fit of ln g = a ln rho + b ln L + ln C, residual on held-out points.

    ``profile`` maps a radius (or an array of radii, when marked with
    ``vectorized``) to g, or to ln g when ``log_values`` is set.
    """
    rho = grid_spec.radii() if isinstance(grid_spec, GridSpec) else np.asarray(grid_spec, dtype=float)
    rho = np.sort(rho)
    vals = np.asarray(profile(rho) if _vectorizable(profile) else [profile(r) for r in rho], dtype=float)
    return fit_samples(rho, vals, end, residual_ceiling, log_values=log_values, label=label)


def fit_samples(rho, vals, end, residual_ceiling=0.05, log_values=False, label="") -> AsymptoticFit:
    """Fit on precomputed samples; even-indexed points are fitted, odd-indexed ones held out."""
    end = End(end)
    rho = np.asarray(rho, dtype=float)
    vals = np.asarray(vals, dtype=float)
    _check_grid(rho, end)
    if log_values:
        logg = vals
    else:
        if np.any(~(vals > 0)) or np.any(~np.isfinite(vals)):
            raise FitError("profile must be strictly positive and finite on the grid")
        logg = np.log(vals)
    if np.any(~np.isfinite(logg)):
        raise FitError("profile must be strictly positive and finite on the grid")
    design = np.column_stack([np.log(rho), _log_coordinate(rho, end), np.ones_like(rho)])
    train = np.arange(rho.size) % 2 == 0
    coef, *_ = np.linalg.lstsq(design[train], logg[train], rcond=None)
    pred = design @ coef
    held = ~train
    residual = float(np.max(np.abs(np.expm1(pred[held] - logg[held]))))
    a, b, lnc = (float(c) for c in coef)
    return AsymptoticFit(end, a, b, math.exp(lnc), residual, tuple(rho.tolist()),
                         reliable=residual <= residual_ceiling, label=label)


def _vectorizable(profile):
    return getattr(profile, "vectorized", False)


def vectorized(fn):
    fn.vectorized = True
    return fn


def declared_fit(a, b, profile_values, rho, end, numeric: Optional[AsymptoticFit], label="") -> AsymptoticFit:
    """Fit with exponents fixed to (a, b); C is the geometric-mean scale on the grid."""
    end = End(end)
    rho = np.asarray(rho, dtype=float)
    vals = np.asarray(profile_values, dtype=float)
    basis = a * np.log(rho) + b * _log_coordinate(rho, end)
    lnc = float(np.mean(np.log(vals) - basis))
    residual = float(np.max(np.abs(np.expm1(basis + lnc - np.log(vals)))))
    return AsymptoticFit(end, float(a), float(b), math.exp(lnc), residual, tuple(rho.tolist()), reliable=True,
                         source="declared", corroboration=numeric, label=label)


def corroborates(declared_ab, numeric: AsymptoticFit, tol_a=0.05, tol_b=0.5) -> bool:
    a, b = declared_ab
    return abs(numeric.exponent_a - a) <= tol_a and abs(numeric.log_exponent_b - b) <= tol_b


def decide_integral(fit: AsymptoticFit, form, bands: DecisionBands = DecisionBands()) -> Decision:
    """Divergence class of int_0 rho drho/g (origin) or int^inf drho/g (infinity) from the fitted class."""
    form = IntegralForm(form)
    expected = End.ORIGIN if form is IntegralForm.ORIGIN_WEIGHTED else End.INFINITY
    if fit.end is not expected:
        raise ValueError(f"{form.value} needs a fit at {expected.value}")
    if not fit.reliable:
        return Decision.INCONCLUSIVE
    exact = fit.source == "declared"
    eps_a = 0.0 if exact else bands.eps_a
    eps_b = 0.0 if exact else bands.eps_b
    a, b = fit.exponent_a, fit.log_exponent_b
    if form is IntegralForm.ORIGIN_WEIGHTED:
        # int_0 rho^(1-a) L^-b drho diverges iff a > 2, or a = 2 and b <= 1
        threshold, above, below = 2.0, Decision.DIVERGENT, Decision.CONVERGENT
        at_edge_small_b, at_edge_large_b = Decision.DIVERGENT, Decision.CONVERGENT
    else:
        # int^inf rho^-a L^-b drho converges iff a > 1, or a = 1 and b > 1
        threshold, above, below = 1.0, Decision.CONVERGENT, Decision.DIVERGENT
        at_edge_small_b, at_edge_large_b = Decision.DIVERGENT, Decision.CONVERGENT
    if exact:
        if a != threshold:
            return above if a > threshold else below
        return at_edge_small_b if b <= 1.0 else at_edge_large_b
    if abs(a - threshold) >= eps_a:
        return above if a > threshold else below
    if abs(b - 1.0) < eps_b:
        return Decision.INCONCLUSIVE
    return at_edge_small_b if b < 1.0 else at_edge_large_b


def dominant_class(classes, end, pick):
    """Leading (a, b) class of a sum (pick="sum") or an envelope (pick="sup"/"inf") of power-log terms.

    At infinity the larger (a, b) dominates; at the origin the smaller a
    (then larger b) dominates.  ``None`` entries stand for identically zero
    terms.
    """
    live = [c for c in classes if c is not None]
    if not live:
        return None
    if End(end) is End.INFINITY:
        key = lambda c: (c[0], c[1])
    else:
        key = lambda c: (-c[0], c[1])
    if pick in ("sum", "sup"):
        return max(live, key=key)
    if len(live) < len(classes):
        return None
    return min(live, key=key)
