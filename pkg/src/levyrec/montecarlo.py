"""Monte Carlo ball probabilities and the return exponent.

A Levy path is a Brownian motion with per-coordinate variance
(c + 1/2 int_{B_eps} |y|^2 nu) t plus a compound Poisson process of the
jumps longer than eps, with rate nu(B_eps^c), radius law from the tail
nu(B_r^c) and a uniform angle.  Positions are produced only at the probe
times, where they are exact for this approximation.

Randomness is counter based (see ``rng``): jump j of path i uses counters
4j .. 4j+3 of the key (seed, i, 0); the Gaussian increment before probe k
uses counters 2k, 2k+1 of the key (seed, i, 1).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._accel import NUMBA_ENABLED, optional_njit, prange
from .core import ORIGIN, LevyTriplet2D, ProcessFamily, ball_tail, truncated_second_moment
from .errors import ConfigError, FitError, ModelError, QuadratureError, UnsupportedModelError
from .families import gamma_constant
from .rng import _stream_key, _uniform, stream_keys, uniform_array

_TWO_PI = 2.0 * math.pi
_MAX_JUMPS_PER_STEP = 10_000


@dataclass(frozen=True)
class SimConfig:
    horizon: float = 1000.0
    step: Optional[float] = None
    small_jump_cutoff: float = 0.01
    path_count: int = 1000
    seed: int = 0
    probe_radius: float = 1.0
    probe_times: Optional[tuple] = None
    probe_count: int = 32
    start: tuple = (0.0, 0.0)

    def __post_init__(self):
        if self.probe_times is None:
            object.__setattr__(self, "probe_times",
                               tuple(np.geomspace(self.horizon / 1000.0, self.horizon, self.probe_count).tolist()))
        else:
            object.__setattr__(self, "probe_times", tuple(float(t) for t in self.probe_times))
        times = np.asarray(self.probe_times)
        if not 0 < self.small_jump_cutoff < 1:
            raise ConfigError("small_jump_cutoff must lie in (0, 1)")
        if self.path_count < 1:
            raise ConfigError("path_count must be positive")
        if self.probe_radius <= 0:
            raise ConfigError("probe_radius must be positive")
        if times.size == 0 or np.any(times <= 0) or np.any(times > self.horizon * (1 + 1e-12)) \
                or np.any(np.diff(times) <= 0):
            raise ConfigError("probe_times must be increasing and lie in (0, horizon]")
        if self.step is None:
            object.__setattr__(self, "step", 1e-2 * float(times[0]))
        if self.step > times[0] / 10 * (1 + 1e-12):
            raise ConfigError("step must not exceed a tenth of the first probe time")


@dataclass
class OccupationEstimate:
    times: np.ndarray
    p_hat: np.ndarray
    stderr: np.ndarray
    n_paths: int
    probe_radius: float
    seed: int
    notes: list = field(default_factory=list)

    def as_dict(self):
        return {"t": self.times.tolist(), "p_hat": self.p_hat.tolist(), "stderr": self.stderr.tolist(),
                "n_paths": self.n_paths, "probe_radius": self.probe_radius, "seed": self.seed,
                "notes": list(self.notes)}


@dataclass
class ReturnFit:
    kappa: float
    half_width: float
    verdict: str
    times_used: tuple
    band: float

    def as_dict(self):
        return {"kappa": self.kappa, "half_width": self.half_width, "verdict": self.verdict,
                "times_used": [float(t) for t in self.times_used], "band": self.band}


# ---------------------------------------------------------------------------
# jump law


@dataclass(frozen=True)
class JumpLaw:
    """Jumps longer than eps: rate, radius sampler, and the folded small-jump variance."""

    rate: float
    sigma2: float
    eps: float
    mode: int  # 0 closed-form power tail, 1 tabulated tail
    alpha: float = 1.0
    tab_x: np.ndarray = field(default_factory=lambda: np.zeros(2))
    tab_y: np.ndarray = field(default_factory=lambda: np.zeros(2))
    cap: float = math.inf
    dens_rate: float = 0.0
    ring_r: np.ndarray = field(default_factory=lambda: np.zeros(0))
    ring_cum: np.ndarray = field(default_factory=lambda: np.zeros(0))


def jump_law(triplet: LevyTriplet2D, eps: float, stable_alpha: Optional[float] = None, table_points=400,
             table_decades=10.0) -> JumpLaw:
    """Build the sampler for a constant-in-x triplet."""
    x = ORIGIN
    c = triplet.c(x)
    try:
        small = truncated_second_moment(triplet, x, eps)
        dens_trip = LevyTriplet2D(0.0, triplet.jump_density)
        dens_rate = ball_tail(dens_trip, x, eps) if not triplet.jump_density.is_zero else 0.0
    except QuadratureError as exc:
        raise ModelError(f"jump intensity beyond eps={eps:g} is not finite; use a larger cutoff ({exc})") from exc
    if not math.isfinite(dens_rate):
        raise ModelError(f"jump intensity beyond eps={eps:g} is not finite; use a larger cutoff")
    rings = [(r, m) for r, m in triplet.rings() if r >= eps and m > 0]
    ring_rate = sum(m for _, m in rings)
    rate = dens_rate + ring_rate
    ring_r = np.array([r for r, _ in rings], dtype=float)
    ring_cum = np.cumsum([m for _, m in rings]) / ring_rate if rings else np.zeros(0)
    sigma2 = c + 0.5 * small
    if stable_alpha is not None:
        return JumpLaw(rate, sigma2, eps, 0, alpha=stable_alpha, dens_rate=dens_rate, ring_r=ring_r,
                       ring_cum=ring_cum)
    dens = triplet.jump_density
    tab_x = np.zeros(2)
    tab_y = np.zeros(2)
    cap = dens.support_cap
    if dens_rate > 0:
        lo = max(eps, dens.support_floor)
        hi = min(lo * 10 ** table_decades, cap * (1 - 1e-9)) if math.isfinite(cap) else lo * 10 ** table_decades
        radii = np.geomspace(lo, hi, table_points)
        tails = np.array([ball_tail(dens_trip, x, float(r)) for r in radii])
        keep = tails > 0
        radii, tails = radii[keep], tails[keep]
        tab_x = -np.log(tails / dens_rate)
        tab_y = np.log(radii)
        tab_x[0] = max(tab_x[0], 0.0)
        tab_x = np.maximum.accumulate(tab_x)
    return JumpLaw(rate, sigma2, eps, 1, tab_x=tab_x, tab_y=tab_y, cap=cap, dens_rate=dens_rate,
                   ring_r=ring_r, ring_cum=ring_cum)


@optional_njit
def _radius(mode, alpha, eps, tab_x, tab_y, cap, u):
    if mode == 0:
        return eps * u ** (-1.0 / alpha)
    z = -math.log(u)
    n = tab_x.shape[0]
    if z >= tab_x[n - 1]:
        if math.isfinite(cap):
            return cap
        # power-law continuation of the last table segment
        slope = (tab_y[n - 1] - tab_y[n - 2]) / max(tab_x[n - 1] - tab_x[n - 2], 1e-300)
        return math.exp(tab_y[n - 1] + slope * (z - tab_x[n - 1]))
    return math.exp(np.interp(z, tab_x, tab_y))


@optional_njit
def _ring_pick(ring_r, ring_cum, u):
    for k in range(ring_r.shape[0]):
        if u <= ring_cum[k]:
            return ring_r[k]
    return ring_r[ring_r.shape[0] - 1]


# ---------------------------------------------------------------------------
# Levy paths (numba kernel, loops per path)


@optional_njit(parallel=True)
def _levy_kernel(seed, path_lo, probes, rate, sigma2, mode, alpha, eps, tab_x, tab_y, cap, dens_rate,
                 ring_r, ring_cum, out_pos, out_jumps):
    n_paths = out_pos.shape[0]
    n_probe = probes.shape[0]
    for i in prange(n_paths):
        kj = _stream_key(seed, path_lo + i, 0)
        kg = _stream_key(seed, path_lo + i, 1)
        x = 0.0
        y = 0.0
        t_prev = 0.0
        j = 0
        t_jump = math.inf
        if rate > 0:
            t_jump = -math.log(_uniform(kj, 0)) / rate
        for k in range(n_probe):
            tp = probes[k]
            while t_jump <= tp:
                u_r = _uniform(kj, 4 * j + 1)
                u_a = _uniform(kj, 4 * j + 2)
                u_s = _uniform(kj, 4 * j + 3)
                if u_s * rate < dens_rate:
                    r = _radius(mode, alpha, eps, tab_x, tab_y, cap, u_r)
                else:
                    r = _ring_pick(ring_r, ring_cum, u_r)
                x += r * math.cos(_TWO_PI * u_a)
                y += r * math.sin(_TWO_PI * u_a)
                j += 1
                t_jump += -math.log(_uniform(kj, 4 * j)) / rate
            if sigma2 > 0:
                s = math.sqrt(sigma2 * (tp - t_prev))
                g1 = _uniform(kg, 2 * k)
                g2 = _uniform(kg, 2 * k + 1)
                rad = math.sqrt(-2.0 * math.log(g1))
                x += s * rad * math.cos(_TWO_PI * g2)
                y += s * rad * math.sin(_TWO_PI * g2)
            t_prev = tp
            out_pos[i, k, 0] = x
            out_pos[i, k, 1] = y
            out_jumps[i, k] = j


def _levy_numpy(seed, path_lo, probes, law: JumpLaw, out_pos, out_jumps):
    """Vectorised over paths: each round advances every path still owing a jump before the probe."""
    n = out_pos.shape[0]
    paths = np.arange(path_lo, path_lo + n, dtype=np.uint64)
    kj = stream_keys(seed, paths, 0)
    kg = stream_keys(seed, paths, 1)
    pos = np.zeros((n, 2))
    j = np.zeros(n, dtype=np.int64)
    t_jump = np.full(n, np.inf)
    if law.rate > 0:
        t_jump = -np.log(uniform_array(kj, np.zeros(n, dtype=np.uint64))) / law.rate
    t_prev = 0.0
    for k, tp in enumerate(probes):
        active = np.nonzero(t_jump <= tp)[0]
        while active.size:
            jj = j[active].astype(np.uint64)
            key = kj[active]
            u_r = uniform_array(key, 4 * jj + 1)
            u_a = uniform_array(key, 4 * jj + 2)
            u_s = uniform_array(key, 4 * jj + 3)
            r = _radius_array(law, u_r, u_s)
            pos[active, 0] += r * np.cos(_TWO_PI * u_a)
            pos[active, 1] += r * np.sin(_TWO_PI * u_a)
            j[active] += 1
            t_jump[active] += -np.log(uniform_array(key, 4 * j[active].astype(np.uint64))) / law.rate
            active = active[t_jump[active] <= tp]
        if law.sigma2 > 0:
            s = math.sqrt(law.sigma2 * (tp - t_prev))
            ctr = np.full(n, 2 * k, dtype=np.uint64)
            g1 = uniform_array(kg, ctr)
            g2 = uniform_array(kg, ctr + np.uint64(1))
            rad = np.sqrt(-2.0 * np.log(g1))
            pos[:, 0] += s * rad * np.cos(_TWO_PI * g2)
            pos[:, 1] += s * rad * np.sin(_TWO_PI * g2)
        t_prev = tp
        out_pos[:, k, :] = pos
        out_jumps[:, k] = j


def _radius_array(law: JumpLaw, u_r, u_s):
    if law.mode == 0:
        r = law.eps * u_r ** (-1.0 / law.alpha)
    else:
        z = -np.log(u_r)
        tx, ty = law.tab_x, law.tab_y
        r = np.exp(np.interp(z, tx, ty))
        beyond = z >= tx[-1]
        if np.any(beyond):
            if math.isfinite(law.cap):
                r[beyond] = law.cap
            else:
                slope = (ty[-1] - ty[-2]) / max(tx[-1] - tx[-2], 1e-300)
                r[beyond] = np.exp(ty[-1] + slope * (z[beyond] - tx[-1]))
    if law.ring_r.size:
        ring = u_s * law.rate >= law.dens_rate
        if np.any(ring):
            idx = np.minimum(np.searchsorted(law.ring_cum, u_r[ring], side="left"), law.ring_r.size - 1)
            r[ring] = law.ring_r[idx]
    return r


def simulate_levy_paths(triplet: LevyTriplet2D, cfg: SimConfig, path_lo: int = 0, n_paths: Optional[int] = None,
                        stable_alpha: Optional[float] = None, law: Optional[JumpLaw] = None):
    """Displacements at the probe times for paths path_lo .. path_lo + n_paths - 1.

    Returns (positions[n, probes, 2], cumulative jump counts[n, probes]).
    """
    if triplet.x_dependent:
        raise UnsupportedModelError("Levy path simulation needs an x-independent triplet")
    n = cfg.path_count if n_paths is None else n_paths
    law = law or jump_law(triplet, cfg.small_jump_cutoff, stable_alpha)
    probes = np.asarray(cfg.probe_times, dtype=float)
    pos = np.zeros((n, probes.size, 2))
    jumps = np.zeros((n, probes.size), dtype=np.int64)
    if NUMBA_ENABLED:
        _levy_kernel(np.uint64(cfg.seed), np.uint64(path_lo), probes, law.rate, law.sigma2, law.mode, law.alpha,
                     law.eps, law.tab_x, law.tab_y, law.cap, law.dens_rate, law.ring_r, law.ring_cum, pos, jumps)
    else:
        _levy_numpy(cfg.seed, path_lo, probes, law, pos, jumps)
    return pos, jumps


def simulate_levy_path(triplet: LevyTriplet2D, cfg: SimConfig, path_index: int, stable_alpha=None):
    """Positions (relative to the start) of one path at the probe times."""
    pos, jumps = simulate_levy_paths(triplet, cfg, path_index, 1, stable_alpha)
    return pos[0], jumps[0]


# ---------------------------------------------------------------------------
# stable-like paths (Euler freeze, vectorised over paths)


def _field_values(pf, xs):
    if pf.lo == pf.hi:
        return np.full(xs.shape[0], pf.lo)
    try:
        vals = np.asarray(pf.fn(xs.T), dtype=float)
        if vals.shape == (xs.shape[0],):
            return vals
    except Exception:
        pass
    return np.array([pf(x) for x in xs])


def simulate_stable_like_paths(family: ProcessFamily, cfg: SimConfig, path_lo: int = 0,
                               n_paths: Optional[int] = None):
    """Euler freeze: each step draws the increment of the Levy law frozen at the current state.

    Jumps beyond eps follow beta(x) |y|^{-2-alpha(x)} (Poisson count per
    step), smaller ones are folded into a Gaussian with variance
    pi beta eps^{2-alpha} / (2 - alpha) per coordinate and unit time.
    """
    if "alpha" not in family.param_fields or "beta" not in family.param_fields:
        raise UnsupportedModelError("stable-like simulation needs alpha and beta fields")
    n = cfg.path_count if n_paths is None else n_paths
    eps = cfg.small_jump_cutoff
    dt = cfg.step
    probes = np.asarray(cfg.probe_times)
    paths = np.arange(path_lo, path_lo + n, dtype=np.uint64)
    kj = stream_keys(cfg.seed, paths, 0)
    kg = stream_keys(cfg.seed, paths, 1)
    start = np.asarray(cfg.start, dtype=float)
    pos = np.tile(start, (n, 1))
    out = np.zeros((n, probes.size, 2))
    jumps_total = np.zeros(n, dtype=np.int64)
    out_jumps = np.zeros((n, probes.size), dtype=np.int64)
    t = 0.0
    step = 0
    for k, tp in enumerate(probes):
        while t < tp * (1 - 1e-12):
            h = min(dt, tp - t)
            alpha = _field_values(family.param_fields["alpha"], pos)
            beta = _field_values(family.param_fields["beta"], pos)
            rate = _TWO_PI * beta * eps ** (-alpha) / alpha
            sig2 = math.pi * beta * eps ** (2.0 - alpha) / (2.0 - alpha)
            # per-step subkeys keep draws addressable by (path, step)
            sk = stream_keys(cfg.seed, paths, 2 + step) ^ kj
            lam = rate * h
            u = uniform_array(sk, np.zeros(n, dtype=np.uint64))
            count = np.zeros(n, dtype=np.int64)
            p = np.exp(-lam)
            cdf = p.copy()
            open_ = u > cdf
            while np.any(open_) and count.max() < _MAX_JUMPS_PER_STEP:
                count[open_] += 1
                p = p * lam / np.maximum(count, 1)
                cdf = cdf + np.where(open_, p, 0.0)
                open_ = open_ & (u > cdf)
            for m in range(int(count.max()) if count.size else 0):
                sel = count > m
                ctr = np.full(int(sel.sum()), 2 * m + 1, dtype=np.uint64)
                u_r = uniform_array(sk[sel], ctr)
                u_a = uniform_array(sk[sel], ctr + np.uint64(1))
                r = eps * u_r ** (-1.0 / alpha[sel])
                pos[sel, 0] += r * np.cos(_TWO_PI * u_a)
                pos[sel, 1] += r * np.sin(_TWO_PI * u_a)
            jumps_total += count
            ctr = np.full(n, 2 * step, dtype=np.uint64)
            g1 = uniform_array(kg, ctr)
            g2 = uniform_array(kg, ctr + np.uint64(1))
            s = np.sqrt(sig2 * h) * np.sqrt(-2.0 * np.log(g1))
            pos[:, 0] += s * np.cos(_TWO_PI * g2)
            pos[:, 1] += s * np.sin(_TWO_PI * g2)
            t += h
            step += 1
        out[:, k, :] = pos
        out_jumps[:, k] = jumps_total
    return out, out_jumps


def simulate_stable_like_path(family: ProcessFamily, cfg: SimConfig, path_index: int):
    pos, jumps = simulate_stable_like_paths(family, cfg, path_index, 1)
    return pos[0], jumps[0]


# ---------------------------------------------------------------------------
# estimation


def _stable_alpha(family: ProcessFamily):
    if family.kind == "stable" and family.meta.get("c", 0.0) >= 0:
        return float(family.meta["alpha"])
    return None


def simulate_family(family: ProcessFamily, cfg: SimConfig):
    """Positions relative to the start, at the probe times, for all paths."""
    if family.kind == "stable_like" or (family.state_mode == "parametric" and "alpha" in family.param_fields
                                        and "beta" in family.param_fields and family.kind != "log_power"):
        pos, _ = simulate_stable_like_paths(family, cfg)
        return pos - np.asarray(cfg.start, dtype=float), ["Euler freeze scheme: no strong-convergence claim"]
    if family.state_mode != "constant" or family.triplet is None:
        raise UnsupportedModelError(f"{family.name}: simulation supports Levy processes and stable-like families")
    pos, _ = simulate_levy_paths(family.triplet, cfg, stable_alpha=_stable_alpha(family))
    return pos, []


def estimate_ball_probability(family: ProcessFamily, cfg: SimConfig) -> OccupationEstimate:
    """p_hat(t) = fraction of paths within probe_radius of the start at each probe time."""
    pos, notes = simulate_family(family, cfg)
    inside = np.hypot(pos[..., 0], pos[..., 1]) < cfg.probe_radius
    n = pos.shape[0]
    p = inside.sum(axis=0) / n
    se = np.sqrt(p * (1 - p) / n)
    return OccupationEstimate(np.asarray(cfg.probe_times), p, se, n, cfg.probe_radius, cfg.seed, notes)


def fit_return_exponent(est: OccupationEstimate, band: float = 0.15, p_max: float = 0.05, min_points: int = 8
                        ) -> ReturnFit:
    """Weighted log-log slope of p_hat(t) over the probes with 5/n < p_hat <= p_max.

    The upper cut keeps the fit in the regime where the probe ball is small
    compared with the spread of the process.
    """
    n = est.n_paths
    use = (est.p_hat > 5.0 / n) & (est.p_hat <= p_max)
    if use.sum() < min_points:
        raise FitError(f"only {int(use.sum())} probe times with 5/n < p_hat <= {p_max}; need {min_points}")
    t = np.log(est.times[use])
    y = np.log(est.p_hat[use])
    p = est.p_hat[use]
    w = n * p / (1 - p)
    tw = np.sum(w * t) / w.sum()
    yw = np.sum(w * y) / w.sum()
    sxx = np.sum(w * (t - tw) ** 2)
    slope = np.sum(w * (t - tw) * (y - yw)) / sxx
    kappa = -float(slope)
    half = 1.96 / math.sqrt(sxx)
    if kappa < 1 - band:
        verdict = "Recurrent-consistent"
    elif kappa > 1 + band:
        verdict = "Transient-consistent"
    else:
        verdict = "Borderline"
    return ReturnFit(kappa, float(half), verdict, tuple(np.exp(t).tolist()), band)


def write_csv(est: OccupationEstimate, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "p_hat", "stderr", "n_paths"])
        for t, p, s in zip(est.times, est.p_hat, est.stderr):
            w.writerow([repr(float(t)), repr(float(p)), repr(float(s)), est.n_paths])


def stable_ball_probability(alpha: float, beta: float, t: float, r: float) -> float:
    """Small-ball approximation pi r^2 p_t(0) for the isotropic stable law, p_t(0) = Gamma(2/a)/(2 pi a (g t)^(2/a))."""
    g = gamma_constant(alpha, beta)
    return math.pi * r * r * math.gamma(2.0 / alpha) / (_TWO_PI * alpha * (g * t) ** (2.0 / alpha))
