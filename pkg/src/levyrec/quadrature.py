"""Panel Gauss-Legendre quadrature for the radial integrals.

Every routine evaluates the integrand on whole arrays of nodes and sums
panel contributions in a fixed left-to-right order, so results do not
depend on evaluation scheduling.
"""
import math

import numpy as np

from ._accel import optional_njit
from .errors import QuadratureError

_NODES = {}


def gauss_legendre(n):
    if n not in _NODES:
        x, w = np.polynomial.legendre.leggauss(n)
        _NODES[n] = (x, w)
    return _NODES[n]


def panel_sums(f, left, right, n=16):
    """Gauss-Legendre estimate of the integral of ``f`` over each panel [left_i, right_i]."""
    x, w = gauss_legendre(n)
    left = np.asarray(left, dtype=float)
    right = np.asarray(right, dtype=float)
    half = 0.5 * (right - left)
    mid = 0.5 * (right + left)
    nodes = mid[:, None] + half[:, None] * x[None, :]
    vals = np.asarray(f(nodes.ravel()), dtype=float).reshape(nodes.shape)
    return half * (vals @ w)


def _adaptive(f, edges, tol, max_depth=40, n_lo=15, n_hi=21):
    """Adaptive panel refinement; returns (value, error estimate)."""
    left = np.asarray(edges[:-1], dtype=float)
    right = np.asarray(edges[1:], dtype=float)
    done_l, done_v = [], []
    err_total = 0.0
    scale = None
    n0 = max(left.size, 1)
    for _ in range(max_depth):
        if left.size == 0:
            break
        hi = panel_sums(f, left, right, n_hi)
        lo = panel_sums(f, left, right, n_lo)
        if not (np.all(np.isfinite(hi)) and np.all(np.isfinite(lo))):
            raise QuadratureError("integrand is not finite on a panel", partial=float(math.fsum(done_v)))
        err = np.abs(hi - lo)
        if scale is None:
            scale = float(np.sum(np.abs(hi)))
        ok = err <= np.maximum(tol * np.abs(hi), 0.1 * tol * scale / n0)
        ok |= (right - left) <= 1e-13 * np.maximum(np.abs(left), np.abs(right))
        done_l.extend(left[ok].tolist())
        done_v.extend(hi[ok].tolist())
        err_total += float(np.sum(err[ok]))
        bad = ~ok
        mid = 0.5 * (left[bad] + right[bad])
        left, right = np.concatenate([left[bad], mid]), np.concatenate([mid, right[bad]])
    if left.size:
        hi = panel_sums(f, left, right, n_hi)
        done_l.extend(left.tolist())
        done_v.extend(hi.tolist())
        err_total += float(np.sum(np.abs(hi)))
    if not done_l:
        return 0.0, 0.0
    order = np.argsort(np.asarray(done_l), kind="stable")
    vals = np.asarray(done_v)[order]
    return float(math.fsum(vals)), err_total


def _split_edges(a, b, breakpoints, ratio=4.0, max_linear=64):
    """Panel edges on [a, b]: breakpoints kept, geometric spacing on wide ranges."""
    pts = sorted({float(p) for p in breakpoints if a < p < b} | {a, b})
    edges = [pts[0]]
    for lo, hi in zip(pts[:-1], pts[1:]):
        if lo > 0 and hi / lo > ratio:
            k = int(math.ceil(math.log(hi / lo) / math.log(ratio)))
            edges.extend(np.geomspace(lo, hi, k + 1)[1:].tolist())
        else:
            edges.append(hi)
    return edges


def integrate(f, a, b, breakpoints=(), tol=1e-12):
    """Integral of ``f`` over the finite interval [a, b], a >= 0.

    When ``a`` is zero the integrand may carry an integrable power
    singularity; the neighbourhood of zero is swept geometrically down to
    1e-14 relative width and the remainder closed with a local power law.
    """
    if b <= a:
        return 0.0
    rem = 0.0
    lo = a
    if a == 0.0:
        first = min([p for p in breakpoints if p > 0] + [b])
        lo = first * 1e-14
        rem = _origin_remainder(f, lo)
    edges = _split_edges(lo, b, breakpoints)
    val, _ = _adaptive(f, edges, tol)
    return val + rem


def _origin_remainder(f, eps):
    """Integral of f over (0, eps) assuming f ~ C u^p locally, p > -1."""
    v1, v2 = np.asarray(f(np.array([eps, 2.0 * eps])), dtype=float)
    if v1 == 0.0 or v2 == 0.0:
        return 0.0
    if v1 < 0 or v2 < 0:
        return 0.0
    p = math.log(v2 / v1) / math.log(2.0)
    if p <= -1.0:
        raise QuadratureError("integrand not integrable at the origin", partial=float("inf"))
    return v1 * eps / (p + 1.0)


def integrate_to_infinity(f, a, tol=1e-12, block=8, max_t=1400.0):
    """Integral of ``f`` over [a, inf) via u = a*exp(t), a > 0.

    Raises QuadratureError when the transformed integrand does not decay
    within the working range.
    """
    if a <= 0:
        raise ValueError("lower limit must be positive")

    def g(t):
        u = a * np.exp(t)
        with np.errstate(over="ignore", invalid="ignore"):
            out = np.asarray(f(u), dtype=float) * u
        # inf * 0 far out means a vanishing integrand
        return np.where(np.isfinite(u) & ~np.isnan(out), out, 0.0)

    limit = min(max_t, 650.0 - math.log(a))
    n_blocks = max(int(limit // block), 1)
    limit = n_blocks * block
    total = 0.0
    contrib = []
    for k in range(n_blocks):
        t0, t1 = k * block, (k + 1) * block
        piece, _ = _adaptive(g, np.linspace(t0, t1, block + 1), tol)
        total += piece
        contrib.append(piece)
        if len(contrib) >= 2 and abs(contrib[-1]) <= tol * abs(total) and abs(contrib[-2]) <= 1e3 * tol * abs(total):
            return total
        if len(contrib) >= 4 and total == 0.0 and not any(contrib[-4:]):
            return 0.0
        # power-law integrands become geometric block sums in t; close the series once the ratio settles
        if len(contrib) >= 4 and (all(c > 0 for c in contrib[-4:]) or all(c < 0 for c in contrib[-4:])):
            r1, r2, r3 = contrib[-3] / contrib[-4], contrib[-2] / contrib[-3], contrib[-1] / contrib[-2]
            if 0.0 < r3 < 0.95 and abs(r2 - r3) <= 1e-9 * r3 and abs(r1 - r2) <= 1e-9 * r2:
                return total + contrib[-1] * r3 / (1.0 - r3)
    if len(contrib) >= 3 and contrib[-2] != 0.0 and contrib[-1] != 0.0:
        ratio = contrib[-1] / contrib[-2]
        if 0.0 < ratio < 0.9:
            return total + contrib[-1] * ratio / (1.0 - ratio)
        # algebraic decay in t = log(u/a): block sums ~ A t^-p
        m1, m2 = limit - 0.5 * block, limit - 1.5 * block
        if ratio > 0:
            p = -math.log(ratio) / math.log(m1 / m2)
            if p > 1.05:
                return total + (contrib[-1] / block) * m1 ** p * limit ** (1.0 - p) / (p - 1.0)
    raise QuadratureError("tail integral does not converge at working precision", partial=total)


@optional_njit
def wynn_epsilon(partial):
    """Wynn epsilon extrapolation of a sequence of partial sums; returns the last even-column estimate."""
    n = partial.shape[0]
    e = np.zeros((n + 1, n + 1))
    for i in range(n):
        e[i, 1] = partial[i]
    best = partial[n - 1]
    for k in range(2, n + 1):
        for i in range(n - k + 1):
            d = e[i + 1, k - 1] - e[i, k - 1]
            if d == 0.0:
                e[i, k] = 1e300
            else:
                e[i, k] = e[i + 1, k - 2] + 1.0 / d
        if k % 2 == 1 and n - k >= 0:
            val = e[n - k, k]
            if abs(val) < 1e299:
                best = val
    return best


def bessel_tail(g, rho, start, cap=math.inf, tol=1e-12, max_panels=4000, breakpoints=()):
    """Integral of J0(rho*u) g(u) over [start, cap) for slowly decaying g.

    Half-period panels of width pi/rho; the alternating panel sums are
    accelerated with the epsilon algorithm when the support is unbounded.
    """
    from .special import j0

    def h(u):
        return j0(rho * u) * np.asarray(g(u), dtype=float)

    width = math.pi / rho
    if cap < math.inf:
        n_pan = int(math.ceil((cap - start) / width))
        if n_pan <= max_panels:
            edges = np.minimum(start + width * np.arange(n_pan + 1), cap)
            edges[-1] = cap
            extra = [p for p in breakpoints if start < p < cap]
            val, _ = _adaptive(h, np.unique(np.concatenate([edges, extra])), tol)
            return val
    chunk = 64
    k0 = 0
    sums = []
    estimates = []
    while k0 < max_panels:
        left = start + width * np.arange(k0, k0 + chunk)
        right = left + width
        if cap < math.inf:
            right = np.minimum(right, cap)
            keep = left < cap
            left, right = left[keep], right[keep]
        ps = panel_sums(h, left, right, 24)
        sums.extend(ps.tolist())
        k0 += chunk
        if cap < math.inf and left.size < chunk:
            return float(math.fsum(sums))
        partial = np.cumsum(np.asarray(sums))
        est = float(wynn_epsilon(partial[-24:].copy()))
        estimates.append(est)
        if len(estimates) >= 2 and abs(estimates[-1] - estimates[-2]) <= tol * max(abs(est), 1e-300) + 1e-300:
            return est
        if len(estimates) >= 2 and abs(sums[-1]) <= 1e-3 * tol * max(abs(partial[-1]), 1e-300):
            return est
    raise QuadratureError("oscillatory tail did not settle", partial=estimates[-1] if estimates else 0.0)
