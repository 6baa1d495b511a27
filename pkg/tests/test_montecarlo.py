import math
import os
import subprocess
import sys

import numpy as np
import pytest
from scipy import stats

from levyrec import ParamField, annulus, brownian, stable, stable_like
from levyrec.errors import ConfigError, FitError, ModelError, UnsupportedModelError
from levyrec.families import power_tail, with_rings
from levyrec.montecarlo import (OccupationEstimate, SimConfig, estimate_ball_probability, fit_return_exponent,
                                jump_law, simulate_levy_path, simulate_levy_paths, simulate_stable_like_paths,
                                stable_ball_probability, write_csv)


def cfg(**kw):
    base = dict(horizon=10.0, small_jump_cutoff=0.1, path_count=4000, seed=11, probe_radius=1.0,
                probe_times=(1.0, 10.0))
    base.update(kw)
    return SimConfig(**base)


def test_config_invariants():
    with pytest.raises(ConfigError):
        cfg(small_jump_cutoff=1.0)
    with pytest.raises(ConfigError):
        cfg(probe_times=(1.0, 20.0))
    with pytest.raises(ConfigError):
        cfg(probe_times=(2.0, 1.0))
    with pytest.raises(ConfigError):
        cfg(step=0.5)
    assert cfg().step == pytest.approx(0.01)
    assert len(SimConfig(probe_count=16).probe_times) == 16


def test_gaussian_marginals():
    pos, _ = simulate_levy_paths(brownian(1.0).triplet, cfg())
    n = pos.shape[0]
    for k, t in enumerate((1.0, 10.0)):
        var = pos[:, k, :].var(axis=0)
        # sample variance of n normals has sd sigma^2 sqrt(2/n)
        assert np.all(np.abs(var - t) < 3 * t * math.sqrt(2 / n))
        assert np.all(np.abs(pos[:, k, :].mean(axis=0)) < 3 * math.sqrt(t / n))


def test_cauchy_radial_law():
    c = cfg(small_jump_cutoff=0.01, path_count=3000, probe_times=(1.0, 5.0))
    pos, _ = simulate_levy_paths(stable(1.0).triplet, c, stable_alpha=1.0)
    for k, t in enumerate((1.0, 5.0)):
        s = 2 * math.pi * t
        r = np.hypot(pos[:, k, 0], pos[:, k, 1])
        res = stats.kstest(r, lambda x: 1 - s / np.sqrt(x * x + s * s))
        assert res.pvalue > 1e-3


def test_poisson_jump_counts():
    c = cfg(path_count=3000, probe_times=(1.0, 2.0), horizon=2.0)
    fam = annulus()
    _, jumps = simulate_levy_paths(fam.triplet, c)
    lam = 3 * math.pi * 2.0
    counts = jumps[:, -1]
    assert abs(counts.mean() - lam) < 4 * math.sqrt(lam / counts.size)
    assert abs(counts.var() / lam - 1) < 0.1
    lo, hi = int(lam - 8), int(lam + 8)
    observed = np.array([np.sum(counts == k) for k in range(lo, hi)])
    expected = counts.size * stats.poisson.pmf(np.arange(lo, hi), lam)
    chi2 = np.sum((observed - expected) ** 2 / expected)
    assert chi2 < stats.chi2.ppf(0.999, len(observed) - 1)


def test_rings_sampled_with_their_masses():
    fam = with_rings(brownian(0.0), [(0.5, 1.0), (1.5, 3.0)])
    law = jump_law(fam.triplet, 0.1)
    assert law.rate == pytest.approx(4.0) and law.sigma2 == 0.0
    pos, jumps = simulate_levy_paths(fam.triplet, cfg(path_count=1, probe_times=(0.5, 10.0)))
    assert jumps[0, -1] > 0


def test_deterministic_start_stays_put():
    est = estimate_ball_probability(brownian(0.0), cfg(path_count=50))
    assert np.all(est.p_hat == 1.0) and np.all(est.stderr == 0.0)


def test_reproducible_and_order_free():
    c = cfg(path_count=200)
    trip = annulus(c=0.5).triplet
    full, _ = simulate_levy_paths(trip, c)
    again, _ = simulate_levy_paths(trip, c)
    part, _ = simulate_levy_paths(trip, c, path_lo=150, n_paths=50)
    one, _ = simulate_levy_path(trip, c, 17)
    assert np.array_equal(full, again)
    assert np.array_equal(full[150:], part)
    assert np.array_equal(full[17], one)


def test_backends_agree():
    code = ("import numpy as np; from levyrec import annulus; from levyrec.montecarlo import SimConfig, "
            "simulate_levy_paths; c = SimConfig(horizon=10, small_jump_cutoff=0.1, path_count=50, seed=3, "
            "probe_times=(1.0, 10.0)); p, j = simulate_levy_paths(annulus(c=1.0).triplet, c); "
            "print(repr(float(p.sum())), int(j.sum()))")
    outs = []
    for flag in ("0", "1"):
        env = dict(os.environ, LEVYREC_DISABLE_NUMBA=flag)
        outs.append(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                                   check=True).stdout.split())
    assert outs[0][1] == outs[1][1]
    assert float(outs[0][0]) == pytest.approx(float(outs[1][0]), rel=1e-12)


def test_brownian_ball_probability_oracle():
    times = (5.0, 20.0, 80.0)
    c = cfg(horizon=80.0, path_count=20000, probe_times=times)
    est = estimate_ball_probability(brownian(1.0), c)
    exact = 1 - np.exp(-1.0 / (2 * np.asarray(times)))
    assert np.all(np.abs(est.p_hat - exact) < 4 * est.stderr)


def test_small_jump_cutoff_stability():
    times = (2.0, 8.0)
    a = estimate_ball_probability(stable(1.0), cfg(small_jump_cutoff=0.2, path_count=20000, probe_times=times,
                                                   horizon=8.0, probe_radius=3.0))
    b = estimate_ball_probability(stable(1.0), cfg(small_jump_cutoff=0.1, path_count=20000, probe_times=times,
                                                   horizon=8.0, probe_radius=3.0, seed=12))
    assert np.all(np.abs(a.p_hat - b.p_hat) < 3 * np.hypot(a.stderr, b.stderr))


def test_stable_small_ball_oracle():
    # pi r^2 p_t(0) matches the exact Cauchy ball probability when r << t
    r, t = 1.0, 50.0
    s = 2 * math.pi * t
    exact = 1 - s / math.sqrt(r * r + s * s)
    assert stable_ball_probability(1.0, 1.0, t, r) == pytest.approx(exact, rel=1e-3)


def test_jump_law_errors():
    with pytest.raises(ModelError):
        jump_law(power_tail(-1.5).triplet, 0.5)


def test_stable_like_reduces_to_levy():
    c = cfg(small_jump_cutoff=0.1, path_count=3000, probe_times=(1.0, 5.0), horizon=5.0)
    sl = stable_like(ParamField.constant(1.5), ParamField.constant(1.0))
    p1, j1 = simulate_stable_like_paths(sl, c)
    p2, j2 = simulate_levy_paths(stable(1.5).triplet, c, stable_alpha=1.5)
    lam = 2 * math.pi * 0.1 ** -1.5 / 1.5 * 5.0
    assert abs(j1[:, -1].mean() / lam - 1) < 0.01 and abs(j2[:, -1].mean() / lam - 1) < 0.01
    r1, r2 = np.hypot(*p1[:, -1].T), np.hypot(*p2[:, -1].T)
    assert stats.ks_2samp(r1, r2).pvalue > 1e-3


def test_stable_like_beta_doubles_intensity():
    c = cfg(small_jump_cutoff=0.2, path_count=2000, probe_times=(1.0, 2.0), horizon=2.0)
    _, j1 = simulate_stable_like_paths(stable_like(ParamField.constant(1.5), ParamField.constant(1.0)), c)
    _, j2 = simulate_stable_like_paths(stable_like(ParamField.constant(1.5), ParamField.constant(2.0)), c)
    assert j2[:, -1].mean() / j1[:, -1].mean() == pytest.approx(2.0, rel=0.02)


def test_stable_like_varying_index_smoke():
    c = cfg(small_jump_cutoff=0.1, path_count=300, probe_times=(1.0, 4.0), horizon=4.0)
    fam = stable_like(ParamField(lambda x: 1.2 + 0.3 * np.sin(np.hypot(x[0], x[1])) ** 2, 1.2, 1.5),
                      ParamField.constant(1.0))
    est = estimate_ball_probability(fam, c)
    assert np.all((0 <= est.p_hat) & (est.p_hat <= 1))
    assert any("Euler" in n for n in est.notes)
    again = estimate_ball_probability(fam, c)
    assert np.array_equal(est.p_hat, again.p_hat)


def test_unsupported_family():
    from levyrec import subordinated
    fam = subordinated(lambda r: r * r, ParamField(lambda x: 0.7, 0.6, 0.8))
    with pytest.raises(UnsupportedModelError):
        estimate_ball_probability(fam, cfg(path_count=10))


def _synthetic(kappa, n=10_000, times=np.geomspace(1, 1000, 40)):
    p = np.minimum(0.05 * times ** -kappa * 10, 1.0)
    return OccupationEstimate(times, p, np.sqrt(p * (1 - p) / n), n, 1.0, 0)


@pytest.mark.parametrize("kappa, verdict", [(0.7, "Recurrent-consistent"), (1.0, "Borderline"),
                                            (1.5, "Transient-consistent")])
def test_fit_return_exponent_on_exact_power(kappa, verdict):
    fit = fit_return_exponent(_synthetic(kappa))
    assert fit.kappa == pytest.approx(kappa, abs=1e-9)
    assert fit.verdict == verdict and fit.half_width > 0


def test_fit_needs_eight_probes():
    est = _synthetic(1.0, times=np.geomspace(1, 1000, 6))
    with pytest.raises(FitError):
        fit_return_exponent(est)


def test_csv_columns(tmp_path):
    est = _synthetic(1.0)
    path = tmp_path / "occ.csv"
    write_csv(est, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,p_hat,stderr,n_paths" and len(lines) == 41
