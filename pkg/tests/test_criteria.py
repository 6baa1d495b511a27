import math

import numpy as np
import pytest

from levyrec import (INCONCLUSIVE, RECURRENT, TRANSIENT, ParamField, annulus, brownian, classify_by_tails,
                     classify_chung_fuchs, classify_regvar, classify_sufficient_p5, log_power, power_tail, reconcile,
                     stable, stable_like, subordinated)
from levyrec.criteria import CriteriaConfig, Verdict
from levyrec.errors import ModelError
from levyrec.families import with_rings

R, T, I = RECURRENT, TRANSIENT, INCONCLUSIVE


@pytest.mark.parametrize("family, cf, tails", [
    (brownian(1.0), R, R),
    (stable(0.5), T, T),
    (stable(1.9), T, T),
    (annulus(), R, R),
    (power_tail(-5.1), R, R),
    (power_tail(-4.0, 2.0), T, T),
    (power_tail(-4.0, -2.0), R, R),
    (log_power(2.0, 1.0, 1.0), T, T),
])
def test_fixture_verdicts(family, cf, tails):
    assert classify_chung_fuchs(family).value is cf
    assert classify_by_tails(family).value is tails


def test_brownian_has_no_measure_for_tails():
    v = classify_by_tails(brownian(1.0))
    assert v.criterion == "tails->chung_fuchs"


def test_p5_sufficient_tests():
    assert classify_sufficient_p5(annulus()).value is R
    assert classify_sufficient_p5(stable(1.0)).value is T
    # without jumps nothing in the sufficient tests can fire on the transience side
    assert classify_sufficient_p5(brownian(1.0)).value is not T


def test_verdict_carries_fits():
    v = classify_chung_fuchs(stable(1.5))
    d = v.as_dict()
    assert d["value"] == "Transient"
    fit = d["fits"][0]
    assert fit["a"] == pytest.approx(1.5) and fit["C"] > 0 and fit["residual"] < 0.05
    assert {g["name"] for g in d["assumptions"]}


def test_stable_like_envelope_strategy():
    fam = stable_like(ParamField(lambda x: 1.5 + 0.3 * np.sin(x[0]), 1.2, 1.8), ParamField.constant(2.0))
    v = classify_chung_fuchs(fam)
    assert v.value is T
    assert v.strategy


def test_subordinated_symbol_only():
    fam = subordinated(lambda r: r * r, ParamField(lambda x: 0.75, 0.6, 0.9))
    assert classify_chung_fuchs(fam).value is T
    fam2 = subordinated(lambda r: r * r, ParamField(lambda x: 1.0, 1.0, 1.0))
    assert classify_chung_fuchs(fam2).value is R


def test_rings_only_is_recurrent():
    fam = with_rings(brownian(0.0), [(0.5, 1.0), (2.0, 0.3)])
    assert classify_chung_fuchs(fam).value is R


@pytest.mark.parametrize("delta", [-1.5, -1.0])
def test_regvar_rejects_non_levy_tails(delta):
    with pytest.raises(ModelError):
        classify_regvar(power_tail(delta))


def test_regvar_needs_declared_tail():
    with pytest.raises(ModelError):
        classify_regvar(annulus())


def test_reconcile_contradiction_and_agreement():
    a, b = Verdict(R, "x"), Verdict(T, "y")
    rep = reconcile([a, b])
    assert rep.contradiction and rep.verdict is I
    rep = reconcile([Verdict(T, "x"), Verdict(I, "y"), Verdict(T, "z")])
    assert not rep.contradiction and rep.verdict is T and rep.agreement == ["x", "z"]


def test_reconcile_empirical_conflict_is_a_warning():
    rep = reconcile([Verdict(R, "cf")], {"verdict": "Transient-consistent"})
    assert rep.verdict is R and not rep.contradiction and rep.warnings


def test_reconcile_needs_input():
    with pytest.raises(ValueError):
        reconcile([])


def test_config_grids_are_used():
    cfg = CriteriaConfig()
    v = classify_chung_fuchs(stable(1.0), cfg)
    assert v.fits[0].grid[0] == pytest.approx(cfg.origin_grid.lo)


def test_scaling_invariance_of_verdicts():
    for fam in (stable(1.0), annulus(), power_tail(-4.0, 2.0)):
        base = classify_by_tails(fam).value
        for k in (1e-3, 1e3):
            assert classify_by_tails(fam.scaled(k)).value is base
