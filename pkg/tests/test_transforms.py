import math

import numpy as np
import pytest

from levyrec import (ORIGIN, IDENTITY, ParamField, PlaneRotation, annulus, ball_tail, brownian,
                     classify_by_tails, classify_chung_fuchs, linear_transform, perturbation_equivalent,
                     power_tail, rotate_family, stable, stable_like, tail_dominates, transfer_classification)
from levyrec.config import cut_ball
from levyrec.criteria import Gate, Verdict, RECURRENT, TRANSIENT, INCONCLUSIVE
from levyrec.errors import ModelError
from levyrec.transforms import comparison_gates


def test_rotation_algebra():
    r = PlaneRotation(0.7)
    x = np.array([1.0, 2.0])
    assert np.allclose(r.inverse()(r(x)), x)
    assert np.allclose(r.matrix @ r.matrix.T, np.eye(2))
    assert PlaneRotation(2 * math.pi + 0.1).angle == pytest.approx(0.1)


def test_rotation_keeps_radial_symbols():
    fam = stable_like(ParamField(lambda x: 1.5 + 0.3 * np.tanh(x[0]), 1.2, 1.8), ParamField.constant(1.0))
    rot = rotate_family(fam, PlaneRotation(math.pi / 2))
    y = np.array([0.0, 1.0])
    assert rot.param_fields["alpha"](y) == pytest.approx(fam.param_fields["alpha"](np.array([1.0, 0.0])))
    assert classify_chung_fuchs(rot).value is classify_chung_fuchs(fam).value


def test_linear_image_diffusion_and_symbol():
    img = linear_transform(brownian(1.0).triplet, np.diag([2.0, 1.0]))
    assert np.allclose(img.diffusion_matrix(ORIGIN), np.diag([4.0, 1.0]))
    # q(x, M^T xi) = 0.5 |(2, 1)|^2 = 2.5
    assert img.symbol(ORIGIN, [1.0, 1.0]) == pytest.approx(2.5)
    assert img.triplet is None and not img.radial
    assert np.all(img.drift_correction == 0)


def test_scaled_image_ball_tail():
    trip = power_tail(-3.0).triplet
    img = linear_transform(trip, 2.0 * np.eye(2))
    # nu(B^c_{u/2}) = 2 nu(B^c_u) for n(u) = u^-3 beyond 1, u >= 2
    assert img.ball_tail(ORIGIN, 4.0) / ball_tail(trip, ORIGIN, 4.0) == pytest.approx(2.0, rel=1e-10)


def test_orthogonal_image_is_radial():
    trip = stable(1.0).triplet
    img = linear_transform(trip, PlaneRotation(0.3))
    assert img.radial and img.triplet is trip
    comp = img.transform(PlaneRotation(-0.3).matrix)
    assert np.allclose(comp.matrix, np.eye(2))


def test_singular_matrix_rejected():
    with pytest.raises(ModelError):
        linear_transform(brownian(1.0).triplet, [[1.0, 2.0], [2.0, 4.0]])


def test_perturbation_cut_cauchy():
    rep = perturbation_equivalent(stable(1.0), cut_ball(stable(1.0), 1.0))
    assert rep.distance == pytest.approx(2 * math.pi, rel=1e-10)
    assert rep.conclusion == "FullyEquivalent" and rep.gate_liminf == "holds"
    assert isinstance(rep.distance, float)


def test_perturbation_brownian_annulus():
    rep = perturbation_equivalent(brownian(1.0), annulus(c=1.0))
    # int_1^2 u^2 * 2 pi u du = 7.5 pi
    assert rep.distance == pytest.approx(7.5 * math.pi, rel=1e-10)
    assert rep.conclusion == "FullyEquivalent"


def test_perturbation_not_established_for_different_indices():
    rep = perturbation_equivalent(stable(1.0), stable(1.5))
    assert math.isinf(rep.distance) and rep.conclusion == "NotEstablished"


def test_tail_domination_and_witness():
    a, b = power_tail(-3.0), power_tail(-4.0)
    assert tail_dominates(a, b, u0=1.0).dominates
    dom = tail_dominates(b, a, u0=1.0)
    assert not dom.dominates and dom.witness == pytest.approx(1.0)
    assert tail_dominates(a, b, u0=1.0, mode="HalfPlaneTail").dominates
    with pytest.raises(ValueError):
        tail_dominates(a, b, mode="Strip")


def test_transfer_transience():
    a, b = stable(1.0), power_tail(-3.5)
    dom = tail_dominates(a, b, u0=1.0)
    src = classify_by_tails(b)
    out = transfer_classification(src, dom, "transience", dominating=a)
    assert out.value is TRANSIENT
    assert all(g.outcome == "holds" for g in comparison_gates(a))


def test_transfer_requires_gates_and_domination():
    dom = tail_dominates(power_tail(-3.0), power_tail(-4.0), u0=1.0)
    src = Verdict(TRANSIENT, "tails")
    assert transfer_classification(src, dom, "transience").value is INCONCLUSIVE
    failing = [Gate("quasi-unimodality of the dominating family", "holds", ""),
               Gate("infinite quadratic liminf on the dominating family", "fails", "")]
    assert transfer_classification(src, dom, "transience", gates=failing).value is INCONCLUSIVE
    no_dom = tail_dominates(power_tail(-4.0), power_tail(-3.0), u0=1.0)
    assert transfer_classification(Verdict(RECURRENT, "x"), no_dom, "recurrence",
                                   dominating=power_tail(-4.0)).value is INCONCLUSIVE


def test_transfer_recurrence():
    a, b = annulus(), annulus(level=0.5)
    dom = tail_dominates(a, b)
    out = transfer_classification(classify_chung_fuchs(a), dom, "recurrence", dominating=a)
    assert out.value is RECURRENT
    with pytest.raises(ValueError):
        transfer_classification(classify_chung_fuchs(a), dom, "sideways")
