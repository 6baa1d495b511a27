import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as si
from scipy import special as sp

from levyrec.core import (INF, ORIGIN, SUP, DeclaredTail, FinitePart, LevyTriplet2D, ParamField, ProcessFamily,
                          RadialDensity, SecondMoment, ball_tail, cumulative_tail_integral_at,
                          cumulative_tail_integral_direct, eval_symbol, halfplane_tail, quasi_unimodality_certificate,
                          radial_symbol_profile, second_moment_classifier, strip_mass, truncated_second_moment)
from levyrec.errors import ModelError
from levyrec.families import annulus, brownian, gamma_constant, power_tail, stable, stable_like, with_rings


def power_density(p, floor=0.0, scale=1.0):
    return RadialDensity.from_profile(lambda u: scale * u ** -p, support_floor=floor, decreasing_beyond=floor)


def test_brownian_symbol():
    trip = brownian(2.0).triplet
    for rho in (0.1, 1.0, 7.0):
        assert eval_symbol(trip, ORIGIN, rho) == pytest.approx(0.5 * 2.0 * rho * rho, rel=1e-15)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5, 1.9])
def test_stable_symbol_matches_planar_constant(alpha):
    trip = LevyTriplet2D(0.0, power_density(2 + alpha))
    g = gamma_constant(alpha)
    for rho in (0.1, 1.0, 10.0):
        assert eval_symbol(trip, ORIGIN, rho) == pytest.approx(g * rho ** alpha, rel=1e-8)


def test_planar_constant_values():
    assert gamma_constant(1.0) == pytest.approx(2 * math.pi)
    assert gamma_constant(1.0, dim=1) == pytest.approx(math.pi)
    assert gamma_constant(0.5) == pytest.approx(12.0130, rel=1e-4)


def test_annulus_symbol_against_direct_quadrature():
    trip = annulus(level=1.5).triplet
    for rho in (0.3, 2.0, 15.0):
        exact, _ = si.quad(lambda u: (1 - sp.j0(rho * u)) * 2 * math.pi * u * 1.5, 1, 2, limit=200,
                           epsabs=1e-14, epsrel=1e-13)
        assert eval_symbol(trip, ORIGIN, rho) == pytest.approx(exact, rel=1e-10)


def test_rings_contribute_to_symbol_and_tails():
    fam = with_rings(brownian(0.0), [(0.5, 2.0), (1.0, 3.0)])
    trip = fam.triplet
    rho = 1.7
    expected = 2.0 * (1 - sp.j0(0.5 * rho)) + 3.0 * (1 - sp.j0(rho))
    assert eval_symbol(trip, ORIGIN, rho) == pytest.approx(expected, rel=1e-12)
    assert ball_tail(trip, ORIGIN, 0.7) == pytest.approx(3.0)
    assert truncated_second_moment(trip, ORIGIN, 0.7) == pytest.approx(2.0 * 0.25)


def test_ball_tail_closed_forms():
    assert ball_tail(annulus().triplet, ORIGIN, 1.5) == pytest.approx(math.pi * (4 - 2.25), rel=1e-12)
    trip = LevyTriplet2D(0.0, power_density(3.5))
    assert ball_tail(trip, ORIGIN, 2.0) == pytest.approx(2 * math.pi * 2.0 ** -1.5 / 1.5, rel=1e-10)


def _halfplane_brute(n, u, cap):
    # nu({y1 > u}) as int over y1 of the chord integral of the radial density
    def chord(t):
        return 2 * si.quad(lambda s: n(math.hypot(t, s)), 0, math.sqrt(max(cap * cap - t * t, 0.0)),
                           limit=200)[0]
    return si.quad(chord, u, cap, limit=200)[0]


def test_halfplane_annulus_against_area():
    # area of {1 < |y| < 2, y1 > 1} = (4 arccos(1/2) - sqrt(3)), the circular segment
    seg = 4 * math.acos(0.5) - math.sqrt(3)
    assert halfplane_tail(annulus().triplet, ORIGIN, 1.0) == pytest.approx(seg, rel=1e-10)
    assert seg == pytest.approx(2.4567, abs=1e-4)


@pytest.mark.parametrize("u", [0.2, 0.9, 1.4])
def test_halfplane_brute_force_2d(u):
    n = lambda r: (r ** -1.0) * np.exp(-r) if 0.1 <= r <= 3.0 else 0.0
    dens = RadialDensity.from_profile(lambda r: r ** -1.0 * np.exp(-r), support_floor=0.1, support_cap=3.0,
                                      decreasing_beyond=0.1)
    brute = _halfplane_brute(n, u, 3.0)
    assert halfplane_tail(LevyTriplet2D(0.0, dens), ORIGIN, u) == pytest.approx(brute, rel=1e-7)


def test_halfplane_cauchy_closed_form():
    trip = LevyTriplet2D(0.0, power_density(3.0))
    for v in (0.1, 1.0, 10.0):
        assert halfplane_tail(trip, ORIGIN, v) == pytest.approx(2.0 / v, rel=1e-9)


def test_strip_mass_cauchy_digamma_oracle():
    # strips start beyond 1, so restriction to B_1^c is automatic and N(v) = 2/v:
    # M = sum_n 2/(6n+1.5) - 2/(6n+4.5) = (1/3)(psi(3/4) - psi(1/4)) = pi/3
    trip = LevyTriplet2D(0.0, power_density(3.0))
    assert strip_mass(trip, ORIGIN, 3.0, 1.5, tol=1e-8) == pytest.approx(math.pi / 3, rel=1e-8)


def test_strip_mass_annulus_brute_force():
    trip = annulus().triplet
    rho, u = 0.7, 0.2
    chord = lambda t: 2 * math.sqrt(max(4 - t * t, 0)) - 2 * math.sqrt(max(1 - t * t, 0))
    brute = 0.0
    for k in range(3):
        a, b = 2 * k * rho + u, 2 * (k + 1) * rho - u
        brute += si.quad(chord, a, min(b, 2.0), points=[1.0], limit=200)[0] if a < 2 else 0.0
    assert strip_mass(trip, ORIGIN, rho, u) == pytest.approx(brute, rel=1e-9)


def test_strip_mass_edges():
    trip = annulus().triplet
    assert strip_mass(trip, ORIGIN, 1.0, 1.0) == 0.0
    with pytest.raises(ValueError):
        strip_mass(trip, ORIGIN, 1.0, 1.5)


def test_identity_annulus_and_cut_cauchy():
    for trip, rho in ((annulus().triplet, 2.0), (annulus().triplet, 1.3),
                      (LevyTriplet2D(0.0, power_density(3.0, floor=1.0)), 5.0)):
        a = cumulative_tail_integral_at(trip, ORIGIN, rho)
        b = cumulative_tail_integral_direct(trip, ORIGIN, rho)
        assert a == pytest.approx(b, rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(p=st.floats(2.05, 3.95), floor=st.floats(0.01, 2.0), scale=st.floats(0.1, 10.0),
       u=st.floats(0.01, 50.0))
def test_sandwich_property(p, floor, scale, u):
    trip = LevyTriplet2D(0.0, power_density(p, floor, scale))
    n = halfplane_tail(trip, ORIGIN, u)
    assert 0.25 * ball_tail(trip, ORIGIN, math.sqrt(2) * u) <= n + 1e-10
    assert n <= ball_tail(trip, ORIGIN, u) + 1e-10


@settings(max_examples=25, deadline=None)
@given(inner=st.floats(0.05, 2.0), width=st.floats(0.1, 3.0), c=st.floats(0.0, 2.0))
def test_tails_monotone_and_symbol_nonnegative(inner, width, c):
    trip = annulus(inner, inner + width, 1.0, c).triplet
    us = np.geomspace(0.01, 10, 25)
    bt = [ball_tail(trip, ORIGIN, u) for u in us]
    hp = [halfplane_tail(trip, ORIGIN, u) for u in us]
    assert all(x >= y - 1e-12 for x, y in zip(bt, bt[1:]))
    assert all(x >= y - 1e-12 for x, y in zip(hp, hp[1:]))
    assert all(eval_symbol(trip, ORIGIN, r) >= 0 for r in (0.01, 1.0, 30.0))


def test_finite_part_validation():
    with pytest.raises(ModelError):
        FinitePart(1.0, ((2.0, 1.0),))
    with pytest.raises(ModelError):
        FinitePart(1.0, ((0.5, -1.0),))


def test_declared_tail_and_second_moments():
    assert second_moment_classifier(stable(1.0)) is SecondMoment.INFINITE
    assert second_moment_classifier(annulus()) is SecondMoment.FINITE
    assert second_moment_classifier(power_tail(-4.0, -2.0)) is SecondMoment.FINITE
    assert second_moment_classifier(power_tail(-4.0, 2.0)) is SecondMoment.INFINITE


def test_quasi_unimodality():
    assert quasi_unimodality_certificate(annulus().triplet).u0 == 2.0
    bump = RadialDensity.from_profile(lambda u: np.exp(-(u - 3.0) ** 2), support_floor=0.0)
    cert = quasi_unimodality_certificate(LevyTriplet2D(0.0, bump))
    assert cert and 2.9 < cert.u0 < 3.2
    wavy = RadialDensity.from_profile(lambda u: u ** -3 * (2 + np.sin(u)), support_floor=1.0)
    assert not quasi_unimodality_certificate(LevyTriplet2D(0.0, wavy))


def test_envelopes_of_stable_like():
    fam = stable_like(ParamField(lambda x: 1.5 + 0.3 * np.tanh(x[0]), 1.2, 1.8), ParamField.constant(1.0))
    rho = 1e-3
    assert radial_symbol_profile(fam, SUP, rho) == pytest.approx(gamma_constant(1.2) * rho ** 1.2)
    assert radial_symbol_profile(fam, INF, rho) == pytest.approx(gamma_constant(1.8) * rho ** 1.8)


def test_param_field_bounds_checked():
    with pytest.raises(ModelError):
        ParamField(lambda x: 1.0, 2.0, 1.0)


def test_family_needs_a_model():
    with pytest.raises(ModelError):
        ProcessFamily("empty", None)


def test_declared_tail_requires_density_tail():
    with pytest.raises(ModelError):
        DeclaredTail(-1.5, 0.0)
