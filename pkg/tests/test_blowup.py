import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from foldcycle.blowup import (K1, K2, K3, ChartPoint, blow_down, chart_vector, check_blowdown_consistency,
                              k1_graph_deviation, k1_passage, k3_eigenvalues, k3_jacobian, kappa_12,
                              kappa_12_inv, kappa_23, kappa_23_inv, motion_constant_drift,
                              pushforward_vector, riccati_airy_deviation, riccati_alpha1_bounds,
                              riccati_exit_value, riccati_special_solution)
from foldcycle.errors import DomainError
from foldcycle.model import FAST, SLOW, Monomial, PrototypicalSystem, RemainderSpec, ScalingRegime
from foldcycle.periodic import PeriodicFn

OMEGA0 = 2.3381074104597670
ONE = PeriodicFn.constant(1.0)
pos = st.floats(0.05, 3.0)
ang = st.floats(0.0, 1.0)


def _system(alpha=2, eps=0.01, remainders=False):
    a = PeriodicFn(1.0, ((1, 0.2, 0.1),))
    b = PeriodicFn(1.5, ((1, 0.0, 0.3),))
    c = PeriodicFn(2.0, ((1, 0.5, 0.0),))
    if not remainders:
        return PrototypicalSystem(a, b, c, ScalingRegime(alpha, eps))
    fast = RemainderSpec((Monomial(PeriodicFn(0.3, ((1, 0.1, 0.0),)), 3),
                          Monomial(PeriodicFn.constant(0.2), 1, 1),
                          Monomial(PeriodicFn.constant(0.4), 0, 0, 3.0)), FAST)
    slow = RemainderSpec((Monomial(PeriodicFn.constant(0.5), 1),
                          Monomial(PeriodicFn(0.1, ((2, 0.0, 0.2),)), 0, 1)), SLOW)
    return PrototypicalSystem(a, b, c, ScalingRegime(alpha, eps), fast, slow)


def test_blow_down_examples():
    assert blow_down(ChartPoint(K2, (1, 0, 2, 0.1))) == pytest.approx((0.1, 0, 0.02, 0.1), abs=1e-16)
    assert blow_down(ChartPoint(K1, (2, 0.3, 0.1, 0.5))) == pytest.approx((0.2, 0.3, 0.01, 0.05), abs=1e-16)
    assert blow_down(ChartPoint(K3, (0.2, 0.3, 0.25, 0.25))) == pytest.approx((0.2, 0.3, 0.01, 0.05), abs=1e-16)


def test_kappa_examples():
    q = kappa_12(ChartPoint(K1, (2, 0.3, 0.1, 0.5)))
    assert q.chart == K2 and q.coords == pytest.approx((4, 0.3, 4, 0.05), abs=1e-15)
    p = kappa_23(ChartPoint(K2, (4, 0.3, 4, 0.05)))
    assert p.chart == K3 and p.coords == pytest.approx((0.2, 0.3, 0.25, 0.25), abs=1e-15)


def test_kappa_domains():
    with pytest.raises(DomainError):
        kappa_12(ChartPoint(K1, (1, 0, 0.1, 0.0)))
    with pytest.raises(DomainError):
        kappa_12_inv(ChartPoint(K2, (1, 0, -1.0, 0.1)))
    with pytest.raises(DomainError):
        kappa_23(ChartPoint(K2, (-1, 0, 1.0, 0.1)))
    with pytest.raises(DomainError):
        kappa_23_inv(ChartPoint(K3, (0.1, 0, 1.0, 0.0)))
    with pytest.raises(DomainError):
        ChartPoint("K4", (0, 0, 0, 0))


@given(st.floats(-3, 3), ang, pos, pos)
def test_k1_round_trip_and_coherence(r1, th, rho, e1):
    p = ChartPoint(K1, (r1, th, rho, e1))
    back = kappa_12_inv(kappa_12(p))
    assert np.allclose(back.coords, p.coords, rtol=1e-14, atol=1e-14)
    assert np.allclose(blow_down(kappa_12(p)), blow_down(p), rtol=1e-13, atol=1e-13)


@given(pos, ang, st.floats(-3, 3), pos)
def test_k2_k3_round_trip_and_coherence(r2, th, y2, rho):
    q = ChartPoint(K2, (r2, th, y2, rho))
    back = kappa_23_inv(kappa_23(q))
    assert np.allclose(back.coords, q.coords, rtol=1e-14, atol=1e-14)
    assert np.allclose(blow_down(kappa_23(q)), blow_down(q), rtol=1e-13, atol=1e-13)


def test_k1_field_example():
    v = chart_vector(K1, PrototypicalSystem.unit(alpha=2), (0.0, 0.0, 0.0, 1.0))
    assert v[0] == -1.0 and v[3] == 0.5


@pytest.mark.parametrize("alpha,expected", [(1, 1.0), (2, 0.0), (3, 0.0)])
def test_k2_on_blowup_locus_is_planar_riccati(alpha, expected):
    sys = _system(alpha)
    for th in (0.0, 0.3, 0.7):
        r2, y2 = 0.4, -0.8
        v = chart_vector(K2, sys, (r2, th, y2, 0.0))
        assert v[0] == pytest.approx(-sys.a(th) * y2 + sys.b(th) * r2 ** 2, abs=1e-15)
        assert v[1] == expected and v[2] == -sys.c(th) and v[3] == 0.0


@pytest.mark.parametrize("alpha", [1, 2, 3])
@pytest.mark.parametrize("remainders", [False, True])
def test_closed_forms_match_pushforward(alpha, remainders):
    sys = _system(alpha, remainders=remainders)
    rng = np.random.default_rng(alpha)
    for chart in (K1, K2, K3):
        for _ in range(20):
            pt = rng.uniform([-2, 0, 0.01, 0.05], [2, 1, 0.5, 1.5])
            if chart == K2:
                pt = np.array([pt[0], pt[1], rng.uniform(-2, 2), pt[2]])
            elif chart == K3:
                pt = np.array([pt[2], pt[1], rng.uniform(-2, 2), pt[3]])
            closed = chart_vector(chart, sys, pt)
            push = pushforward_vector(chart, sys, pt)
            assert np.allclose(closed, push, rtol=1e-9, atol=1e-12), (chart, pt)


@pytest.mark.parametrize("alpha", [1, 2, 3])
def test_invariant_subspaces(alpha):
    sys = _system(alpha, remainders=True)
    for th in (0.1, 0.6):
        assert chart_vector(K1, sys, (-0.7, th, 0.0, 0.4))[2] == 0.0
        assert chart_vector(K1, sys, (-0.7, th, 0.3, 0.0))[3] == 0.0
        assert chart_vector(K2, sys, (0.5, th, -0.3, 0.0))[3] == 0.0
        assert chart_vector(K3, sys, (0.0, th, 0.3, 0.2))[0] == 0.0
        assert chart_vector(K3, sys, (0.2, th, 0.3, 0.0))[3] == 0.0


@pytest.mark.parametrize("theta", [0.0, 0.2, 0.55, 0.9])
def test_k3_eigenvalues_on_exit_circle(theta):
    sys = _system(2)
    b = sys.b(theta)
    ev = k3_eigenvalues(sys, theta)
    assert np.allclose(ev, [b, 0.0, -b, -2 * b], atol=1e-10)


def test_k3_jacobian_matches_finite_differences():
    sys = _system(2)
    x = np.array([0.1, 0.35, 0.2, 0.3])
    J = k3_jacobian(sys, x)
    h = 1e-6
    for k in range(4):
        e = np.zeros(4)
        e[k] = h
        fd = (chart_vector(K3, sys, x + e) - chart_vector(K3, sys, x - e)) / (2 * h)
        assert np.allclose(J[:, k], fd, atol=1e-7)


def test_divided_k3_variant():
    sys = PrototypicalSystem.unit()
    v = chart_vector(K3, sys, (0.1, 0.0, 0.5, 0.2), divided=True)
    F = 1.0 - 0.5
    assert np.allclose(v * F, chart_vector(K3, sys, (0.1, 0.0, 0.5, 0.2)), atol=1e-15)
    with pytest.raises(DomainError):
        chart_vector(K3, sys, (0.1, 0.0, 1.5, 0.2), divided=True)
    with pytest.raises(DomainError):
        chart_vector(K1, sys, (0.1, 0.0, 0.5, 0.2), divided=True)


def test_consistency_trivial_horizon():
    assert check_blowdown_consistency(K1, _system(), (-1.5, 0.1, 0.1, 0.2), 0.0) == 0.0
    with pytest.raises(DomainError):
        check_blowdown_consistency(K1, _system(), (-1.5, 0.1, 0.0, 0.2), 1.0)


@pytest.mark.parametrize("chart,p0,horizon", [(K1, (-1.2, 0.1, 0.1, 0.2), 5.0),
                                              (K2, (-1.0, 0.2, 3.0, 0.02), 1.0),
                                              (K3, (0.1, 0.4, 0.3, 0.2), 2.0)])
def test_blowdown_consistency(chart, p0, horizon):
    assert check_blowdown_consistency(chart, _system(2, remainders=True), p0, horizon) <= 1e-8


@pytest.mark.parametrize("chart,p0", [(K1, (-1.2, 0.1, 0.1, 0.2)), (K2, (-1.0, 0.2, 3.0, 0.02)),
                                      (K3, (0.1, 0.4, 0.3, 0.2))])
def test_motion_constant_is_conserved(chart, p0):
    assert motion_constant_drift(chart, _system(2), p0, 2.0) <= 1e-9


@pytest.mark.parametrize("alpha,bound", [(1, 5.0), (2, 2.0)])
def test_k1_orbit_tracks_graph(alpha, bound):
    sys = _system(alpha)
    start = 0.1 if alpha == 1 else 0.05
    for rho in (1e-2, 1e-3):
        dev, scale = k1_graph_deviation(sys, 0.1, rho, start, 0.3)
        assert dev <= bound * scale


def test_k1_passage_formulas():
    sys = PrototypicalSystem.unit(alpha=2)
    for R in (0.05, 0.01):
        p = k1_passage(sys, -1.0, 0.0, R, 0.1, 0.5)
        assert abs(p.simulated_time / p.predicted_time - 1) < 1e-10
        assert abs(p.simulated_theta - p.predicted_theta) < 1e-10
        # rho1 eps1 is the motion constant
        assert abs(p.rho_at_exit * 0.5 - R * 0.1) < 1e-12


def test_riccati_special_solution_unit():
    curve = riccati_special_solution(1.0, 1.0, 1.0)
    assert abs(curve(20.0) - (-OMEGA0 + 0.05)) <= 2e-4
    assert riccati_airy_deviation(curve) <= 1e-8
    with pytest.raises(DomainError):
        curve(21.0)
    with pytest.raises(DomainError):
        riccati_special_solution(1.0, 1.0, 1.0, L=4.0)


def test_riccati_special_solution_scales():
    a, b, c = 2.0, 0.5, 1.5
    curve = riccati_special_solution(a, b, c)
    y_scale = (c * c / (a * b)) ** (1 / 3)
    r_scaled = 20.0 / (a * c / (b * b)) ** (1 / 3)
    # next asymptotic terms, in scaled units, bound the truncation
    bound = 2 * y_scale * (OMEGA0 / (3 * r_scaled ** 3) + 1 / (4 * r_scaled ** 4))
    assert abs(curve(20.0) - (-y_scale * OMEGA0 + c / (b * 20.0))) <= bound
    assert riccati_airy_deviation(curve) <= 1e-8


def test_riccati_exit_value():
    assert abs(riccati_exit_value(1.0, 1.0, 1.0, 0.05) - (-OMEGA0 + 0.05)) <= 1e-4


def test_alpha1_bounds_collapse_for_constant_coefficients():
    rep = riccati_alpha1_bounds(ONE, ONE, ONE, 0.2, 0.1, -0.15, -0.15 + 1e-12,
                                initial=[(-0.15 / 0.02, 0.3)])
    assert rep.A_minus == rep.A_plus == rep.B_minus == rep.B_plus == 1.0
    run = rep.runs[0]
    assert run.held
    assert abs(run.lower_violation) <= 1e-7 and abs(run.upper_violation) <= 1e-7


@pytest.mark.slow
def test_alpha1_sandwich_with_forced_c():
    c = PeriodicFn(2.0, ((1, 0.0, 1.0),))
    rep = riccati_alpha1_bounds(ONE, ONE, c, 0.2, 0.1, n_runs=4, seed=3)
    assert rep.A_minus == pytest.approx(1 / 3, rel=1e-6) and rep.A_plus == pytest.approx(1.0, rel=1e-6)
    assert rep.all_crossed and rep.all_held
