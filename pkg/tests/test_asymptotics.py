import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from foldcycle.asymptotics import (exit_y_coefficient, fit_power_law, fixed_slope_prefactor, mean_c,
                                   predict_exit_theta, predict_exit_y, predict_n_rot, psi_printed,
                                   reduced_flow_psi)
from foldcycle.errors import DegenerateInput
from foldcycle.model import PrototypicalSystem, ScalingRegime
from foldcycle.periodic import PeriodicFn

OMEGA0 = 2.3381074104597670
ONE = PeriodicFn.constant(1.0)


def _system(c, a=ONE, b=ONE, alpha=2, eps=0.01):
    return PrototypicalSystem(a, b, c, ScalingRegime(alpha, eps))


def test_mean_c():
    assert mean_c(ONE) == 1.0
    assert mean_c(PeriodicFn(2.0, ((1, 0.0, 1.0),))) == 2.0
    assert mean_c(PeriodicFn(2.0, ((1, 0.3, 0.0), (2, 0.0, 1.0)))) == 2.0


def test_exit_y_examples():
    assert predict_exit_y(2, 0.0, 0.1, 1, 1, 1).leading == pytest.approx(-OMEGA0 * 0.01, rel=1e-14)
    assert predict_exit_y(2, 0.0, 0.1, 8, 1, 1).leading == pytest.approx(-OMEGA0 / 2 * 0.01, rel=1e-14)
    p = predict_exit_y(1, 0.0, 0.1, 1, 1, 1)
    assert p.leading is None and p.error_order == "O(eps^2)"
    assert predict_exit_y(2, 0.0, 0.1, 1, 1, 1).error_order == "eps^3 ln eps"


@given(st.floats(0.1, 10), st.floats(0, 1))
def test_exit_y_invariant_under_common_scaling(lam, theta):
    a = PeriodicFn(1.5, ((1, 0.2, 0.0),))
    b = PeriodicFn(1.0, ((2, 0.0, 0.3),))
    c = PeriodicFn(2.0, ((1, 0.0, 1.0),))
    base = exit_y_coefficient(theta, a, b, c)
    scaled = exit_y_coefficient(theta, a.scaled(lam), b.scaled(lam), c.scaled(lam))
    assert abs(scaled - base) <= 1e-14 * base


def test_exit_theta_examples():
    p = predict_exit_theta(1, -0.1, 0.0, 0.01, 0.1, _system(ONE))
    assert p.leading == pytest.approx(100.0, rel=1e-13)
    p = predict_exit_theta(2, -0.1, 0.25, 0.01, 0.1, _system(PeriodicFn.constant(2.0)))
    assert p.leading == pytest.approx(0.75, rel=1e-13)
    for alpha in (4, 5):
        assert predict_exit_theta(alpha, -0.1, 0.3, 0.01, 0.1, _system(ONE)).leading == 0.3


@given(st.sampled_from([1, 2]), st.floats(0, 1), st.floats(0.005, 0.05))
def test_exit_theta_depends_on_c_through_mean_only(alpha, theta, eps):
    c1 = PeriodicFn(2.0, ((1, 0.0, 1.0),))
    c2 = PeriodicFn(2.0, ((3, 0.5, -0.4),))
    p1 = predict_exit_theta(alpha, -0.1, theta, eps, 0.1, _system(c1))
    p2 = predict_exit_theta(alpha, -0.1, theta, eps, 0.1, _system(c2))
    assert p1.leading == p2.leading


def test_psi_constant_coefficients():
    # dr/dtheta = -1/(2r) from r = -R: arrival after R^2 exactly
    sys = _system(ONE, alpha=3)
    assert abs(reduced_flow_psi(sys, 0.1, 0.2) - 0.21) < 1e-10
    assert reduced_flow_psi(sys, 0.0, 0.2) == 0.2
    assert abs(reduced_flow_psi(sys, 1e-3, 0.2) - 0.2) < 1e-5


def test_psi_against_closed_form_for_unequal_coefficients():
    # constant a, b, c: arrival increment R^2 / c, independent of a and b
    sys = _system(PeriodicFn.constant(2.0), a=PeriodicFn.constant(3.0), b=PeriodicFn.constant(0.5), alpha=3)
    assert abs(reduced_flow_psi(sys, 0.1, 0.0) - 0.01 / 2.0) < 1e-10
    assert abs(psi_printed(sys, 0.1, 0.0) - 0.5 / 6.0 * 0.01) < 1e-15


def test_psi_monotone_in_R():
    sys = _system(ONE, alpha=3)
    vals = [reduced_flow_psi(sys, R, 0.4) for R in np.linspace(0.01, 0.3, 12)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_psi_full_period_shift():
    sys = _system(PeriodicFn(2.0, ((1, 0.0, 1.0),)), a=PeriodicFn(1.0, ((1, 0.3, 0.0),)), alpha=3)
    # dyadic angles keep the shifted start exact
    for th in (0.125, 0.375, 0.8125):
        assert abs(reduced_flow_psi(sys, 0.1, th + 1.0) - 1.0 - reduced_flow_psi(sys, 0.1, th)) < 1e-12


def test_n_rot_examples():
    p = predict_n_rot(1, 0.0, 0.01, 0.1, _system(ONE))
    assert p.value == 100 and p.slack >= 10
    p = predict_n_rot(2, 0.0, 0.01, 0.1, _system(ONE))
    assert p.value in (0, 1) and p.slack >= 1 and p.contains(1) and p.contains(0)
    p = predict_n_rot(4, 0.0, 0.01, 0.1, _system(ONE))
    assert p.value == 0 and p.slack == 0 and not p.contains(1)


def test_power_law_examples():
    eps = [0.005, 0.01, 0.02, 0.04, 0.05]
    fit = fit_power_law([(e, e ** 2) for e in eps])
    assert abs(fit.slope - 2.0) < 1e-12 and fit.r_squared == pytest.approx(1.0)
    fit = fit_power_law([(e, -3 * e ** 2) for e in eps])
    assert abs(fit.intercept - math.log(3)) < 1e-10
    assert fixed_slope_prefactor([(e, 3 * e ** 2) for e in eps], 2.0) == pytest.approx(3.0, rel=1e-13)


@given(st.floats(-3, 3), st.floats(0.01, 100), st.lists(st.floats(1e-4, 1.0), min_size=4, max_size=10,
                                                         unique=True))
def test_power_law_recovers_exponent(k, pref, eps):
    if max(eps) / min(eps) < 1.5:
        return
    fit = fit_power_law([(e, pref * e ** k) for e in eps])
    assert abs(fit.slope - k) < 1e-10
    assert 0.0 <= fit.r_squared <= 1.0


def test_power_law_degenerate_inputs():
    with pytest.raises(DegenerateInput):
        fit_power_law([(0.1, 1.0)] * 3)
    with pytest.raises(DegenerateInput):
        fit_power_law([(0.1, 1.0), (0.2, -1.0), (0.3, 1.0), (0.4, 1.0)])
    with pytest.raises(DegenerateInput):
        fit_power_law([(0.1, 1.0)] * 4)
    with pytest.raises(DegenerateInput):
        fit_power_law([(0.1, 0.0), (0.2, 1.0), (0.3, 1.0), (0.4, 1.0)])
