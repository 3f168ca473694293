import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from foldcycle.periodic import PeriodicFn, pack_functions

coef = st.floats(-3, 3, allow_nan=False)
harmonic_sets = st.lists(st.tuples(st.integers(1, 6), coef, coef), max_size=4,
                         unique_by=lambda h: h[0])


@given(coef, harmonic_sets, st.integers(-50 * 2 ** 20, 50 * 2 ** 20))
def test_integer_shift_is_exact(mean, harm, n):
    # dyadic angles, so theta + 1 is itself exact
    theta = n / 2 ** 20
    f = PeriodicFn(mean, tuple(harm))
    assert f(theta) == f(theta + 1.0)


@given(coef, harmonic_sets, st.floats(0, 1, allow_nan=False))
def test_scalar_matches_vector_evaluation(mean, harm, theta):
    f = PeriodicFn(mean, tuple(harm))
    assert math.isclose(f(theta), float(f(np.array([theta]))[0]), abs_tol=1e-13)


@given(coef, harmonic_sets)
def test_positivity_margin_is_a_lower_bound(mean, harm):
    f = PeriodicFn(mean, tuple(harm))
    fine = f(np.linspace(0, 1, 20001))
    assert f.positivity_margin() <= fine.min() + 1e-12


@settings(max_examples=50)
@given(coef, harmonic_sets)
def test_fit_recovers_coefficients(mean, harm):
    f = PeriodicFn(mean, tuple(harm))
    g, resid = PeriodicFn.fit(f(np.arange(64) / 64), kmax=8)
    assert resid < 1e-12
    th = np.linspace(0, 1, 101)
    assert np.max(np.abs(f(th) - g(th))) < 1e-12


def test_derivative_against_central_difference():
    f = PeriodicFn(1.0, ((1, 0.3, -0.2), (3, 0.1, 0.5)))
    df = f.derivative()
    h = 1e-6
    for th in np.linspace(0, 1, 17):
        fd = (f(th + h) - f(th - h)) / (2 * h)
        assert abs(df(th) - fd) < 1e-6


def test_mean_of_harmonics_is_exact():
    f = PeriodicFn(2.0, ((1, 0.0, 1.0),))
    assert abs(np.mean(f(np.arange(256) / 256)) - 2.0) < 1e-14


def test_invalid_harmonics_rejected():
    for bad in (((0, 1.0, 0.0),), ((1, 1.0, 0.0), (1, 0.0, 1.0))):
        try:
            PeriodicFn(0.0, bad)
        except ValueError:
            continue
        raise AssertionError(f"accepted {bad}")


def test_pack_functions_shares_kmax():
    means, cos_c, sin_c = pack_functions([PeriodicFn.constant(1.0), PeriodicFn(0.0, ((3, 1.0, 2.0),))])
    assert cos_c.shape == (2, 3) and sin_c.shape == (2, 3)
    assert cos_c[1, 2] == 1.0 and sin_c[1, 2] == 2.0
    assert list(means) == [1.0, 0.0]
