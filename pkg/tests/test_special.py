import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from foldcycle.errors import BracketError, DomainError
from foldcycle.special import (airy_ai, airy_ai_prime, airy_first_zero, bessel_combination,
                               bessel_j, brent_root, gamma, omega0)

mpmath.mp.dps = 40

# first zero of Ai(-z), frozen from mpmath.airyaizero(1)
OMEGA0 = 2.3381074104597670


def test_omega0_frozen_value_matches_mpmath():
    assert abs(float(-mpmath.airyaizero(1)) - OMEGA0) < 1e-16


def test_omega0_value_and_checks():
    res = omega0()
    assert abs(res.value - OMEGA0) < 1e-14
    assert res.residual <= 1e-12
    assert res.airy_crosscheck <= 1e-10
    assert res.value > 0


def test_omega0_is_reproducible():
    a = omega0().value
    b = omega0(refresh=True).value
    assert a == b


def test_combination_brackets_the_root():
    assert bessel_combination(1.0) > 0
    assert bessel_combination(3.0) < 0


@given(st.floats(0.05, 4.0))
def test_bessel_against_mpmath_working_range(w):
    for nu in (1 / 3, -1 / 3):
        ref = float(mpmath.besselj(mpmath.mpf(nu), w))
        assert abs(bessel_j(nu, w) - ref) <= 1e-14


@given(st.floats(4.0, 30.0))
def test_bessel_against_mpmath_cancellation_bound(w):
    # alternating series: roundoff grows with the largest term, about e^w
    for nu in (1 / 3, -1 / 3):
        ref = float(mpmath.besselj(mpmath.mpf(nu), w))
        assert abs(bessel_j(nu, w) - ref) <= 1e-15 * math.exp(w)


def test_bessel_small_argument_leading_term():
    w = 1e-6
    lead = (w / 2) ** (1 / 3) / gamma(4 / 3)
    assert abs(bessel_j(1 / 3, w) / lead - 1) < 1e-6


def test_bessel_domain():
    with pytest.raises(DomainError):
        bessel_j(0.5, 1.0)
    with pytest.raises(DomainError):
        bessel_j(1 / 3, 0.0)
    with pytest.raises(DomainError):
        bessel_j(1 / 3, 31.0)


@given(st.floats(-8.0, 8.0))
def test_airy_against_mpmath(x):
    assert abs(airy_ai(x) - float(mpmath.airyai(x))) <= 1e-13
    assert abs(airy_ai_prime(x) - float(mpmath.airyai(x, derivative=1))) <= 1e-12


def test_airy_bessel_identity():
    for z in np.linspace(0.1, 5.0, 64):
        w = 2 * z ** 1.5 / 3
        lhs = math.sqrt(z) / 3 * (bessel_j(1 / 3, w) + bessel_j(-1 / 3, w))
        assert abs(lhs - airy_ai(-z)) <= 1e-12


def test_airy_values():
    assert abs(airy_ai(0.0) - 1 / (3 ** (2 / 3) * gamma(2 / 3))) < 1e-15
    assert abs(airy_ai(0.0) - 0.3550280539) < 1e-10
    assert all(airy_ai(x) > 0 for x in np.linspace(0, 8, 65))
    assert abs(airy_ai(-OMEGA0)) < 1e-11
    assert abs(airy_first_zero() - OMEGA0) < 1e-14
    with pytest.raises(DomainError):
        airy_ai(9.0)


def test_gamma_reflection():
    for x in (1 / 3, 2 / 3):
        assert abs(gamma(x) * gamma(1 - x) - math.pi / math.sin(math.pi * x)) < 1e-13


@given(st.floats(0.1, 20.0))
def test_gamma_against_stdlib(x):
    assert abs(gamma(x) / math.gamma(x) - 1) < 1e-13


def test_brent_examples():
    assert abs(brent_root(lambda x: x * x - 2, 1, 2) - math.sqrt(2)) < 1e-12
    assert abs(brent_root(lambda x: math.sin(2 * math.pi * x) - 0.5, 0, 0.25) - 1 / 12) < 1e-12
    assert abs(brent_root(airy_ai, -3, -2) + OMEGA0) < 1e-11
    with pytest.raises(BracketError):
        brent_root(lambda x: x * x + 1, -1, 1)


@given(st.floats(-5, 5), st.floats(0.1, 3))
def test_brent_finds_shifted_cubic_root(root, width):
    r = brent_root(lambda x: (x - root) ** 3 + (x - root), root - width, root + 2 * width, tol=1e-13)
    assert abs(r - root) < 1e-12
