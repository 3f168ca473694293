import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from foldcycle.applications.tipping import (CANARD_ADJACENT, EXTERIOR, REGULAR_JUMP, TippingSpec,
                                            canard_angles, classify_entry, hamiltonian_drift,
                                            in_interior, reaches_fold_both_ways, reduced_return,
                                            tipping_folded_singularities, tipping_hamiltonian,
                                            tipping_simulate, tipping_theta_e, tipping_transit_time,
                                            transit_residual, transit_time)
from foldcycle.errors import DomainError, NoBracket, NoEvent
from foldcycle.model import ScalingRegime

SPEC = TippingSpec()


def test_hamiltonian_levels():
    for A in (0.5, 2.0):
        assert tipping_hamiltonian(0.0, 0.25, A) == A / 2
        assert tipping_hamiltonian(0.0, 0.75, A) == -A / 2


@pytest.mark.parametrize("z0,theta0", [(0.3, 0.5), (-0.4, 0.1), (1.5, 0.75)])
def test_hamiltonian_conserved(z0, theta0):
    assert hamiltonian_drift(z0, theta0, 0.5, 20.0) <= 1e-9


def test_folded_singularities():
    for A in (0.1, 0.5, 2.0):
        saddle, center = tipping_folded_singularities(A)
        assert (saddle.z, saddle.theta, saddle.kind) == (0.0, 0.25, "saddle")
        assert (center.z, center.theta, center.kind) == (0.0, 0.75, "center")
        ev = np.array(saddle.eigenvalues)
        assert np.all(np.abs(ev.imag) < 1e-12) and ev.real.min() < 0 < ev.real.max()
        ev = np.array(center.eigenvalues)
        assert np.all(np.abs(ev.real) < 1e-12) and np.all(np.abs(ev.imag) > 0)
    with pytest.raises(DomainError):
        tipping_folded_singularities(0.0)


def test_canard_angles_figure_values():
    lo, hi = canard_angles(1.0, 2.0)
    assert lo == pytest.approx(5 / 12, abs=1e-15)
    assert hi == pytest.approx(1 / 12, abs=1e-15)


def test_jump_angle_values():
    assert tipping_theta_e(0.75, 1.0, 2.0) == pytest.approx(11 / 12, abs=1e-15)
    oracle = math.asin(-math.sqrt(3) / 2 + 0.5) / (2 * math.pi) + 1
    assert tipping_theta_e(5 / 6, 1.0, 2.0) == pytest.approx(oracle, abs=1e-15)
    assert abs(oracle - 0.94038) < 5e-5


@given(st.floats(0.05, 2.0), st.floats(0.01, 0.99), st.floats(0, 1))
def test_jump_angle_branch(A, frac, u):
    R = math.sqrt(frac * 2 * A)
    lo, hi = canard_angles(R, A)
    width = (hi - lo) % 1.0
    theta = (lo + 1e-9 + u * (width - 2e-9)) % 1.0
    if not in_interior(theta, R, A):
        return
    th_e = tipping_theta_e(theta, R, A)
    assert 0.75 < th_e < 1.0 or 0.0 <= th_e < 0.25


@given(st.floats(0.05, 2.0), st.floats(0.01, 0.99))
def test_jump_angle_boundary_level(A, frac):
    R = math.sqrt(frac * 2 * A)
    for th in canard_angles(R, A):
        assert abs(math.sin(2 * math.pi * th) + R * R / A - 1.0) <= 1e-12


def test_jump_angle_outside_interior():
    with pytest.raises(DomainError):
        tipping_theta_e(0.25, 0.3, 0.5)
    with pytest.raises(DomainError):
        tipping_theta_e(0.75, 2.0, 1.0)


def test_spec_validation():
    with pytest.raises(DomainError):
        TippingSpec(amplitude=0.04, R=0.3)
    with pytest.raises(DomainError):
        TippingSpec(rho=0.2, R=0.3)
    with pytest.raises(DomainError):
        TippingSpec(nu=0.0)


def test_transit_time_without_forcing():
    reg = ScalingRegime(2, 0.05)
    T = transit_time(0.3, 0.0, 1.5, 0.3, 0.5, reg)
    assert T == pytest.approx((0.25 - 0.09) / (0.05 ** 3 * 1.5), rel=1e-12)


@pytest.mark.parametrize("alpha", [1, 2])
@pytest.mark.parametrize("theta", [0.1, 0.45, 0.8])
def test_transit_time_is_minimal_root(alpha, theta):
    spec = SPEC.with_regime(alpha=alpha, eps=0.05)
    T = tipping_transit_time(theta, spec)
    reg = spec.regime
    assert abs(transit_residual(T, theta, spec.amplitude, spec.nu, spec.R, spec.rho, reg)) <= 1e-10
    ts = np.linspace(0.0, T - 1e-6, 200001)
    vals = transit_residual(ts, theta, spec.amplitude, spec.nu, spec.R, spec.rho, reg)
    assert np.all(vals > 0)


def test_transit_time_horizon():
    with pytest.raises(NoBracket):
        tipping_transit_time(0.3, SPEC, horizon=1.0)


def test_classification():
    lo, hi = canard_angles(SPEC.R, SPEC.amplitude)
    assert classify_entry(0.75, SPEC.R, SPEC.amplitude) == REGULAR_JUMP
    assert classify_entry(lo + 0.005, SPEC.R, SPEC.amplitude) == CANARD_ADJACENT
    assert classify_entry(lo, SPEC.R, SPEC.amplitude) == CANARD_ADJACENT
    assert classify_entry(0.25, SPEC.R, SPEC.amplitude) == EXTERIOR


@pytest.mark.parametrize("theta0", [0.6, 0.75, 0.9])
def test_simulated_jump_angle(theta0):
    jump = tipping_simulate(SPEC, theta0)
    assert jump.classification == REGULAR_JUMP
    assert jump.theta_error <= 0.02
    assert jump.a_exit < 0


def test_canard_adjacent_entry_has_no_prediction():
    lo, _ = canard_angles(SPEC.R, SPEC.amplitude)
    jump = tipping_simulate(SPEC, lo + 0.005)
    assert jump.classification == CANARD_ADJACENT and jump.theta_e is None and jump.theta_error is None


def test_exterior_entry_recirculates():
    with pytest.raises(NoEvent):
        tipping_simulate(SPEC, 0.25)


@settings(max_examples=20, deadline=None)
@given(st.floats(-0.99, 0.99), st.floats(0, 1))
def test_interior_levels_reach_the_fold(level, theta0):
    A = 0.5
    # z > 0 on the level H = level * A / 2 through angle theta0
    z2 = level * A - A * math.sin(2 * math.pi * theta0)
    if z2 <= 1e-4:
        return
    assert reaches_fold_both_ways(math.sqrt(z2), theta0, A)


@pytest.mark.parametrize("z0,theta0", [(1.5, 0.75), (1.0, 0.2), (-1.2, 0.5)])
def test_exterior_levels_are_periodic(z0, theta0):
    assert abs(reduced_return(z0, theta0, 0.5) - z0) <= 1e-8


def test_reduced_return_raises_on_interior_level():
    with pytest.raises(NoEvent):
        reduced_return(0.2, 0.5, 0.5)
