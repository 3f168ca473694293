"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

import pytest

from foldcycle import suites


def _run(fn, log):
    res = fn()
    log(res.line())
    print()
    print(res.line())
    for row in res.rows():
        print("   ", row)
    assert res.passed, res.line()


def test_criterion_01_omega0(acceptance_log):
    _run(suites.criterion_omega0, acceptance_log)


def test_criterion_02_exit_drift_scaling(acceptance_log):
    _run(suites.criterion_exit_drift, acceptance_log)


def test_criterion_03_theta_dependent_prefactor(acceptance_log):
    _run(suites.criterion_prefactor, acceptance_log)


def test_criterion_04_rotation_counts(acceptance_log):
    _run(suites.criterion_rotations, acceptance_log)


def test_criterion_05_strong_contraction(acceptance_log):
    _run(suites.criterion_contraction, acceptance_log)


def test_criterion_06_poincare_fold_certificate(acceptance_log):
    _run(suites.criterion_fold, acceptance_log)


def test_criterion_07_blowup_coherence(acceptance_log):
    _run(suites.criterion_blowup, acceptance_log)


@pytest.mark.slow
def test_criterion_08_riccati_suite(acceptance_log):
    _run(suites.criterion_riccati, acceptance_log)


def test_criterion_09_lienard(acceptance_log):
    _run(suites.criterion_lienard, acceptance_log)


def test_criterion_10_tipping(acceptance_log):
    _run(suites.criterion_tipping, acceptance_log)
