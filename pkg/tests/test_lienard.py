import math

import numpy as np
import pytest

from foldcycle.applications.lienard import (LienardSpec, fold_candidates, lienard_build, lienard_field,
                                            lienard_general, lienard_verify, van_der_pol)
from foldcycle.errors import AssumptionViolated
from foldcycle.model import ScalingRegime, eval_field_eps, extract_prototype
from foldcycle.periodic import PeriodicFn

OMEGA0 = 2.3381074104597670


def test_van_der_pol_build():
    spec = van_der_pol()
    build = lienard_build(spec)
    assert build.x_F == -1.0
    assert build.K2 == pytest.approx(2.0, abs=1e-14)
    th = np.linspace(0, 1, 33)
    assert np.max(np.abs(build.c(th) - (1 + 0.5 * np.sin(2 * np.pi * th)))) < 1e-15
    assert build.system.c.mean == 1.0
    assert build.system.a(0.3) == 1.0 and build.system.b(0.3) == pytest.approx(1.0, abs=1e-14)


def test_van_der_pol_exit_coefficient():
    spec = van_der_pol()
    build = lienard_build(spec)
    for th in (0.0, 0.25, 0.6):
        expected = (2 * (-1 - 0.5 * math.sin(2 * math.pi * th)) ** 2 / 2) ** (1 / 3)
        assert build.exit_y_coefficient(th, spec) == pytest.approx(expected, rel=1e-14)


def test_fold_candidates_select_convex_branch():
    # f = x^2 - 1 vanishes at -1 (K'' = 2 > 0) and +1 (K'' < 0)
    assert fold_candidates(van_der_pol()) == [-1.0]


def test_no_admissible_fold():
    spec = LienardSpec((1.0, 0.0, 1.0), (0.0, 1.0), PeriodicFn.constant(0.0))
    with pytest.raises(AssumptionViolated):
        lienard_build(spec)
    # g(x_F) must stay below the forcing for every angle
    spec = LienardSpec((-1.0, 0.0, 1.0), (0.0, 1.0), PeriodicFn(-1.5, ((1, 0.0, 0.2),)))
    with pytest.raises(AssumptionViolated):
        lienard_build(spec)


def test_prototype_equals_translated_lienard_field():
    spec = LienardSpec((-1.0, 0.3, 1.0, 0.2), (0.1, 1.0, 0.0, 0.05), PeriodicFn(0.0, ((1, 0.2, 0.4),)),
                       1.3, ScalingRegime(2, 0.03))
    build = lienard_build(spec)
    f = lienard_field(spec)
    reg = spec.regime
    K = spec.K
    rng = np.random.default_rng(0)
    for r, th, y in rng.uniform([-0.3, 0, -0.2], [0.3, 1, 0.2], size=(20, 3)):
        # the prototype works in r = x - x_F and y shifted by K(x_F)
        orig = f(0.0, np.array([build.x_F + r, th, y + K(build.x_F)]))
        proto = eval_field_eps(build.system, r, th, y, reg.eps1, reg.eps2, reg.eps)
        assert np.allclose(orig, proto, rtol=1e-12, atol=1e-15)


def test_extraction_reproduces_build():
    spec = van_der_pol()
    build = lienard_build(spec)
    sys, _ = extract_prototype(lienard_general(spec, build.x_F), spec.regime)
    th = np.linspace(0, 1, 65)
    for got, want in ((sys.a, build.system.a), (sys.b, build.system.b), (sys.c, build.system.c)):
        assert np.max(np.abs(got(th) - want(th))) < 1e-6


def test_verify_prefactor_at_one_eps():
    rep = lienard_verify(van_der_pol(), [0.01])
    p = rep.points[0]
    assert abs(p.record.exit.theta - 0.25) < 1e-5
    assert 0.8 <= p.ratio <= 1.2
    assert rep.fit is None


@pytest.mark.parametrize("alpha", [4, 5])
def test_large_alpha_exit_angle_stays_near_entry(alpha):
    c_min = 0.5
    R = 0.1
    rep = lienard_verify(van_der_pol(alpha=alpha, eps=0.02), [0.02, 0.03], target_exit_theta=None,
                         entry_theta=0.3)
    for p in rep.points:
        shift = p.record.exit.theta_lifted - 0.3
        eps = p.eps
        # slow drift time R^2/(c eps^3) at angular speed eps^alpha
        envelope = eps ** (alpha - 3) * R * R / c_min + eps ** 3 * abs(math.log(eps))
        assert 0 <= shift <= envelope
        assert p.record.n_rot == 0
