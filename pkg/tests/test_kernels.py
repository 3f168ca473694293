import pytest

from foldcycle import kernels
from foldcycle.model import FAST, SLOW, Monomial, PrototypicalSystem, RemainderSpec, ScalingRegime, SectionSpec
from foldcycle.periodic import PeriodicFn
from foldcycle.transition import entry_state, transition_map

needs_compiled = pytest.mark.skipif(not kernels.compiled_available(), reason="compiled kernel not built")


def _forced_system(alpha=2, eps=0.03):
    one = PeriodicFn.constant(1.0)
    return PrototypicalSystem(PeriodicFn(1.0, ((1, 0.2, 0.1),)), one,
                              PeriodicFn(2.0, ((1, 0.0, 1.0), (2, 0.3, 0.0))),
                              ScalingRegime(alpha, eps),
                              RemainderSpec((Monomial(PeriodicFn.constant(0.2), 3),
                                             Monomial(PeriodicFn(0.1, ((1, 0.05, 0.0),)), 1, 1)), FAST),
                              RemainderSpec((Monomial(PeriodicFn.constant(0.5), 1),), SLOW))


def test_backend_lookup():
    assert kernels.get("python").BACKEND == "python"
    assert kernels.get("auto") is kernels._impl
    with pytest.raises(ValueError):
        kernels.get("fortran")


@needs_compiled
def test_auto_prefers_compiled():
    assert kernels.BACKEND == "cython"


@needs_compiled
@pytest.mark.parametrize("alpha", [1, 2, 3])
def test_backends_agree_bit_for_bit(alpha):
    sys = _forced_system(alpha, 0.05 if alpha == 1 else 0.03)
    sec = SectionSpec()
    e = entry_state(sec, -0.13, 0.37)
    py = transition_map(sys, e, sec, backend="python")
    cy = transition_map(sys, e, sec, backend="cython")
    assert py.exit == cy.exit
    assert py.log_contraction_y == cy.log_contraction_y
    assert py.n_rot_crossings == cy.n_rot_crossings
    assert (py.stats.n_accepted, py.stats.n_rejected) == (cy.stats.n_accepted, cy.stats.n_rejected)
    assert (py.stats.backend, cy.stats.backend) == ("python", "cython")
