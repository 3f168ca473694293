"""Transition map from the entry section to the exit section, the Poincaré
return map of the layer family, and contraction scans."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError, NoEvent, StepUnderflow
from .integrator import EventSpec, IntegratorConfig, integrate_to_event, RISING
from .model import CylState, PrototypicalSystem, SectionSpec, eval_field_eps, field_callable
from .special import brent_root

_STATUS_TEXT = {kernels.MAX_STEPS: "step limit reached",
                kernels.UNDERFLOW: "step size underflow",
                kernels.TIME_LIMIT: "time limit reached"}


@dataclass(frozen=True)
class StepStats:
    n_accepted: int
    n_rejected: int
    backend: str


@dataclass(frozen=True)
class TransitionRecord:
    entry: CylState
    exit: CylState
    n_rot: int
    n_rot_crossings: int
    transit_time: float
    log_contraction_y: float
    stats: StepStats


def entry_state(section: SectionSpec, r: float, theta: float = 0.0) -> CylState:
    """Point of the entry section with y = R²."""
    return CylState(float(r), float(theta), section.R ** 2)


def kernel_arguments(sys: PrototypicalSystem):
    """Packed coefficient arrays in the order the kernels expect."""
    means, cos_c, sin_c, mono = sys.packed()
    eps = sys.regime.eps
    fac = np.array([eps ** s for s in mono[:, 3]], dtype=float)
    return (means, cos_c, sin_c, mono[:, 0].astype(np.int32), mono[:, 1].copy(),
            mono[:, 2].copy(), fac, mono[:, 4].astype(np.int32))


def _dense(rc, s: float) -> list[float]:
    s1 = 1.0 - s
    return [rc[0][i] + s * (rc[1][i] + s1 * (rc[2][i] + s * (rc[3][i] + s1 * rc[4][i])))
            for i in range(len(rc[0]))]


def default_time_limit(sys: PrototypicalSystem, section: SectionSpec) -> float:
    """Generous horizon: several times the slow drift time from y = R² to −y₀."""
    c_min, _ = sys.c.sampled_extrema()
    if c_min <= 0:
        return math.inf
    return 8.0 * (section.R ** 2 + section.y0) / (c_min * sys.regime.eps2)


def _kernel_run(sys, x0, v0, section, cfg, theta_ref, backend, t_max):
    mod = kernels.get(backend)
    e1, e2 = sys.regime.eps1, sys.regime.eps2
    h_init = cfg.h_init if cfg.h_init is not None else 0.0
    out = mod.proto_integrate(*kernel_arguments(sys), e1, e2, x0, v0, section.R, theta_ref,
                              cfg.rtol, cfg.atol, h_init, cfg.h_min, cfg.h_max,
                              int(cfg.max_steps), t_max)
    status = out[0]
    if status == kernels.UNDERFLOW:
        raise StepUnderflow(f"step size fell below h_min={cfg.h_min:g} at t={out[1]:g}")
    if status != kernels.EXITED:
        raise NoEvent(f"trajectory did not reach r = R: {_STATUS_TEXT[status]} at t={out[1]:g}")
    return mod.BACKEND, out


def _locate_exit(rc, R: float) -> tuple[float, list[float]]:
    s = brent_root(lambda u: _dense(rc, u)[0] - R, 0.0, 1.0, tol=1e-12)
    return s, _dense(rc, s)


def transition_map(sys: PrototypicalSystem, entry: CylState,
                   section: SectionSpec = SectionSpec(), cfg: IntegratorConfig = IntegratorConfig(),
                   contraction: bool = True, backend: str = "auto",
                   t_max: float | None = None) -> TransitionRecord:
    """Simulate from a point of the entry section until r = R.

    The log-contraction is log|d(exit y)/d(entry r)| along the exit section,
    including the correction for the moving event time.
    """
    if abs(entry.y - section.R ** 2) > 1e-12 * max(1.0, section.R ** 2):
        raise DomainError(f"entry y={entry.y:g} is not on the entry section y=R²={section.R ** 2:g}")
    if not section.on_entry(entry.r):
        raise DomainError(f"entry r={entry.r:g} outside [{section.beta_minus:g}, {section.beta_plus:g}]")
    if t_max is None:
        t_max = default_time_limit(sys, section)
    x0 = [entry.r, entry.theta_lifted, entry.y]
    ref = entry.theta_lifted

    name, out = _kernel_run(sys, x0, None, section, cfg, ref, backend, t_max)
    _, t0, z0, h, rc, n_acc, n_rej, n_cross, _ = out
    s, zx = _locate_exit(rc, section.R)
    # the bracketing step is not included in the kernel's crossing count
    if math.sin(2 * math.pi * (z0[1] - ref)) < 0.0 <= math.sin(2 * math.pi * (zx[1] - ref)):
        n_cross += 1
    exit_state = CylState(zx[0], zx[1], zx[2])
    if abs(exit_state.y) > section.y0:
        raise NoEvent(f"exit y={exit_state.y:g} lies outside the exit section |y| <= {section.y0:g}")

    log_c = math.nan
    if contraction:
        _, vout = _kernel_run(sys, x0, [1.0, 0.0, 0.0], section, cfg, ref, backend, t_max)
        vrc, logmag = vout[4], vout[8]
        _, zv = _locate_exit(vrc, section.R)
        reg = sys.regime
        dr, _, dy = eval_field_eps(sys, zv[0], zv[1], zv[2], reg.eps1, reg.eps2, reg.eps)
        sens = zv[5] - dy / dr * zv[3]
        log_c = math.log(abs(sens)) + logmag if sens != 0.0 else -math.inf

    dtheta = exit_state.theta_lifted - entry.theta_lifted
    return TransitionRecord(entry, exit_state, int(math.floor(dtheta)), int(n_cross),
                            t0 + s * h, log_c, StepStats(int(n_acc), int(n_rej), name))


def poincare_map(sys: PrototypicalSystem, r: float, y: float, eps1: float | None = None,
                 eps2: float | None = None, theta0: float = 0.0,
                 cfg: IntegratorConfig = IntegratorConfig(rtol=1e-12, atol=1e-14),
                 ) -> tuple[float, float]:
    """Return map to the same angle after one revolution, θ̃ ↦ θ̃ + 1.

    eps1, eps2 override the regime; eps2 = 0 gives the layer family.
    """
    e1 = sys.regime.eps1 if eps1 is None else eps1
    if not e1 > 0:
        raise DomainError("eps1 must be positive for the return map")
    f = field_callable(sys, e1, eps2)
    target = theta0 + 1.0
    ev = EventSpec(lambda t, x: x[1] - target, RISING, True)
    res = integrate_to_event(f, [r, theta0, y], [ev], cfg, t_max=2.0 / e1)
    return float(res.state[0]), float(res.state[2])


@dataclass(frozen=True)
class FoldCertificate:
    P_r: float
    dPr_dr: float
    d2Pr_dr2: float
    dPr_dy: float
    slow_integral: float

    def passes(self, value_tol: float = 1e-8, slope_tol: float = 1e-5) -> bool:
        return (abs(self.P_r) <= value_tol and abs(self.dPr_dr - 1.0) <= slope_tol
                and self.d2Pr_dr2 != 0.0 and self.dPr_dy != 0.0 and self.slow_integral != 0.0)


def fold_certificate(sys: PrototypicalSystem, eps1: float, h: float = 1e-4,
                     theta0: float = 0.0, n_quad: int = 256) -> FoldCertificate:
    """Finite-difference fold data of the layer return map at (r, y) = (0, 0).

    P_r denotes the r-component of the full return map, so a fold of cycles
    has P_r = 0 and ∂P_r/∂r = 1. Derivatives use central differences with one
    Richardson step.
    """
    def pr(r, y):
        return poincare_map(sys, r, y, eps1, 0.0, theta0)[0]

    p0 = pr(0.0, 0.0)

    def d_r(k):
        return (pr(k, 0.0) - pr(-k, 0.0)) / (2 * k)

    def d_rr(k):
        return (pr(k, 0.0) - 2 * p0 + pr(-k, 0.0)) / (k * k)

    def d_y(k):
        return (pr(0.0, k) - pr(0.0, -k)) / (2 * k)

    def rich(d):
        return (4.0 * d(h / 2) - d(h)) / 3.0

    # slow integral along the layer orbit through the fold
    f = field_callable(sys, eps1, 0.0)
    target = theta0 + 1.0
    ev = EventSpec(lambda t, x: x[1] - target, RISING, True)
    res = integrate_to_event(f, [0.0, theta0, 0.0], [ev],
                             IntegratorConfig(rtol=1e-12, atol=1e-14), t_max=2.0 / eps1, dense=True)
    thetas = theta0 + np.arange(n_quad) / n_quad
    vals = []
    for th in thetas:
        x = res.trajectory.dense((th - theta0) / eps1)
        v = -sys.c(th)
        if sys.rem_y.terms:
            v += sys.rem_y(x[0], th, x[2], sys.regime.eps)
        vals.append(v)
    return FoldCertificate(p0, rich(d_r), rich(d_rr), rich(d_y), float(np.mean(vals)))


def _run_jobs(fn, tasks, jobs: int | None):
    if jobs is None or jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    # the compiled kernel releases the GIL, so threads run in parallel
    with ThreadPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, tasks))


def transition_scan(sys: PrototypicalSystem, eps_list, entry_r: float | None = None,
                    theta0: float = 0.0, section: SectionSpec = SectionSpec(),
                    cfg: IntegratorConfig = IntegratorConfig(), contraction: bool = True,
                    jobs: int | None = None, alpha: int | None = None) -> list[TransitionRecord]:
    """transition_map for each ε, results ordered as eps_list."""
    r0 = section.midpoint if entry_r is None else entry_r

    def one(eps):
        s = sys.with_regime(alpha=alpha, eps=eps)
        return transition_map(s, entry_state(section, r0, theta0), section, cfg, contraction)

    return _run_jobs(one, list(eps_list), jobs)


def contraction_exponent_scan(sys: PrototypicalSystem, eps_list, entry_r: float | None = None,
                              section: SectionSpec = SectionSpec(),
                              cfg: IntegratorConfig = IntegratorConfig(),
                              jobs: int | None = None) -> list[tuple[float, float]]:
    recs = transition_scan(sys, eps_list, entry_r, 0.0, section, cfg, True, jobs)
    return [(float(e), rec.log_contraction_y) for e, rec in zip(eps_list, recs)]


def fit_kappa(scan: list[tuple[float, float]]) -> tuple[float, float, float]:
    """Least-squares line log_contraction ≈ intercept − κ ε⁻³.

    Returns (κ, intercept, r²).
    """
    x = np.array([e ** -3 for e, _ in scan])
    y = np.array([v for _, v in scan])
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + icpt)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(-slope), float(icpt), r2
