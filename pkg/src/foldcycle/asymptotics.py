"""Leading-order predictions for the exit point and rotation count, the reduced
flow for the α = 3 exit angle, and power-law fitting."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, NoConvergence, NoEvent
from .integrator import EventSpec, IntegratorConfig, RISING, integrate, integrate_to_event
from .periodic import PeriodicFn
from .special import omega0_value

# error-order tags per (quantity, alpha class)
Y_ORDER = {1: "O(eps^2)", 2: "eps^3 ln eps"}
THETA_ORDER = {1: "ln eps", 2: "eps ln eps", 3: "eps^3 ln eps", 4: "eps^3 ln eps"}

PSI_SWITCH = 1e-4


@dataclass(frozen=True)
class AsymptoticPrediction:
    alpha: int
    quantity: str
    leading: float | None
    error_order: str


@dataclass(frozen=True)
class NRotPrediction:
    value: int
    increment: float
    slack: float

    def contains(self, n: int) -> bool:
        return abs(n - self.value) <= self.slack


@dataclass(frozen=True)
class PowerLawFit:
    slope: float
    intercept: float
    r_squared: float
    n: int

    @property
    def prefactor(self) -> float:
        return math.exp(self.intercept)


def _as_fn(v) -> PeriodicFn:
    return v if isinstance(v, PeriodicFn) else PeriodicFn.constant(float(v))


def mean_c(c: PeriodicFn) -> float:
    """Integral of c over one period; harmonics integrate to zero."""
    return c.mean


def exit_y_coefficient(theta: float, a, b, c) -> float:
    """(c²/(ab))^{1/3} at θ."""
    a, b, c = _as_fn(a), _as_fn(b), _as_fn(c)
    return (c(theta) ** 2 / (a(theta) * b(theta))) ** (1.0 / 3.0)


def predict_exit_y(alpha: int, theta_exit: float, eps: float, a, b, c) -> AsymptoticPrediction:
    if alpha == 1:
        return AsymptoticPrediction(1, "exit_y", None, Y_ORDER[1])
    lead = -exit_y_coefficient(theta_exit, a, b, c) * omega0_value() * eps ** 2
    return AsymptoticPrediction(alpha, "exit_y", lead, Y_ORDER[2])


def predict_exit_theta(alpha: int, entry_r: float, theta: float, eps: float, R: float,
                       sys) -> AsymptoticPrediction:
    """Lifted exit angle at leading order. entry_r does not enter at this order."""
    c0 = mean_c(sys.c)
    if alpha == 1:
        lead = theta + R ** 2 / (c0 * eps ** 2)
    elif alpha == 2:
        lead = theta + R ** 2 / (c0 * eps)
    elif alpha == 3:
        lead = reduced_flow_psi(sys, R, theta)
    else:
        lead = theta
    return AsymptoticPrediction(alpha, "exit_theta_lifted", lead, THETA_ORDER[min(alpha, 4)])


def psi_printed(sys, R: float, theta: float) -> float:
    """θ + b/(ac)·R², the closed form printed alongside the theorem."""
    return theta + sys.b(theta) / (sys.a(theta) * sys.c(theta)) * R ** 2


def reduced_flow_psi(sys, R: float, theta: float,
                     cfg: IntegratorConfig = IntegratorConfig(rtol=1e-12, atol=1e-15)) -> float:
    """Lifted angle at which the leading-order reduced flow reaches r = 0.

    Integrates dr/dθ = −a c / (2 b r) from r = −R√(a/b) at θ; below
    |r| = PSI_SWITCH the roles swap to dθ/dr = −2 b r / (a c).
    """
    if R <= 0:
        return float(theta)
    a, b, c = sys.a, sys.b, sys.c
    r0 = -R * math.sqrt(a(theta) / b(theta))
    th = float(theta)
    if r0 < -PSI_SWITCH:
        def f(t, x):
            return np.array([-a(t) * c(t) / (2.0 * b(t) * x[0])])
        ev = EventSpec(lambda t, x: x[0] + PSI_SWITCH, RISING, True)
        c_min, _ = c.sampled_extrema()
        horizon = 10.0 * R * R / max(c_min, 1e-300) * max(1.0, b.sampled_extrema()[1] / a.sampled_extrema()[0])
        try:
            res = integrate_to_event(f, [r0], [ev], cfg, t0=th, t_max=th + horizon)
        except NoEvent as exc:
            raise NoConvergence(f"reduced flow did not approach r = 0: {exc}") from exc
        th = res.t
        r0 = -PSI_SWITCH

    def g(r, x):
        t = x[0]
        return np.array([-2.0 * b(t) * r / (a(t) * c(t))])

    traj = integrate(g, [th], 0.0, cfg, t0=r0)
    return float(traj.states[-1][0])


def predict_n_rot(alpha: int, theta: float, eps: float, R: float, sys) -> NRotPrediction:
    """Floor of the leading-order angle increment, with an explicit slack."""
    p = predict_exit_theta(alpha, 0.0, theta, eps, R, sys)
    inc = p.leading - theta
    if alpha == 1:
        slack = max(10.0, 0.1 * inc)
    elif alpha == 2:
        slack = max(1.0, abs(eps * math.log(eps)) * inc)
    elif alpha == 3:
        slack = 1.0
    else:
        inc = 0.0
        slack = 0.0
    return NRotPrediction(int(math.floor(inc)), inc, slack)


def fit_power_law(pairs) -> PowerLawFit:
    """Least squares of ln|value| against ln ε."""
    pairs = list(pairs)
    if len(pairs) < 4:
        raise DegenerateInput(f"need at least 4 points, got {len(pairs)}")
    e = np.array([p[0] for p in pairs], dtype=float)
    v = np.array([p[1] for p in pairs], dtype=float)
    if np.any(e <= 0):
        raise DegenerateInput("eps values must be positive")
    if np.any(v == 0) or not (np.all(v > 0) or np.all(v < 0)):
        raise DegenerateInput("values must be non-zero and share one sign")
    if np.unique(e).size < 2:
        raise DegenerateInput("need at least two distinct eps values")
    x = np.log(e)
    y = np.log(np.abs(v))
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + icpt)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return PowerLawFit(float(slope), float(icpt), min(max(r2, 0.0), 1.0), len(pairs))


def fixed_slope_prefactor(pairs, slope: float) -> float:
    """Geometric-mean prefactor C of |value| ≈ C ε^slope with the slope held fixed."""
    logs = [math.log(abs(v)) - slope * math.log(e) for e, v in pairs]
    return math.exp(sum(logs) / len(logs))
