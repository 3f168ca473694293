"""Tipping toy model with periodic forcing in the fast equation:
z' = a − z², θ' = ε^α, a' = −2π ε^α 𝒜 cos 2πθ − ε³ν."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError, NoBracket, NoEvent, StepUnderflow
from ..integrator import FALLING, RISING, EventSpec, IntegratorConfig, integrate, integrate_to_event
from ..model import ScalingRegime
from ..special import brent_root

TWO_PI = 2.0 * math.pi

REGULAR_JUMP = "regular jump"
CANARD_ADJACENT = "canard-adjacent, unclassified"
EXTERIOR = "exterior, recirculating"


@dataclass(frozen=True)
class TippingSpec:
    amplitude: float = 0.5
    nu: float = 1.0
    regime: ScalingRegime = field(default_factory=lambda: ScalingRegime(2, 0.01))
    R: float = 0.3
    rho: float = 0.5

    def __post_init__(self):
        if not self.amplitude > 0:
            raise DomainError("amplitude must be positive")
        if not self.nu > 0:
            raise DomainError("nu must be positive")
        if not (self.R > 0 and self.R ** 2 < 2 * self.amplitude):
            raise DomainError("need 0 < R and R² < 2·amplitude")
        if not self.rho ** 2 > self.R ** 2:
            raise DomainError("need rho² > R²")

    def with_regime(self, alpha: int | None = None, eps: float | None = None) -> "TippingSpec":
        reg = ScalingRegime(self.regime.alpha if alpha is None else alpha,
                            self.regime.eps if eps is None else eps)
        return TippingSpec(self.amplitude, self.nu, reg, self.R, self.rho)


def tipping_field(spec: TippingSpec):
    A, nu = spec.amplitude, spec.nu
    e1, e2 = spec.regime.eps1, spec.regime.eps2

    def f(t, x):
        z, th, a = x[0], x[1], x[2]
        return np.array([a - z * z, e1, -TWO_PI * e1 * A * math.cos(TWO_PI * th) - e2 * nu])

    return f


def tipping_hamiltonian(z, theta, amplitude: float):
    """Conserved quantity of the desingularized reduced flow."""
    return 0.5 * amplitude * np.sin(TWO_PI * np.asarray(theta)) + 0.5 * np.asarray(z) ** 2


def desingularized_reduced_field(amplitude: float):
    """ż = −π𝒜 cos 2πθ, θ̇ = z."""
    def f(t, x):
        return np.array([-math.pi * amplitude * math.cos(TWO_PI * x[1]), x[0]])

    return f


def hamiltonian_drift(z0: float, theta0: float, amplitude: float, t_end: float,
                      cfg: IntegratorConfig = IntegratorConfig(rtol=1e-12, atol=1e-14)) -> float:
    """max |H − H(0)| along a desingularized reduced orbit."""
    traj = integrate(desingularized_reduced_field(amplitude), [z0, theta0], t_end, cfg)
    H = tipping_hamiltonian(traj.states[:, 0], traj.states[:, 1], amplitude)
    return float(np.max(np.abs(H - H[0])))


@dataclass(frozen=True)
class FoldedSingularity:
    z: float
    theta: float
    eigenvalues: tuple[complex, complex]
    kind: str


def _classify(ev) -> str:
    re = np.real(ev)
    im = np.imag(ev)
    scale = max(1.0, float(np.max(np.abs(ev))))
    if np.all(np.abs(im) <= 1e-12 * scale) and re.min() < 0 < re.max():
        return "saddle"
    if np.all(np.abs(re) <= 1e-12 * scale) and np.all(np.abs(im) > 0):
        return "center"
    return "other"


def tipping_folded_singularities(amplitude: float) -> tuple[FoldedSingularity, FoldedSingularity]:
    """Equilibria of the desingularized reduced flow on the fold, (saddle, center)."""
    if not amplitude > 0:
        raise DomainError("amplitude must be positive")
    out = []
    for th in (0.25, 0.75):
        # ∂(ż, θ̇)/∂(z, θ) at z = 0
        J = np.array([[0.0, 2.0 * math.pi ** 2 * amplitude * math.sin(TWO_PI * th)], [1.0, 0.0]])
        ev = np.linalg.eigvals(J.astype(complex))
        out.append(FoldedSingularity(0.0, th, (complex(ev[0]), complex(ev[1])), _classify(ev)))
    return out[0], out[1]


def canard_angles(R: float, amplitude: float) -> tuple[float, float]:
    """(θ_l, θ_r) where the entry circle meets the singular canard cycle."""
    s = 1.0 - R * R / amplitude
    if not -1.0 < s <= 1.0:
        raise DomainError("need R² < 2·amplitude")
    base = math.asin(s) / TWO_PI
    return 0.5 - base, base % 1.0


def in_interior(theta: float, R: float, amplitude: float) -> bool:
    """θ inside 𝓘, the arc between θ_l and θ_r enclosed by the canard cycle."""
    return math.sin(TWO_PI * theta) < 1.0 - R * R / amplitude


def in_core(theta: float, R: float, amplitude: float, margin: float = 0.02) -> bool:
    """θ in the closed sub-interval of 𝓘 shrunk by margin at both ends."""
    lo, hi = canard_angles(R, amplitude)
    u = (theta - lo) % 1.0
    width = (hi - lo) % 1.0
    return margin <= u <= width - margin


def tipping_theta_e(theta: float, R: float, amplitude: float) -> float:
    """Jump angle on the fold reached from (R, θ) along the reduced flow, in (3/4,1)∪[0,1/4)."""
    if R * R >= 2 * amplitude:
        raise DomainError("need R² < 2·amplitude")
    arg = math.sin(TWO_PI * theta) + R * R / amplitude
    if not -1.0 <= arg <= 1.0:
        raise DomainError(f"arcsin argument {arg:.6g} outside [-1, 1]")
    if not in_interior(theta, R, amplitude):
        raise DomainError(f"theta={theta:g} is outside the interior arc")
    v = math.asin(arg) / TWO_PI
    if v < 0:
        v += 1.0
    # a tiny negative v rounds up to 1.0
    return 0.0 if v >= 1.0 else v


def transit_residual(T, theta, amplitude, nu, R, rho, regime: ScalingRegime):
    """ρ² + 𝒜 sin 2πθ − R² − ε³νT − 𝒜 sin 2π(θ + ε^α T); zero when a(T) = R²."""
    e1, e2 = regime.eps1, regime.eps2
    return (rho ** 2 + amplitude * np.sin(TWO_PI * theta) - R ** 2
            - e2 * nu * T - amplitude * np.sin(TWO_PI * (theta + e1 * T)))


def transit_time(theta: float, amplitude: float, nu: float, R: float, rho: float,
                 regime: ScalingRegime, horizon: float | None = None, tol: float = 1e-10) -> float:
    """Minimal positive root of the transit equation: scan for the first sign
    change, then Brent. Accepts amplitude = 0."""
    e1, e2 = regime.eps1, regime.eps2
    if horizon is None:
        horizon = 1.01 * (rho ** 2 - R ** 2 + 2 * amplitude) / (e2 * nu)

    def g(T):
        return transit_residual(T, theta, amplitude, nu, R, rho, regime)

    dt = min(1.0 / e1, 1.0 / e2) / 1024.0
    chunk = 65536
    t0 = 0.0
    g_prev = float(g(0.0))
    while t0 < horizon:
        ts = t0 + dt * np.arange(1, chunk + 1)
        ts = ts[ts <= horizon]
        if ts.size == 0:
            break
        gs = g(ts)
        prev = np.concatenate(([g_prev], gs[:-1]))
        idx = np.nonzero((prev > 0) & (gs <= 0))[0]
        if idx.size:
            i = int(idx[0])
            return brent_root(lambda T: float(g(T)), float(ts[i] - dt), float(ts[i]), tol=tol)
        g_prev = float(gs[-1])
        t0 = float(ts[-1])
    raise NoBracket(f"no sign change of the transit equation below T={horizon:g}")


def tipping_transit_time(theta: float, spec: TippingSpec, horizon: float | None = None,
                         tol: float = 1e-10) -> float:
    """Minimal positive T with a(T) = R² when starting at a = ρ², angle θ."""
    return transit_time(theta, spec.amplitude, spec.nu, spec.R, spec.rho, spec.regime, horizon, tol)


@dataclass(frozen=True)
class TippingJump:
    theta0: float
    classification: str
    theta_exit: float
    a_exit: float
    transit_time: float
    theta_e: float | None

    @property
    def theta_error(self) -> float | None:
        """Circular distance |θ_sim − θ_e| mod 1."""
        if self.theta_e is None:
            return None
        d = (self.theta_exit - self.theta_e) % 1.0
        return min(d, 1.0 - d)


def classify_entry(theta: float, R: float, amplitude: float, margin: float = 0.02) -> str:
    if in_core(theta, R, amplitude, margin):
        return REGULAR_JUMP
    if in_interior(theta, R, amplitude) or math.isclose(
            math.sin(TWO_PI * theta), 1.0 - R * R / amplitude, abs_tol=1e-12):
        return CANARD_ADJACENT
    return EXTERIOR


def tipping_simulate(spec: TippingSpec, theta0: float, z0: float | None = None,
                     t_max: float | None = None, margin: float = 0.02,
                     cfg: IntegratorConfig = IntegratorConfig(rtol=1e-10, atol=1e-12)) -> TippingJump:
    """Integrate from (z0, θ0, R²) until z = −R.

    Raises NoEvent when no exit happens within t_max (default three forcing periods).
    """
    alpha = spec.regime.alpha
    z0 = spec.R if z0 is None else z0
    kind = classify_entry(theta0, spec.R, spec.amplitude, margin)
    e1 = spec.regime.eps1
    if t_max is None:
        t_max = 3.0 / e1
    ev = EventSpec(lambda t, x: x[0] + spec.R, FALLING, True)
    res = integrate_to_event(tipping_field(spec), [z0, theta0, spec.R ** 2], [ev], cfg,
                             t_max=t_max)
    th_e = None
    if alpha in (1, 2) and kind == REGULAR_JUMP:
        th_e = tipping_theta_e(theta0, spec.R, spec.amplitude)
    return TippingJump(float(theta0), kind, float(res.state[1]) % 1.0, float(res.state[2]),
                       float(res.t), th_e)


def reduced_return(z0: float, theta0: float, amplitude: float,
                   cfg: IntegratorConfig = IntegratorConfig(rtol=1e-12, atol=1e-14)) -> float:
    """z after one revolution of the reduced flow ż = −π𝒜 cos(2πθ)/z, θ̇ = 1.

    Raises NoEvent if the orbit reaches the fold z = 0 first.
    """
    def f(t, x):
        return np.array([-math.pi * amplitude * math.cos(TWO_PI * x[1]) / x[0], 1.0])

    sign = 1.0 if z0 > 0 else -1.0
    fold = EventSpec(lambda t, x: sign * x[0] - 1e-4, FALLING, True)
    turn = EventSpec(lambda t, x: x[1] - (theta0 + 1.0), RISING, True)
    try:
        res = integrate_to_event(f, [z0, theta0], [fold, turn], cfg, t_max=2.0)
    except StepUnderflow as exc:
        # the field blows up like 1/z at the fold
        raise NoEvent(f"reduced orbit reaches the fold before completing a revolution ({exc})") from exc
    if res.index == 0:
        raise NoEvent("reduced orbit reaches the fold before completing a revolution")
    return float(res.state[0])


def reaches_fold_both_ways(z0: float, theta0: float, amplitude: float,
                           cfg: IntegratorConfig = IntegratorConfig(rtol=1e-12, atol=1e-14)) -> bool:
    """Whether the desingularized orbit through (z0, θ0) meets z = 0 forward and backward."""
    fwd = desingularized_reduced_field(amplitude)

    def bwd(t, x):
        return -fwd(t, x)

    sign = 1.0 if z0 > 0 else -1.0
    ev = EventSpec(lambda t, x: sign * x[0], FALLING, True)
    horizon = 20.0 / math.sqrt(amplitude)
    for field in (fwd, bwd):
        try:
            integrate_to_event(field, [z0, theta0], [ev], cfg, t_max=horizon)
        except NoEvent:
            return False
    return True
