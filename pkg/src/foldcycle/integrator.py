"""Dormand–Prince 5(4) integration with dense output, events and variational
equations, for arbitrary fields f(t, x)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import MaxSteps, NoEvent, StepUnderflow
from .special import brent_root

Field = Callable[[float, np.ndarray], np.ndarray]

RISING, FALLING, ANY = 1, -1, 0

# Butcher tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
A71, A73, A74, A75, A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# error coefficients (5th minus 4th order weights)
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40
# continuous extension
D1 = -12715105075 / 11282082432
D3 = 87487479700 / 32700410799
D4 = -10690763975 / 1880347072
D5 = 701980252875 / 199316789632
D6 = -1453857185 / 822651844
D7 = 69997945 / 29380423

SAFETY = 0.9
FAC_MIN = 0.2
FAC_MAX = 5.0
BETA = 0.04  # step-size stabilisation


@dataclass(frozen=True)
class IntegratorConfig:
    rtol: float = 1e-10
    atol: float = 1e-12
    h_init: float | None = None
    h_min: float = 1e-13
    h_max: float = math.inf
    max_steps: int = 50_000_000

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ValueError("tolerances must be positive")
        if not self.h_min < self.h_max:
            raise ValueError("h_min must be smaller than h_max")


@dataclass(frozen=True)
class EventSpec:
    """Guard g(t, x); a crossing is g changing sign in the given direction."""

    guard: Callable[[float, np.ndarray], float]
    direction: int = ANY
    terminal: bool = True


@dataclass
class DenseSegment:
    """Quartic continuous extension of one accepted step."""

    t0: float
    h: float
    rcont: np.ndarray  # shape (5, n)

    def at_fraction(self, s: float) -> np.ndarray:
        r = self.rcont
        s1 = 1.0 - s
        return r[0] + s * (r[1] + s1 * (r[2] + s * (r[3] + s1 * r[4])))

    def __call__(self, t: float) -> np.ndarray:
        return self.at_fraction((t - self.t0) / self.h)

    @property
    def t1(self) -> float:
        return self.t0 + self.h


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    errors: np.ndarray
    n_accepted: int
    n_rejected: int
    segments: list[DenseSegment] = field(default_factory=list)
    events: list[tuple[int, float, np.ndarray]] = field(default_factory=list)

    def dense(self, t: float) -> np.ndarray:
        """Evaluate the dense output at time t (requires dense=True)."""
        if not self.segments:
            raise ValueError("trajectory was integrated without dense output")
        lo, hi = 0, len(self.segments) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if self.segments[mid].t1 < t:
                lo = mid + 1
            else:
                hi = mid
        return self.segments[lo](t)

    def to_csv_rows(self):
        for t, x in zip(self.times, self.states):
            yield [t, *x]


@dataclass
class EventResult:
    index: int
    t: float
    state: np.ndarray
    trajectory: Trajectory


@dataclass
class VariationalResult:
    index: int
    t: float
    state: np.ndarray
    v_direction: np.ndarray
    v_logmag: float
    trajectory: Trajectory

    @property
    def v(self) -> np.ndarray:
        return self.v_direction * math.exp(self.v_logmag)


def _initial_step(f, t0, x0, f0, cfg: IntegratorConfig) -> float:
    sc = cfg.atol + cfg.rtol * np.abs(x0)
    d0 = float(np.max(np.abs(x0) / sc))
    d1 = float(np.max(np.abs(f0) / sc))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, cfg.h_max)
    x1 = x0 + h0 * f0
    f1 = f(t0 + h0, x1)
    d2 = float(np.max(np.abs(f1 - f0) / sc)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, cfg.h_max)


def _locate(seg: DenseSegment, guard, g0: float, g1: float) -> tuple[float, np.ndarray]:
    def g(s):
        return guard(seg.t0 + s * seg.h, seg.at_fraction(s))
    s = brent_root(g, 0.0, 1.0, tol=1e-12, xtol=0.0)
    return seg.t0 + s * seg.h, seg.at_fraction(s)


def _crossed(g0: float, g1: float, direction: int) -> bool:
    if direction >= 0 and g0 < 0.0 <= g1:
        return True
    if direction <= 0 and g0 > 0.0 >= g1:
        return True
    return False


def _run(f: Field, x0, cfg: IntegratorConfig, t0: float = 0.0, t_end: float = math.inf,
         events: Sequence[EventSpec] = (), post_accept=None, store: bool = True,
         dense: bool = False, initial_events: bool = False, error_dims: int | None = None):
    """Core adaptive loop. Returns (trajectory, terminal event or None, final t, final x)."""
    x = np.array(x0, dtype=float)
    n = x.size
    m = n if error_dims is None else error_dims
    t = float(t0)
    k1 = np.asarray(f(t, x), dtype=float)
    h = cfg.h_init if cfg.h_init is not None else _initial_step(f, t, x, k1, cfg)
    direction_end = t_end
    times, states, errs, segs, evlog = [t], [x.copy()], [0.0], [], []
    gvals = [ev.guard(t, x) for ev in events]

    if initial_events:
        for i, ev in enumerate(events):
            if ev.terminal and abs(gvals[i]) <= 1e-12:
                traj = Trajectory(np.array(times), np.array(states), np.array(errs), 0, 0, segs, evlog)
                return traj, (i, t, x.copy()), t, x

    n_acc = n_rej = 0
    err_old = 1e-4
    last = False
    while True:
        if n_acc + n_rej >= cfg.max_steps:
            raise MaxSteps(f"exceeded {cfg.max_steps} steps at t={t:.6g}")
        if h < cfg.h_min:
            raise StepUnderflow(f"step {h:.3g} below h_min at t={t:.6g}")
        if t + h >= direction_end:
            h = direction_end - t
            last = True
        k2 = f(t + C2 * h, x + h * (A21 * k1))
        k3 = f(t + C3 * h, x + h * (A31 * k1 + A32 * k2))
        k4 = f(t + C4 * h, x + h * (A41 * k1 + A42 * k2 + A43 * k3))
        k5 = f(t + C5 * h, x + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))
        k6 = f(t + h, x + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))
        x_new = x + h * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6)
        k7 = np.asarray(f(t + h, x_new), dtype=float)
        e = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
        sc = cfg.atol + cfg.rtol * np.maximum(np.abs(x[:m]), np.abs(x_new[:m]))
        err = float(np.max(np.abs(e[:m]) / sc))
        if not math.isfinite(err):
            n_rej += 1
            h *= FAC_MIN
            last = False
            continue
        if err <= 1.0:
            n_acc += 1
            rc = None
            if dense or events:
                dx = x_new - x
                r2 = h * k1 - dx
                r3 = dx - h * k7 - r2
                r4 = h * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 + D7 * k7)
                rc = np.vstack([x, dx, r2, r3, r4])
            seg = DenseSegment(t, h, rc) if rc is not None else None
            t_new = t + h
            hit = None
            for i, ev in enumerate(events):
                g1 = ev.guard(t_new, x_new)
                if _crossed(gvals[i], g1, ev.direction):
                    te, xe = _locate(seg, ev.guard, gvals[i], g1)
                    if ev.terminal:
                        if hit is None or te < hit[1]:
                            hit = (i, te, xe)
                    else:
                        evlog.append((i, te, xe))
                gvals[i] = g1
            if dense:
                segs.append(seg)
            if hit is None and post_accept is not None:
                x_new, k7 = post_accept(t_new, x_new, k7)
            if hit is not None:
                if store:
                    times.append(hit[1])
                    states.append(hit[2].copy())
                    errs.append(err)
                traj = Trajectory(np.array(times), np.array(states), np.array(errs), n_acc, n_rej, segs, evlog)
                return traj, hit, hit[1], hit[2]
            t, x, k1 = t_new, x_new, k7
            if store:
                times.append(t)
                states.append(x.copy())
                errs.append(err)
            if last:
                traj = Trajectory(np.array(times), np.array(states), np.array(errs), n_acc, n_rej, segs, evlog)
                return traj, None, t, x
            fac = SAFETY * max(err, 1e-10) ** (-0.2 + 0.75 * BETA) * err_old ** BETA
            err_old = max(err, 1e-4)
            h = min(h * min(FAC_MAX, max(FAC_MIN, fac)), cfg.h_max)
        else:
            n_rej += 1
            last = False
            h *= max(FAC_MIN, SAFETY * err ** -0.2)


def integrate(field: Field, state0, t_end: float, cfg: IntegratorConfig = IntegratorConfig(),
              t0: float = 0.0, dense: bool = False, store: bool = True) -> Trajectory:
    """Integrate from t0 to t_end; the last step is clipped to land on t_end."""
    traj, _, _, _ = _run(field, state0, cfg, t0=t0, t_end=t_end, store=store, dense=dense)
    return traj


def integrate_to_event(field: Field, state0, events: Sequence[EventSpec],
                       cfg: IntegratorConfig = IntegratorConfig(), t0: float = 0.0,
                       t_max: float = math.inf, dense: bool = False, store: bool = True,
                       initial_events: bool = False) -> EventResult:
    """Integrate until the first terminal event; located by Brent on the dense output."""
    if not any(ev.terminal for ev in events):
        raise ValueError("at least one terminal event is required")
    try:
        traj, hit, t, x = _run(field, state0, cfg, t0=t0, t_end=t_max, events=events,
                               store=store, dense=dense, initial_events=initial_events)
    except MaxSteps as exc:
        raise NoEvent(f"no terminal event before the step limit ({exc})") from exc
    if hit is None:
        raise NoEvent(f"no terminal event before t={t_max:g}")
    return EventResult(hit[0], hit[1], hit[2], traj)


def finite_difference_jacobian(field: Field, rel_step: float = 1e-7):
    def jac(t, x):
        x = np.asarray(x, dtype=float)
        n = x.size
        J = np.empty((n, n))
        for j in range(n):
            hj = rel_step * max(1.0, abs(x[j]))
            xp = x.copy()
            xm = x.copy()
            xp[j] += hj
            xm[j] -= hj
            J[:, j] = (np.asarray(field(t, xp)) - np.asarray(field(t, xm))) / (2 * hj)
        return J
    return jac


def integrate_variational(field: Field, dfield_dstate, state0, v0, events: Sequence[EventSpec],
                          cfg: IntegratorConfig = IntegratorConfig(), t0: float = 0.0,
                          t_max: float = math.inf, renormalize: bool = True,
                          dense: bool = False) -> VariationalResult:
    """Integrate s' = f(s), v' = J(s) v to the first terminal event.

    v is carried as a unit direction plus log-magnitude and rescaled after every
    accepted step, so exponentially small sensitivities never underflow. With no
    events, integrates to t_max.
    """
    x0 = np.asarray(state0, dtype=float)
    n = x0.size
    jac = dfield_dstate if dfield_dstate is not None else finite_difference_jacobian(field)
    v0 = np.asarray(v0, dtype=float)
    nv = float(np.linalg.norm(v0))
    if nv == 0:
        raise ValueError("v0 must be non-zero")
    logmag = [math.log(nv)]

    def aug(t, z):
        s = z[:n]
        return np.concatenate([np.asarray(field(t, s), dtype=float), jac(t, s) @ z[n:]])

    def post(t, z, kz):
        if not renormalize:
            return z, kz
        w = z[n:]
        nw = float(np.linalg.norm(w))
        if nw == 0.0 or not math.isfinite(nw):
            return z, kz
        logmag[0] += math.log(nw)
        z = z.copy()
        kz = kz.copy()
        z[n:] /= nw
        kz[n:] /= nw
        return z, kz

    z0 = np.concatenate([x0, v0 / nv])
    wrapped = [EventSpec(lambda t, z, g=ev.guard: g(t, z[:n]), ev.direction, ev.terminal)
               for ev in events]
    try:
        traj, hit, t, z = _run(aug, z0, cfg, t0=t0, t_end=t_max, events=wrapped,
                               post_accept=post, dense=dense)
    except MaxSteps as exc:
        if events:
            raise NoEvent(str(exc)) from exc
        raise
    if hit is None:
        if events:
            raise NoEvent(f"no terminal event before t={t_max:g}")
        idx = -1
    else:
        idx, t, z = hit
    w = z[n:]
    nw = float(np.linalg.norm(w))
    return VariationalResult(idx, t, z[:n], w / nw, logmag[0] + math.log(nw), traj)
