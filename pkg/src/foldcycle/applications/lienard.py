"""Periodically forced Liénard oscillators x'' + μ f(x) x' + g(x) = A(ωt) in the
fold-cycle scaling, mapped onto the prototypical system."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial

from ..asymptotics import PowerLawFit, fit_power_law
from ..errors import AssumptionViolated, NoConvergence
from ..integrator import IntegratorConfig
from ..model import (FAST, SLOW, GeneralSystem, Monomial, PrototypicalSystem, RemainderSpec,
                     ScalingRegime, SectionSpec)
from ..periodic import PeriodicFn
from ..special import brent_root, omega0_value
from ..transition import TransitionRecord, entry_state, transition_map

ROOT_SCAN_POINTS = 4096


@dataclass(frozen=True)
class LienardSpec:
    """f, g as ascending polynomial coefficients; A the periodic forcing."""

    f: tuple[float, ...]
    g: tuple[float, ...]
    A: PeriodicFn
    vartheta: float = 1.0
    regime: ScalingRegime = field(default_factory=lambda: ScalingRegime(2, 0.01))

    def __post_init__(self):
        object.__setattr__(self, "f", tuple(float(v) for v in self.f))
        object.__setattr__(self, "g", tuple(float(v) for v in self.g))
        if not self.vartheta > 0:
            raise AssumptionViolated("vartheta must be positive")

    @property
    def friction(self) -> Polynomial:
        return Polynomial(self.f)

    @property
    def restoring(self) -> Polynomial:
        return Polynomial(self.g)

    @property
    def K(self) -> Polynomial:
        """K(x) = −∫₀ˣ f."""
        return -self.friction.integ()


@dataclass(frozen=True)
class LienardBuild:
    system: PrototypicalSystem
    x_F: float
    K2: float
    c: PeriodicFn

    def exit_y_coefficient(self, theta: float, spec: LienardSpec) -> float:
        """(2 (g(x_F) − A(θ))² / K″(x_F))^{1/3}, the ε²Ω₀ prefactor magnitude."""
        gap = spec.restoring(self.x_F) - spec.A(theta)
        return (2.0 * gap * gap / self.K2) ** (1.0 / 3.0)


def _cauchy_bound(p: Polynomial) -> float:
    c = np.trim_zeros(p.coef, "b")
    if c.size <= 1:
        return 1.0
    return 1.0 + float(np.max(np.abs(c[:-1] / c[-1])))


def fold_candidates(spec: LienardSpec) -> list[float]:
    """Zeros of f with −f′ > 0, found by sign-change scanning and Brent refinement."""
    f = spec.friction
    df = f.deriv()
    B = _cauchy_bound(f)
    xs = np.linspace(-B, B, ROOT_SCAN_POINTS + 1)
    vals = f(xs)
    roots = []
    for i in range(ROOT_SCAN_POINTS):
        if vals[i] == 0.0:
            roots.append(float(xs[i]))
        elif vals[i] * vals[i + 1] < 0:
            roots.append(brent_root(lambda x: float(f(x)), float(xs[i]), float(xs[i + 1]), tol=1e-15))
    return [x for x in roots if -df(x) > 0]


def lienard_build(spec: LienardSpec, n_theta: int = 4096) -> LienardBuild:
    """Prototype coefficients a ≡ 1/ϑ, b ≡ K″(x_F)/(2ϑ), c = (A − g(x_F))/ϑ.

    The higher Taylor terms of K and g at x_F become polynomial remainders,
    so the returned system is the full Liénard field, not a truncation.
    """
    g = spec.restoring
    K = spec.K
    th = np.arange(n_theta) / n_theta
    A_max = float(np.max(spec.A(th)))
    chosen = None
    for x in fold_candidates(spec):
        if g(x) - A_max < 0:
            chosen = x
            break
    if chosen is None:
        raise AssumptionViolated("no zero of f with -f' > 0 and g(x_F) < A(theta) for all theta")
    vt = spec.vartheta
    K2 = float(K.deriv(2)(chosen))
    a = PeriodicFn.constant(1.0 / vt)
    b = PeriodicFn.constant(0.5 * K2 / vt)
    c = spec.A.scaled(1.0 / vt, -float(g(chosen)) / vt)

    fast_terms = []
    for k in range(3, K.degree() + 1):
        coef = float(K.deriv(k)(chosen)) / math.factorial(k) / vt
        if coef != 0.0:
            fast_terms.append(Monomial(PeriodicFn.constant(coef), p=k))
    slow_terms = []
    for k in range(1, g.degree() + 1):
        coef = float(g.deriv(k)(chosen)) / math.factorial(k) / vt
        if coef != 0.0:
            slow_terms.append(Monomial(PeriodicFn.constant(coef), p=k))
    sys = PrototypicalSystem(a, b, c, spec.regime, RemainderSpec(tuple(fast_terms), FAST),
                             RemainderSpec(tuple(slow_terms), SLOW))
    return LienardBuild(sys, float(chosen), K2, c)


def lienard_field(spec: LienardSpec):
    """Right-hand side in the original (x, θ, y) coordinates after the Liénard
    transformation and fold-cycle scaling."""
    K = spec.K
    g = spec.restoring
    vt = spec.vartheta
    e1, e2 = spec.regime.eps1, spec.regime.eps2

    def f(t, z):
        x, th, y = z[0], z[1], z[2]
        return np.array([(-y + K(x)) / vt, e1, e2 * (g(x) - spec.A(th)) / vt])

    return f


def lienard_general(spec: LienardSpec, x_F: float) -> GeneralSystem:
    """The translated Liénard field as F, H callables, for extract_prototype."""
    K = spec.K
    g = spec.restoring
    vt = spec.vartheta
    KF = float(K(x_F))

    def F(r, th, y, e1, e2):
        return float(-y + K(x_F + r) - KF) / vt

    def H(r, th, y, e1, e2):
        return float(g(x_F + r) - spec.A(th)) / vt

    return GeneralSystem(F, H)


@dataclass(frozen=True)
class LienardPoint:
    eps: float
    entry_theta: float
    record: TransitionRecord
    predicted_y: float

    @property
    def ratio(self) -> float:
        return self.record.exit.y / self.predicted_y


@dataclass(frozen=True)
class LienardReport:
    x_F: float
    K2: float
    points: tuple[LienardPoint, ...]
    fit: PowerLawFit | None


def _wrap(d: float) -> float:
    return d - math.floor(d + 0.5)


def shoot_entry_angle(sys: PrototypicalSystem, entry_r: float, target: float, section: SectionSpec,
                      cfg: IntegratorConfig, guess: float, tol: float = 1e-6,
                      max_iter: int = 30) -> tuple[float, TransitionRecord]:
    """Secant iteration on the entry angle so that the exit angle is target mod 1."""
    def run(th):
        rec = transition_map(sys, entry_state(section, entry_r, th), section, cfg, contraction=False)
        return rec, _wrap(rec.exit.theta_lifted - target)

    t0 = guess
    r0, d0 = run(t0)
    t1 = t0 - d0
    r1, d1 = run(t1)
    for _ in range(max_iter):
        if abs(d1) <= tol:
            return t1, r1
        slope = (d1 - d0) / (t1 - t0) if t1 != t0 else 1.0
        if not 0.2 < slope < 5.0:
            slope = 1.0
        t0, d0 = t1, d1
        t1 = t1 - d1 / slope
        r1, d1 = run(t1)
    if abs(d1) <= tol:
        return t1, r1
    raise NoConvergence(f"entry-angle shooting stalled at exit offset {d1:.3g}")


def lienard_verify(spec: LienardSpec, eps_list, entry_r: float | None = None,
                   section: SectionSpec = SectionSpec(), target_exit_theta: float | None = 0.25,
                   entry_theta: float = 0.0, cfg: IntegratorConfig = IntegratorConfig()) -> LienardReport:
    """Transition maps of the full Liénard field against the leading-order exit drift.

    With ``target_exit_theta`` set, the entry angle is chosen per ε so that
    every run exits at the same angle and the prefactor is comparable across ε.
    """
    build = lienard_build(spec)
    r0 = section.midpoint if entry_r is None else entry_r
    w0 = omega0_value()
    pts = []
    for eps in eps_list:
        sys = build.system.with_regime(eps=eps)
        if target_exit_theta is None:
            th = entry_theta
            rec = transition_map(sys, entry_state(section, r0, th), section, cfg, contraction=False)
        else:
            guess = target_exit_theta - _wrap(section.R ** 2 / (sys.c.mean * eps ** (sys.regime.alpha - 1)))
            if sys.regime.alpha >= 3:
                guess = target_exit_theta
            th, rec = shoot_entry_angle(sys, r0, target_exit_theta, section, cfg, guess)
        pred = -build.exit_y_coefficient(rec.exit.theta, spec) * w0 * eps ** 2
        pts.append(LienardPoint(float(eps), th, rec, pred))
    fit = None
    if len(pts) >= 4:
        fit = fit_power_law([(p.eps, p.record.exit.y) for p in pts])
    return LienardReport(build.x_F, build.K2, tuple(pts), fit)


def van_der_pol(alpha: int = 2, eps: float = 0.01, amplitude: float = 0.5) -> LienardSpec:
    """f(x) = x² − 1, g(x) = x, A(θ) = amplitude·sin 2πθ, ϑ = 1."""
    return LienardSpec((-1.0, 0.0, 1.0), (0.0, 1.0), PeriodicFn(0.0, ((1, 0.0, amplitude),)),
                       1.0, ScalingRegime(alpha, eps))
