"""System definitions: the prototypical three time-scale field, sections, and
normal-form extraction from a general (F, H) system."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import AssumptionViolated, DomainError, NoConvergence
from .periodic import PeriodicFn, pack_functions

FAST = "fast"
SLOW = "slow"


@dataclass(frozen=True)
class ScalingRegime:
    """Exponent α and small parameter ε; ε₁ = ε^α and ε₂ = ε³ are derived."""

    alpha: int
    eps: float

    def __post_init__(self):
        if int(self.alpha) != self.alpha or self.alpha < 1:
            raise DomainError(f"alpha must be a positive integer, got {self.alpha}")
        if not self.eps > 0:
            raise DomainError(f"eps must be positive, got {self.eps}")
        object.__setattr__(self, "alpha", int(self.alpha))
        object.__setattr__(self, "eps", float(self.eps))

    @property
    def eps1(self) -> float:
        return self.eps ** self.alpha

    @property
    def eps2(self) -> float:
        return self.eps ** 3


@dataclass(frozen=True)
class Monomial:
    """m(θ)·r^p·y^q·ε^s."""

    coef: PeriodicFn
    p: int = 0
    q: int = 0
    s: float = 0.0

    def __post_init__(self):
        if self.p < 0 or self.q < 0 or self.s < 0:
            raise DomainError("monomial exponents must be non-negative")
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "q", int(self.q))
        object.__setattr__(self, "s", float(self.s))


def admissible_fast(p: int, q: int, s: float, alpha: int) -> bool:
    """Order class O(r³, y², ry, ε^α r², ε^α y, ε³)."""
    return (p >= 3 or q >= 2 or (p >= 1 and q >= 1)
            or (s >= alpha and p >= 2) or (s >= alpha and q >= 1) or s >= 3)


def admissible_slow(p: int, q: int, s: float, alpha: int) -> bool:
    """Order class O(r, y, ε^α, ε³)."""
    return p >= 1 or q >= 1 or s >= alpha or s >= 3


@dataclass(frozen=True)
class RemainderSpec:
    terms: tuple[Monomial, ...] = ()
    target: str = FAST

    def __post_init__(self):
        if self.target not in (FAST, SLOW):
            raise DomainError(f"target must be 'fast' or 'slow', got {self.target!r}")
        object.__setattr__(self, "terms", tuple(self.terms))

    @classmethod
    def zero(cls, target: str = FAST) -> "RemainderSpec":
        return cls((), target)

    def validate(self, alpha: int) -> None:
        pred = admissible_fast if self.target == FAST else admissible_slow
        for m in self.terms:
            if not pred(m.p, m.q, m.s, alpha):
                raise AssumptionViolated(
                    f"{self.target} remainder term r^{m.p} y^{m.q} eps^{m.s:g} "
                    f"is outside the admissible order class for alpha={alpha}")

    def __call__(self, r: float, theta: float, y: float, eps: float) -> float:
        v = 0.0
        for m in self.terms:
            v += m.coef(theta) * r ** m.p * y ** m.q * eps ** m.s
        return v

    def partials(self, r: float, theta: float, y: float, eps: float) -> tuple[float, float, float]:
        """(∂/∂r, ∂/∂θ, ∂/∂y)."""
        dr = dth = dy = 0.0
        for m in self.terms:
            e = eps ** m.s
            c = m.coef(theta)
            if m.p:
                dr += c * m.p * r ** (m.p - 1) * y ** m.q * e
            if m.q:
                dy += c * m.q * r ** m.p * y ** (m.q - 1) * e
            if m.coef.harmonics:
                dth += m.coef.derivative()(theta) * r ** m.p * y ** m.q * e
        return dr, dth, dy


@dataclass(frozen=True)
class CylState:
    """(r, θ̃, y) with θ̃ the lifted angle; θ = θ̃ mod 1."""

    r: float
    theta_lifted: float
    y: float

    @property
    def theta(self) -> float:
        return self.theta_lifted - math.floor(self.theta_lifted)

    def as_array(self) -> np.ndarray:
        return np.array([self.r, self.theta_lifted, self.y])


@dataclass(frozen=True)
class SectionSpec:
    """Entry section {y = R², r ∈ [β₋, β₊]} and exit section {r = R, |y| ≤ y₀}."""

    R: float = 0.1
    beta_minus: float = -0.2
    beta_plus: float = -0.05
    y0: float = 0.05

    def __post_init__(self):
        if not self.R > 0:
            raise DomainError("R must be positive")
        if not self.beta_minus < self.beta_plus < 0:
            raise DomainError("need beta_minus < beta_plus < 0")
        if not self.y0 > 0:
            raise DomainError("y0 must be positive")

    def check_against(self, sys: "PrototypicalSystem", n: int = 256) -> None:
        th = np.arange(n) / n
        trace = -np.sqrt(sys.a(th) / sys.b(th)) * self.R
        if np.any(trace <= self.beta_minus) or np.any(trace >= self.beta_plus):
            raise AssumptionViolated(
                "attracting critical-manifold trace leaves (beta_minus, beta_plus)")

    def on_entry(self, r: float) -> bool:
        return self.beta_minus <= r <= self.beta_plus

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.beta_minus + self.beta_plus)


@dataclass(frozen=True)
class PrototypicalSystem:
    """r' = −a y + b r² + R_r,  θ' = ε^α,  y' = ε³(−c + R_y)."""

    a: PeriodicFn
    b: PeriodicFn
    c: PeriodicFn
    regime: ScalingRegime
    rem_r: RemainderSpec = field(default_factory=lambda: RemainderSpec.zero(FAST))
    rem_y: RemainderSpec = field(default_factory=lambda: RemainderSpec.zero(SLOW))
    require_positive: bool = True

    def __post_init__(self):
        if self.rem_r.target != FAST or self.rem_y.target != SLOW:
            raise DomainError("rem_r must target the fast equation and rem_y the slow one")
        self.rem_r.validate(self.regime.alpha)
        self.rem_y.validate(self.regime.alpha)
        if self.require_positive:
            for name in ("a", "b", "c"):
                margin = getattr(self, name).positivity_margin()
                if margin <= 0:
                    raise AssumptionViolated(
                        f"coefficient {name}(theta) is not certified positive (margin {margin:.3g})")

    @classmethod
    def unit(cls, alpha: int = 2, eps: float = 0.01) -> "PrototypicalSystem":
        one = PeriodicFn.constant(1.0)
        return cls(one, one, one, ScalingRegime(alpha, eps))

    def with_regime(self, alpha: int | None = None, eps: float | None = None) -> "PrototypicalSystem":
        reg = ScalingRegime(self.regime.alpha if alpha is None else alpha,
                            self.regime.eps if eps is None else eps)
        return replace(self, regime=reg)

    @property
    def has_remainders(self) -> bool:
        return bool(self.rem_r.terms or self.rem_y.terms)

    def packed(self):
        """Flat arrays consumed by the compiled and pure-Python kernels.

        Function rows: 0=a, 1=b, 2=c, then one row per remainder monomial.
        Monomial table columns: (row, p, q, s, target) with target 0=fast, 1=slow.
        """
        funcs = [self.a, self.b, self.c]
        table = []
        for tgt, spec in ((0, self.rem_r), (1, self.rem_y)):
            for m in spec.terms:
                table.append((len(funcs), m.p, m.q, m.s, tgt))
                funcs.append(m.coef)
        means, cos_c, sin_c = pack_functions(funcs)
        mono = np.array(table, dtype=float).reshape(-1, 5)
        return means, cos_c, sin_c, mono


def eval_field_eps(sys: PrototypicalSystem, r: float, theta: float, y: float,
                   eps1: float, eps2: float, eps: float) -> tuple[float, float, float]:
    """Field with ε₁, ε₂ set independently (used for the layer family ε₂ → 0)."""
    dr = -sys.a(theta) * y + sys.b(theta) * r * r
    if sys.rem_r.terms:
        dr += sys.rem_r(r, theta, y, eps)
    dy_inner = -sys.c(theta)
    if sys.rem_y.terms:
        dy_inner += sys.rem_y(r, theta, y, eps)
    return dr, eps1, eps2 * dy_inner


def eval_field(sys: PrototypicalSystem, s: CylState) -> tuple[float, float, float]:
    reg = sys.regime
    return eval_field_eps(sys, s.r, s.theta_lifted, s.y, reg.eps1, reg.eps2, reg.eps)


def field_jacobian_eps(sys: PrototypicalSystem, r: float, theta: float, y: float,
                       eps2: float, eps: float) -> np.ndarray:
    """∂(r', θ', y')/∂(r, θ, y)."""
    a, b = sys.a(theta), sys.b(theta)
    j = np.zeros((3, 3))
    j[0, 0] = 2.0 * b * r
    j[0, 1] = -sys.a.derivative()(theta) * y + sys.b.derivative()(theta) * r * r
    j[0, 2] = -a
    j[2, 1] = -eps2 * sys.c.derivative()(theta)
    if sys.rem_r.terms:
        pr, pt, py = sys.rem_r.partials(r, theta, y, eps)
        j[0, 0] += pr
        j[0, 1] += pt
        j[0, 2] += py
    if sys.rem_y.terms:
        pr, pt, py = sys.rem_y.partials(r, theta, y, eps)
        j[2, 0] += eps2 * pr
        j[2, 1] += eps2 * pt
        j[2, 2] += eps2 * py
    return j


def field_jacobian(sys: PrototypicalSystem, s: CylState) -> np.ndarray:
    return field_jacobian_eps(sys, s.r, s.theta_lifted, s.y, sys.regime.eps2, sys.regime.eps)


def field_callable(sys: PrototypicalSystem, eps1: float | None = None,
                   eps2: float | None = None) -> Callable[[float, np.ndarray], np.ndarray]:
    """f(t, x) for the generic integrator, x = (r, θ̃, y)."""
    reg = sys.regime
    e1 = reg.eps1 if eps1 is None else eps1
    e2 = reg.eps2 if eps2 is None else eps2
    eps = reg.eps

    def f(t, x):
        return np.array(eval_field_eps(sys, x[0], x[1], x[2], e1, e2, eps))

    return f


def critical_manifold_y(sys: PrototypicalSystem, r: float, theta: float,
                        r0: float | None = None, tol: float = 1e-12) -> float:
    """y = φ₀(r, θ) on the critical manifold, by damped Newton from (b/a) r²."""
    if r0 is not None and abs(r) > r0:
        raise DomainError(f"|r|={abs(r):g} exceeds r0={r0:g}")
    a, b = sys.a(theta), sys.b(theta)

    def g(y):
        v = -a * y + b * r * r
        if sys.rem_r.terms:
            v += sys.rem_r(r, theta, y, 0.0)
        return v

    def dg(y):
        d = -a
        if sys.rem_r.terms:
            d += sys.rem_r.partials(r, theta, y, 0.0)[2]
        return d

    y = b / a * r * r
    gy = g(y)
    for _ in range(50):
        if abs(gy) <= tol:
            return y
        step = gy / dg(y)
        lam = 1.0
        while True:
            y_new = y - lam * step
            g_new = g(y_new)
            if abs(g_new) < abs(gy) or lam < 1e-6:
                break
            lam *= 0.5
        y, gy = y_new, g_new
    if abs(gy) <= tol:
        return y
    raise NoConvergence(f"critical manifold Newton failed at r={r:g}, theta={theta:g}")


@dataclass(frozen=True)
class GeneralSystem:
    """r' = F(r, θ, y, ε₁, ε₂), θ' = ε₁, y' = ε₂ H(r, θ, y, ε₁, ε₂)."""

    F: Callable[[float, float, float, float, float], float]
    H: Callable[[float, float, float, float, float], float]


def general_from_prototype(sys: PrototypicalSystem) -> GeneralSystem:
    alpha = sys.regime.alpha

    def eps_of(e1):
        return e1 ** (1.0 / alpha) if e1 > 0 else 0.0

    def F(r, th, y, e1, e2):
        v = -sys.a(th) * y + sys.b(th) * r * r
        if sys.rem_r.terms:
            v += sys.rem_r(r, th, y, eps_of(e1))
        return v

    def H(r, th, y, e1, e2):
        v = -sys.c(th)
        if sys.rem_y.terms:
            v += sys.rem_y(r, th, y, eps_of(e1))
        return v

    return GeneralSystem(F, H)


def _richardson(d_h: float, d_h2: float) -> float:
    return (4.0 * d_h2 - d_h) / 3.0


def normal_form_samples(g: GeneralSystem, thetas, h: float = 1e-4):
    """Finite-difference samples of −F_y, ½F_rr, −H and the fold residuals."""
    out = {"a": [], "b": [], "c": [], "F0": [], "Fr": []}
    for th in thetas:
        def F(r, y):
            return g.F(r, th, y, 0.0, 0.0)
        f0 = F(0.0, 0.0)

        def dy(hh):
            return (F(0.0, hh) - F(0.0, -hh)) / (2 * hh)

        def dr(hh):
            return (F(hh, 0.0) - F(-hh, 0.0)) / (2 * hh)

        def drr(hh):
            return (F(hh, 0.0) - 2 * f0 + F(-hh, 0.0)) / (hh * hh)

        out["a"].append(-_richardson(dy(h), dy(h / 2)))
        out["b"].append(0.5 * _richardson(drr(h), drr(h / 2)))
        out["c"].append(-g.H(0.0, th, 0.0, 0.0, 0.0))
        out["F0"].append(f0)
        out["Fr"].append(_richardson(dr(h), dr(h / 2)))
    return {k: np.array(v) for k, v in out.items()}


@dataclass(frozen=True)
class ExtractionDiagnostics:
    fit_residual: float
    fold_residual: float
    tangency_residual: float


def extract_prototype(g: GeneralSystem, regime: ScalingRegime, n_theta: int = 64,
                      kmax: int = 16, h: float = 1e-4, assumption_tol: float = 1e-8
                      ) -> tuple[PrototypicalSystem, ExtractionDiagnostics]:
    """Recover a, b, c of the normal form from F and H.

    Remainders are not extracted; the returned system carries zero remainders.
    """
    thetas = np.arange(n_theta) / n_theta
    smp = normal_form_samples(g, thetas, h)
    fold_res = float(np.max(np.abs(smp["F0"])))
    tan_res = float(np.max(np.abs(smp["Fr"])))
    if fold_res > assumption_tol:
        raise AssumptionViolated(f"F(0, theta, 0) = {fold_res:.3g} is not zero")
    for name in ("a", "b", "c"):
        if np.any(smp[name] <= 0):
            raise AssumptionViolated(f"extracted {name}(theta) is not positive on the grid")
    kfit = min(kmax, (n_theta - 1) // 2)
    fits = {}
    resid = 0.0
    for name in ("a", "b", "c"):
        fn, r = PeriodicFn.fit(smp[name], kfit, drop_below=1e-13)
        fits[name] = fn
        resid = max(resid, r)
    sys = PrototypicalSystem(fits["a"], fits["b"], fits["c"], regime)
    return sys, ExtractionDiagnostics(resid, fold_res, tan_res)


@dataclass(frozen=True)
class ConditionResult:
    name: str
    passed: bool
    worst_margin: float
    worst_theta: float


@dataclass(frozen=True)
class ConditionReport:
    results: tuple[ConditionResult, ...]

    @property
    def all_passed(self) -> bool:
        return all(r.passed for r in self.results)

    def __getitem__(self, name: str) -> ConditionResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)


def check_fold_conditions(system, n_theta: int = 512, h: float = 1e-4,
                          tol: float = 1e-8) -> ConditionReport:
    """Sufficient fold-of-cycles conditions on sampled θ.

    ``system`` may be a PrototypicalSystem or a GeneralSystem. Equalities pass
    when the residual is ≤ tol; inequalities report the signed margin.
    """
    g = general_from_prototype(system) if isinstance(system, PrototypicalSystem) else system
    thetas = np.arange(n_theta) / n_theta
    smp = normal_form_samples(g, thetas, h)

    def eq(name, vals):
        i = int(np.argmax(np.abs(vals)))
        return ConditionResult(name, bool(abs(vals[i]) <= tol), float(-abs(vals[i])), float(thetas[i]))

    def pos(name, vals):
        i = int(np.argmin(vals))
        return ConditionResult(name, bool(vals[i] > 0), float(vals[i]), float(thetas[i]))

    return ConditionReport((
        eq("fold_point", smp["F0"]),
        eq("fold_tangency", smp["Fr"]),
        pos("convexity", 2.0 * smp["b"]),
        pos("slow_coupling", smp["a"]),
        pos("slow_regularity", smp["c"]),
    ))
