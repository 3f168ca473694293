"""Blow-up charts around the folded cycle: coordinates, chart changes, chart
vector fields, blow-down consistency, and the rescaling-chart Riccati problem."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NoConvergence, NoEvent
from .integrator import (ANY, EventSpec, IntegratorConfig, RISING, integrate,
                         integrate_to_event)
from .model import PrototypicalSystem, eval_field_eps, field_callable
from .periodic import PeriodicFn
from .special import airy_ai, airy_ai_prime, omega0_value

K1, K2, K3 = "K1", "K2", "K3"
CHARTS = (K1, K2, K3)
COORD_NAMES = {K1: ("r1", "theta1", "rho1", "eps1"),
               K2: ("r2", "theta2", "y2", "rho2"),
               K3: ("rho3", "theta3", "y3", "eps3")}
# position of the radial coordinate in each chart
RHO_INDEX = {K1: 2, K2: 3, K3: 0}

TIGHT = IntegratorConfig(rtol=1e-12, atol=1e-14)


@dataclass(frozen=True)
class ChartPoint:
    chart: str
    coords: tuple[float, float, float, float]

    def __post_init__(self):
        if self.chart not in CHARTS:
            raise DomainError(f"unknown chart {self.chart!r}")
        c = tuple(float(v) for v in self.coords)
        if len(c) != 4:
            raise DomainError("chart points have four coordinates")
        object.__setattr__(self, "coords", c)

    @property
    def rho(self) -> float:
        return self.coords[RHO_INDEX[self.chart]]

    def motion_constant(self) -> float:
        """The value of ε carried by the point."""
        c = self.coords
        if self.chart == K1:
            return c[2] * c[3]
        if self.chart == K2:
            return c[3]
        return c[0] * c[3]


def blow_down(p: ChartPoint) -> tuple[float, float, float, float]:
    """Chart coordinates to (r, θ, y, ε)."""
    c = p.coords
    if p.chart == K1:
        r1, th, rho, e1 = c
        return rho * r1, th, rho * rho, rho * e1
    if p.chart == K2:
        r2, th, y2, rho = c
        return rho * r2, th, rho * rho * y2, rho
    rho, th, y3, e3 = c
    return rho, th, rho * rho * y3, rho * e3


def kappa_12(p: ChartPoint) -> ChartPoint:
    r1, th, rho1, e1 = p.coords
    if not e1 > 0:
        raise DomainError("kappa_12 requires eps1 > 0")
    return ChartPoint(K2, (r1 / e1, th, e1 ** -2, rho1 * e1))


def kappa_12_inv(p: ChartPoint) -> ChartPoint:
    r2, th, y2, rho2 = p.coords
    if not y2 > 0:
        raise DomainError("kappa_12 inverse requires y2 > 0")
    s = math.sqrt(y2)
    return ChartPoint(K1, (r2 / s, th, rho2 * s, 1.0 / s))


def kappa_23(p: ChartPoint) -> ChartPoint:
    r2, th, y2, rho2 = p.coords
    if not r2 > 0:
        raise DomainError("kappa_23 requires r2 > 0")
    return ChartPoint(K3, (rho2 * r2, th, y2 / (r2 * r2), 1.0 / r2))


def kappa_23_inv(p: ChartPoint) -> ChartPoint:
    rho3, th, y3, e3 = p.coords
    if not e3 > 0:
        raise DomainError("kappa_23 inverse requires eps3 > 0")
    return ChartPoint(K2, (1.0 / e3, th, y3 / (e3 * e3), rho3 * e3))


def blow_down_jacobian(chart: str, coords) -> np.ndarray:
    """∂(r, θ, y, ε)/∂(chart coordinates)."""
    J = np.zeros((4, 4))
    J[1, 1] = 1.0
    if chart == K1:
        r1, _, rho, e1 = coords
        J[0, 0], J[0, 2] = rho, r1
        J[2, 2] = 2 * rho
        J[3, 2], J[3, 3] = e1, rho
    elif chart == K2:
        r2, _, y2, rho = coords
        J[0, 0], J[0, 3] = rho, r2
        J[2, 2], J[2, 3] = rho * rho, 2 * rho * y2
        J[3, 3] = 1.0
    else:
        rho, _, y3, e3 = coords
        J[0, 0] = 1.0
        J[2, 0], J[2, 2] = 2 * rho * y3, rho * rho
        J[3, 0], J[3, 3] = e3, rho
    return J


# ---- chart fields ----

def _chart_monomials(chart: str, spec, coords, shift: float) -> float:
    """Σ m(θ)·ρ^{p+2q+s−shift}·(remaining chart factors) for one remainder."""
    if not spec.terms:
        return 0.0
    v = 0.0
    if chart == K1:
        r1, th, rho, e1 = coords
        for m in spec.terms:
            v += m.coef(th) * rho ** (m.p + 2 * m.q + m.s - shift) * r1 ** m.p * e1 ** m.s
    elif chart == K2:
        r2, th, y2, rho = coords
        for m in spec.terms:
            v += m.coef(th) * rho ** (m.p + 2 * m.q + m.s - shift) * r2 ** m.p * y2 ** m.q
    else:
        rho, th, y3, e3 = coords
        for m in spec.terms:
            v += m.coef(th) * rho ** (m.p + 2 * m.q + m.s - shift) * y3 ** m.q * e3 ** m.s
    return v


def chart_vector(chart: str, sys: PrototypicalSystem, coords, divided: bool = False) -> np.ndarray:
    """Desingularized chart field at a point, closed form.

    The fast remainder enters divided by ρ², the slow remainder as is; both
    are reduced monomial by monomial so the expressions stay exact at ρ = 0.
    ``divided`` (K3 only) further divides by F = b − a y3 + O(ρ3).
    """
    alpha = sys.regime.alpha
    th = coords[1]
    a, b, c = sys.a(th), sys.b(th), sys.c(th)
    rr = _chart_monomials(chart, sys.rem_r, coords, 2.0)
    slow = -c + _chart_monomials(chart, sys.rem_y, coords, 0.0)
    if chart == K1:
        r1, _, rho, e1 = coords
        drho = 0.5 * rho * e1 ** 3 * slow
        out = np.array([-a + b * r1 * r1 + rr - r1 * 0.5 * e1 ** 3 * slow,
                        rho ** (alpha - 1) * e1 ** alpha,
                        drho,
                        -0.5 * e1 ** 4 * slow])
    elif chart == K2:
        r2, _, y2, rho = coords
        out = np.array([-a * y2 + b * r2 * r2 + rr, rho ** (alpha - 1), slow, 0.0])
    else:
        rho, _, y3, e3 = coords
        F = b - a * y3 + rr
        out = np.array([rho * F, rho ** (alpha - 1) * e3 ** alpha,
                        -2.0 * y3 * F + e3 ** 3 * slow, -e3 * F])
        if divided:
            if not F > 0:
                raise DomainError(f"F = {F:.3g} is not positive; the divided K3 field is undefined")
            out = out / F
    if divided and chart != K3:
        raise DomainError("the divided variant exists only in chart K3")
    return out


def chart_field(chart: str, sys: PrototypicalSystem, divided: bool = False):
    """f(t, p) for the integrator in the given chart."""
    if chart not in CHARTS:
        raise DomainError(f"unknown chart {chart!r}")

    def f(t, p):
        return chart_vector(chart, sys, p, divided)

    return f


def pushforward_vector(chart: str, sys: PrototypicalSystem, coords) -> np.ndarray:
    """J⁻¹·(field ∘ blow_down)/ρ evaluated numerically; requires ρ > 0."""
    p = ChartPoint(chart, tuple(coords))
    rho = p.rho
    if not rho > 0:
        raise DomainError("the pushforward needs rho > 0")
    r, th, y, eps = blow_down(p)
    e1 = eps ** sys.regime.alpha
    f = np.array([*eval_field_eps(sys, r, th, y, e1, eps ** 3, eps), 0.0])
    return np.linalg.solve(blow_down_jacobian(chart, p.coords), f) / rho


def k3_jacobian(sys: PrototypicalSystem, coords) -> np.ndarray:
    """Analytic Jacobian of the K3 field (zero remainders), coordinates (ρ3, θ3, y3, ε3)."""
    if sys.has_remainders:
        raise DomainError("analytic K3 Jacobian is for the zero-remainder class")
    rho, th, y3, e3 = coords
    alpha = sys.regime.alpha
    a, b, c = sys.a(th), sys.b(th), sys.c(th)
    da, db, dc = sys.a.derivative()(th), sys.b.derivative()(th), sys.c.derivative()(th)
    F = b - a * y3
    Ft = db - da * y3
    J = np.zeros((4, 4))
    J[0, 0], J[0, 1], J[0, 2] = F, rho * Ft, -a * rho
    if alpha > 1:
        J[1, 0] = (alpha - 1) * rho ** (alpha - 2) * e3 ** alpha
    J[1, 3] = alpha * rho ** (alpha - 1) * e3 ** (alpha - 1)
    J[2, 1] = -2.0 * y3 * Ft - e3 ** 3 * dc
    J[2, 2] = -2.0 * F + 2.0 * a * y3
    J[2, 3] = -3.0 * e3 ** 2 * c
    J[3, 1], J[3, 2], J[3, 3] = -e3 * Ft, a * e3, -F
    return J


def k3_eigenvalues(sys: PrototypicalSystem, theta: float) -> np.ndarray:
    """Eigenvalues of the K3 linearization on the circle Q = {(0, θ, 0, 0)}, sorted descending."""
    ev = np.linalg.eigvals(k3_jacobian(sys, (0.0, theta, 0.0, 0.0)))
    return np.sort(ev.real)[::-1]


# ---- blow-down consistency ----

def check_blowdown_consistency(chart: str, sys: PrototypicalSystem, p0, horizon: float,
                               n_checkpoints: int = 8, cfg: IntegratorConfig = TIGHT) -> float:
    """Largest |Δr|, |Δy| between a chart orbit and the direct orbit.

    The desingularized time differs from the original one, so the two orbits
    are compared where their lifted angles agree.
    """
    p0 = p0 if isinstance(p0, ChartPoint) else ChartPoint(chart, tuple(p0))
    if not p0.rho > 0:
        raise DomainError("blow-down consistency needs rho > 0")
    if horizon <= 0:
        return 0.0
    eps = p0.motion_constant()
    if not eps > 0:
        raise DomainError("blow-down consistency needs eps > 0")
    direct_sys = sys.with_regime(eps=eps)
    fc = chart_field(chart, sys.with_regime(eps=eps))
    ctraj = integrate(fc, p0.coords, horizon, cfg, dense=True)
    th0 = p0.coords[1]
    th1 = float(ctraj.states[-1][1])
    if th1 <= th0:
        raise DomainError("the angle does not advance over the horizon; no checkpoints")
    marks = [th0 + (th1 - th0) * k / n_checkpoints for k in range(1, n_checkpoints + 1)]

    def sample(field, x0, t_guess):
        events = [EventSpec(lambda t, x, m=m: x[1] - m, RISING, k == len(marks) - 1)
                  for k, m in enumerate(marks)]
        res = integrate_to_event(field, x0, events, cfg, t_max=4.0 * t_guess + 1.0)
        hits = {i: x for i, _, x in res.trajectory.events}
        hits[res.index] = res.state
        return [hits[i] for i in range(len(marks))]

    chart_pts = sample(fc, p0.coords, horizon)
    r, th, y, _ = blow_down(p0)
    t_direct = (th1 - th0) / direct_sys.regime.eps1
    direct_pts = sample(field_callable(direct_sys), [r, th, y], t_direct)
    dev = 0.0
    for cp, dp in zip(chart_pts, direct_pts):
        rb, _, yb, _ = blow_down(ChartPoint(chart, tuple(cp)))
        dev = max(dev, abs(rb - dp[0]), abs(yb - dp[2]))
    return dev


def motion_constant_drift(chart: str, sys: PrototypicalSystem, p0, horizon: float,
                          cfg: IntegratorConfig = TIGHT) -> float:
    """max |ε(t) − ε(0)| along a chart orbit, ε read from the motion constant."""
    p0 = p0 if isinstance(p0, ChartPoint) else ChartPoint(chart, tuple(p0))
    traj = integrate(chart_field(chart, sys), p0.coords, horizon, cfg)
    e0 = p0.motion_constant()
    return max(abs(ChartPoint(chart, tuple(x)).motion_constant() - e0) for x in traj.states)


# ---- entry chart predictions ----

def k1_graph(sys: PrototypicalSystem, theta1: float, eps1: float) -> float:
    """Leading terms of the attracting centre-manifold graph r1 = h(θ1, 0, ε1)."""
    a, b, c = sys.a(theta1), sys.b(theta1), sys.c(theta1)
    base = -math.sqrt(a / b)
    if sys.regime.alpha == 1:
        da, db = sys.a.derivative()(theta1), sys.b.derivative()(theta1)
        return base + (a * db - da * b) / (4.0 * a * b) * eps1
    return base - c / (4.0 * b) * eps1 ** 3


def k1_graph_deviation(sys: PrototypicalSystem, theta1: float, rho1: float, eps1: float,
                       E: float, cfg: IntegratorConfig = TIGHT) -> tuple[float, float]:
    """Start on the graph and follow the K1 flow until ε1 = E.

    Returns (max |r1 − graph|, max over the orbit of ε1^k + ρ1) with k = 2 for
    α = 1 and k = 6 otherwise; the first should be a bounded multiple of the second.
    """
    f = chart_field(K1, sys)
    p0 = [k1_graph(sys, theta1, eps1), theta1, rho1, eps1]
    ev = EventSpec(lambda t, x: x[3] - E, RISING, True)
    res = integrate_to_event(f, p0, [ev], cfg)
    k = 2 if sys.regime.alpha == 1 else 6
    dev = scale = 0.0
    for x in res.trajectory.states:
        dev = max(dev, abs(x[0] - k1_graph(sys, x[1], x[3])))
        scale = max(scale, x[3] ** k + x[2])
    return dev, scale


@dataclass(frozen=True)
class K1Passage:
    predicted_time: float
    simulated_time: float
    predicted_theta: float
    simulated_theta: float
    rho_at_exit: float


def k1_passage(sys: PrototypicalSystem, r1: float, theta1: float, R: float, eps1: float,
               E: float, cfg: IntegratorConfig = TIGHT) -> K1Passage:
    """Entry-chart passage from ρ1 = R to ε1 = E against the explicit leading-order formulas."""
    c0 = sys.c.mean
    alpha = sys.regime.alpha
    t_pred = 2.0 / (3.0 * c0) * (eps1 ** -3 - E ** -3)
    # θ1 gain with φ(t) ≈ c0 t evaluated at the exit
    base = 1.0 - 1.5 * eps1 ** 3 * c0 * t_pred
    th_pred = theta1 + (R * eps1) ** (alpha - 1) * eps1 ** -2 / c0 * (1.0 - base ** (2.0 / 3.0))
    ev = EventSpec(lambda t, x: x[3] - E, RISING, True)
    res = integrate_to_event(chart_field(K1, sys), [r1, theta1, R, eps1], [ev], cfg)
    return K1Passage(t_pred, res.t, th_pred, float(res.state[1]), float(res.state[2]))


# ---- rescaling chart: Riccati problem ----

def riccati_scales(a: float, b: float, c: float) -> tuple[float, float, float]:
    """(time, r2, y2) scale factors mapping to dR/dT = −Y + R², dY/dT = −1."""
    return ((a * b * c) ** (-1.0 / 3.0), (a * c / (b * b)) ** (1.0 / 3.0),
            (c * c / (a * b)) ** (1.0 / 3.0))


@dataclass
class RiccatiCurve:
    a: float
    b: float
    c: float
    L: float
    r2: np.ndarray
    y2: np.ndarray
    right_deviation: float
    tolerance: float
    _traj: object = None

    def __call__(self, r2: float) -> float:
        if not -self.L <= r2 <= self.L:
            raise DomainError(f"r2={r2} outside [-L, L]")
        return float(self._traj.dense(r2)[0])

    @property
    def right_asymptote(self) -> float:
        """−(c²/(ab))^{1/3}·Ω₀ + (c/b)/L."""
        return -riccati_scales(self.a, self.b, self.c)[2] * omega0_value() + self.c / (self.b * self.L)


def riccati_special_solution(a: float, b: float, c: float, L: float = 20.0, n: int = 801,
                             cfg: IntegratorConfig = TIGHT) -> RiccatiCurve:
    """The distinguished solution y2 = h(r2) of r2' = −a y2 + b r2², y2' = −c.

    Uses r2 as the independent variable, dy2/dr2 = −c/(b r2² − a y2), seeded
    at r2 = −L by (b/a) r2² + (c/2b)/r2. Raises NoConvergence when the value
    at r2 = L misses the right asymptote by more than twice its next-order size.
    """
    if L < 5:
        raise DomainError("L must be at least 5")
    if min(a, b, c) <= 0:
        raise DomainError("a, b, c must be positive")

    def f(r, x):
        return np.array([-c / (b * r * r - a * x[0])])

    y_seed = b / a * L * L - c / (2.0 * b * L)
    traj = integrate(f, [y_seed], L, cfg, t0=-L, dense=True)
    grid = np.linspace(-L, L, n)
    ys = np.array([traj.dense(r)[0] for r in grid])
    ys[-1] = traj.states[-1][0]
    _, sr, sy = riccati_scales(a, b, c)
    Rs = L / sr
    w0 = omega0_value()
    tol = 2.0 * sy * (w0 / (3.0 * Rs ** 3) + 1.0 / (4.0 * Rs ** 4)) + 1e-8
    right = -sy * w0 + c / (b * L)
    dev = abs(ys[-1] - right)
    curve = RiccatiCurve(a, b, c, L, grid, ys, dev, tol, traj)
    if dev > tol:
        raise NoConvergence(f"right asymptote mismatch {dev:.3g} exceeds {tol:.3g}")
    return curve


def riccati_airy_deviation(curve: RiccatiCurve, y_lo: float = -2.0, y_hi: float = 3.0) -> float:
    """max |R2 − Ai′(Y2)/Ai(Y2)| over curve samples with Y2 in [y_lo, y_hi], in scaled variables."""
    _, sr, sy = riccati_scales(curve.a, curve.b, curve.c)
    worst = 0.0
    count = 0
    for r, y in zip(curve.r2, curve.y2):
        Y = y / sy
        if y_lo <= Y <= y_hi:
            worst = max(worst, abs(r / sr - airy_ai_prime(Y) / airy_ai(Y)))
            count += 1
    if count == 0:
        raise DomainError("no curve samples fall in the requested Y2 window")
    return worst


def riccati_exit_value(a: float, b: float, c: float, E: float) -> float:
    """h(1/E): the special solution where it meets r2 = 1/E."""
    curve = riccati_special_solution(a, b, c, L=max(20.0, 1.0 / E))
    return curve(1.0 / E)


# ---- α = 1 comparison bounds ----

@dataclass(frozen=True)
class SandwichRun:
    theta0: float
    r0: float
    crossed: bool
    cross_time: float
    lower_violation: float
    upper_violation: float

    @property
    def held(self) -> bool:
        return self.crossed and self.lower_violation <= 0.0 and self.upper_violation <= 0.0


@dataclass(frozen=True)
class BoundsReport:
    A_minus: float
    A_plus: float
    B_minus: float
    B_plus: float
    runs: tuple[SandwichRun, ...]

    @property
    def all_held(self) -> bool:
        return all(r.held for r in self.runs)

    @property
    def all_crossed(self) -> bool:
        return all(r.crossed for r in self.runs)


def ratio_extrema(num: PeriodicFn, den: PeriodicFn, n: int = 4096) -> tuple[float, float]:
    th = np.arange(n) / n
    q = num(th) / den(th)
    return float(q.min()), float(q.max())


def _riccati_leg(rhs, x0, t0, cap, stop_y0, cfg, t_max):
    """Integrate (r, y) from t0 until y = 0 (if stop_y0), r = cap, or t_max."""
    events = [EventSpec(lambda t, x: x[0] - cap, RISING, True)]
    if stop_y0:
        events.append(EventSpec(lambda t, x: x[1], ANY, True))
    try:
        res = integrate_to_event(rhs, x0, events, cfg, t0=t0, t_max=t_max, dense=True)
    except NoEvent:
        return None, None
    return res, res.trajectory


def _piecewise(coef, cap, x0, T0, cfg, t_max, theta0, c):
    """Comparison solution r' = c̃(−λ y + μ r²) with (λ, μ) switching at y = 0."""
    (l1, m1), (l2, m2) = coef

    def make(lam, mu):
        return lambda t, x: np.array([c(theta0 + t) * (-lam * x[1] + mu * x[0] ** 2), -c(theta0 + t)])

    segs = []
    res, tr = _riccati_leg(make(l1, m1), x0, 0.0, cap, True, cfg, t_max)
    if res is None:
        raise NoConvergence("comparison solution did not terminate")
    segs.append((0.0, res.t, tr))
    if res.index == 1:
        res2, tr2 = _riccati_leg(make(l2, m2), res.state, res.t, cap, False, cfg, t_max)
        if res2 is None:
            raise NoConvergence("comparison solution did not blow up")
        segs.append((res.t, res2.t, tr2))
        return segs, res2.t
    return segs, res.t


def _eval_segments(segs, t):
    for t0, t1, tr in segs:
        if t0 <= t <= t1:
            return float(tr.dense(t)[0])
    return math.inf


def riccati_alpha1_bounds(a: PeriodicFn, b: PeriodicFn, c: PeriodicFn, E: float, R: float,
                          beta_minus: float = -0.2, beta_plus: float = -0.05,
                          n_runs: int = 16, seed: int = 0, initial=None,
                          n_check: int = 2000, cfg: IntegratorConfig = TIGHT) -> BoundsReport:
    """Check lower ≤ r2 ≤ upper for the α = 1 Riccati problem until r2 = 1/E.

    Initial points (r2, θ2) are drawn from [β₋/(ER), β₊/(ER)] × [0, 1) with
    y2 = E⁻²; pass ``initial`` to supply them. The comparison solutions start
    at the interval ends and use the ratio extrema of a/c and b/c.
    """
    Am, Ap = ratio_extrema(a, c)
    Bm, Bp = ratio_extrema(b, c)
    lo0, hi0 = beta_minus / (E * R), beta_plus / (E * R)
    if initial is None:
        rng = np.random.default_rng(seed)
        initial = [(float(rng.uniform(lo0, hi0)), float(rng.uniform(0.0, 1.0)))
                   for _ in range(n_runs)]
    y0 = E ** -2
    t_max = 20.0 * y0 / c.sampled_extrema()[0] + 10.0
    cap = 1e4 / E
    runs = []
    for r0, th0 in initial:
        def true_rhs(t, x, th0=th0):
            s = th0 + t
            return np.array([-a(s) * x[1] + b(s) * x[0] ** 2, -c(s)])

        ev = EventSpec(lambda t, x: x[0] - 1.0 / E, RISING, True)
        try:
            res = integrate_to_event(true_rhs, [r0, y0], [ev], cfg, t_max=t_max, dense=True)
        except NoEvent:
            runs.append(SandwichRun(th0, r0, False, math.nan, math.nan, math.nan))
            continue
        t_cross = res.t
        low, _ = _piecewise(((Ap, Bm), (Am, Bm)), cap, [lo0, y0], None, cfg, t_max, th0, c)
        up, _ = _piecewise(((Am, Bp), (Ap, Bp)), cap, [hi0, y0], None, cfg, t_max, th0, c)
        lv = uv = -math.inf
        for t in np.linspace(0.0, t_cross, n_check):
            r = float(res.trajectory.dense(t)[0])
            rl = _eval_segments(low, t)
            ru = _eval_segments(up, t)
            tol = 1e-8 * max(1.0, abs(r))
            lv = max(lv, rl - r - tol)
            uv = max(uv, r - ru - tol)
        runs.append(SandwichRun(th0, r0, True, t_cross, lv, uv))
    return BoundsReport(Am, Ap, Bm, Bp, tuple(runs))
