"""Gamma, Bessel J_{±1/3}, Airy Ai, Brent root finding, and the drift constant Ω₀."""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import lru_cache
from typing import Callable

from .errors import BracketError, DomainError, NoConvergence

EPS = 2.220446049250313e-16

# Lanczos approximation, g = 7, nine coefficients
_LANCZOS_G = 7
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma(x: float) -> float:
    """Γ(x) by the Lanczos approximation, with reflection for x < 1/2."""
    if x <= 0 and x == math.floor(x):
        raise DomainError(f"gamma has a pole at {x}")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    x -= 1.0
    acc = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        acc += _LANCZOS[i] / (x + i)
    t = x + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (x + 0.5) * math.exp(-t) * acc


def brent_root(f: Callable[[float], float], a: float, b: float, tol: float = 1e-12,
               xtol: float = 0.0, max_iter: int = 200) -> float:
    """Bracketed root of f on [a, b].

    Stops when |f(x)| ≤ tol or the bracket is narrower than xtol (plus a few
    ulps of x). Raises BracketError when f(a), f(b) share a sign.
    """
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if (fa > 0) == (fb > 0):
        raise BracketError(f"no sign change on [{a}, {b}]: f={fa:.3g}, {fb:.3g}")
    c, fc = a, fa
    d = e = b - a
    for _ in range(max_iter):
        if (fb > 0) == (fc > 0):
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        tol1 = 2.0 * EPS * abs(b) + 0.5 * xtol
        xm = 0.5 * (c - b)
        if abs(xm) <= tol1 or abs(fb) <= tol:
            return b
        if abs(e) >= tol1 and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p = 2.0 * xm * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0:
                q = -q
            p = abs(p)
            if 2.0 * p < min(3.0 * xm * q - abs(tol1 * q), abs(e * q)):
                e = d
                d = p / q
            else:
                d = xm
                e = d
        else:
            d = xm
            e = d
        a, fa = b, fb
        b += d if abs(d) > tol1 else math.copysign(tol1, xm)
        fb = f(b)
    raise NoConvergence(f"brent_root exceeded {max_iter} iterations")


def bessel_j(nu: float, w: float) -> float:
    """J_ν(w) from its power series, for ν ∈ {−1/3, 1/3} and 0 < w ≤ 30.

    Only w ≲ 4 is used internally; larger w loses digits to cancellation.
    """
    if not (abs(abs(nu) - 1.0 / 3.0) < 1e-15):
        raise DomainError(f"only nu = ±1/3 is supported, got {nu}")
    if not 0.0 < w <= 30.0:
        raise DomainError(f"w must lie in (0, 30], got {w}")
    half = 0.5 * w
    term = half ** nu / gamma(nu + 1.0)
    terms = [term]
    h2 = half * half
    m = 0
    while True:
        m += 1
        term *= -h2 / (m * (m + nu))
        terms.append(term)
        if m > half and abs(term) < 1e-17 * abs(math.fsum(terms)):
            break
    return math.fsum(terms)


def bessel_combination(z: float) -> float:
    """J_{−1/3}(w) + J_{1/3}(w) with w = 2 z^{3/2} / 3."""
    w = 2.0 * z ** 1.5 / 3.0
    return bessel_j(-1.0 / 3.0, w) + bessel_j(1.0 / 3.0, w)


# ---- Airy function via its Maclaurin series in extended precision ----

_DIGITS = 50


def _bernoulli(n: int) -> list[Fraction]:
    """B_0..B_n (Akiyama–Tanigawa), with B_1 = +1/2 convention unused here."""
    out = []
    a = [Fraction(0)] * (n + 1)
    for m in range(n + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
        out.append(a[0])
    return out


def _dec_pi() -> Decimal:
    # Gauss–Legendre iteration
    a = Decimal(1)
    b = Decimal(1) / Decimal(2).sqrt()
    t = Decimal(1) / 4
    p = Decimal(1)
    for _ in range(8):
        an = (a + b) / 2
        b = (a * b).sqrt()
        t -= p * (a - an) ** 2
        a = an
        p *= 2
    return (a + b) ** 2 / (4 * t)


def _dec_gamma(x: Fraction) -> Decimal:
    """Γ(x) for rational x > 0 by shifted Stirling series in Decimal arithmetic."""
    shift = 40
    z = Decimal(x.numerator) / Decimal(x.denominator) + shift
    pi = _dec_pi()
    lg = (z - Decimal("0.5")) * z.ln() - z + (2 * pi).ln() / 2
    bern = _bernoulli(40)
    for k in range(1, 20):
        b2k = bern[2 * k]
        lg += Decimal(b2k.numerator) / Decimal(b2k.denominator) / (
            Decimal(2 * k * (2 * k - 1)) * z ** (2 * k - 1))
    g = lg.exp()
    base = Decimal(x.numerator) / Decimal(x.denominator)
    for i in range(shift):
        g /= base + i
    return g


@lru_cache(maxsize=1)
def _airy_constants() -> tuple[Decimal, Decimal]:
    """(Ai(0), −Ai′(0)) to 50 digits."""
    with localcontext() as ctx:
        ctx.prec = _DIGITS + 10
        three = Decimal(3)
        c1 = 1 / (three ** (Decimal(2) / 3) * _dec_gamma(Fraction(2, 3)))
        c2 = 1 / (three ** (Decimal(1) / 3) * _dec_gamma(Fraction(1, 3)))
    return +c1, +c2


def _airy_series(x: float) -> tuple[Decimal, Decimal, Decimal, Decimal]:
    """f, g and their derivatives from the Maclaurin solutions of w'' = x w."""
    X = Decimal(x)
    x3 = X ** 3
    f = tf = Decimal(1)
    g = tg = X
    fp = Decimal(0)
    gp = Decimal(1)
    k = 0
    small = Decimal(10) ** (-(_DIGITS - 5))
    while True:
        k += 1
        # f: x^{3k}/( (2·3)(5·6)...((3k−1)·3k) ); g: x^{3k+1}/((3·4)...(3k·(3k+1)))
        tf = tf * x3 / ((3 * k - 1) * (3 * k))
        tg = tg * x3 / ((3 * k) * (3 * k + 1))
        f += tf
        g += tg
        if X != 0:
            fp += tf * (3 * k) / X
        gp += tg * (3 * k + 1) / X if X != 0 else 0
        if abs(tf) < small and abs(tg) < small and k > 3:
            break
    return f, g, fp, gp


def _airy_pair(x: float) -> tuple[float, float]:
    if not abs(x) <= 8.0:
        raise DomainError(f"airy series requires |x| <= 8, got {x}")
    with localcontext() as ctx:
        ctx.prec = _DIGITS
        c1, c2 = _airy_constants()
        f, g, fp, gp = _airy_series(x)
        ai = c1 * f - c2 * g
        aip = c1 * fp - c2 * gp
        return float(ai), float(aip)


def airy_ai(x: float) -> float:
    """Ai(x) for |x| ≤ 8 from the Maclaurin series."""
    return _airy_pair(x)[0]


def airy_ai_prime(x: float) -> float:
    """Ai′(x) for |x| ≤ 8."""
    return _airy_pair(x)[1]


def airy_first_zero() -> float:
    """First zero of Ai(−z), z > 0."""
    return brent_root(lambda z: airy_ai(-z), 2.0, 3.0, tol=0.0)


@dataclass(frozen=True)
class Omega0Result:
    value: float
    residual: float
    airy_crosscheck: float


_omega_lock = threading.Lock()
_omega_cache: list[Omega0Result] = []


def omega0(refresh: bool = False) -> Omega0Result:
    """Smallest positive zero of J_{−1/3}(2z^{3/2}/3) + J_{1/3}(2z^{3/2}/3); cached."""
    if _omega_cache and not refresh:
        return _omega_cache[0]
    with _omega_lock:
        if refresh:
            _omega_cache.clear()
        if not _omega_cache:
            z = brent_root(bessel_combination, 1.0, 3.0, tol=0.0)
            res = abs(bessel_combination(z))
            _omega_cache.append(Omega0Result(z, res, abs(z - airy_first_zero())))
    return _omega_cache[0]


def omega0_value() -> float:
    return omega0().value
