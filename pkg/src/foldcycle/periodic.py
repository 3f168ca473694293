"""Truncated Fourier series for smooth 1-periodic coefficient functions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi
POSITIVITY_SAMPLES = 4096


@dataclass(frozen=True)
class PeriodicFn:
    """f(θ) = mean + Σ_k [c_k cos(2πkθ) + s_k sin(2πkθ)].

    ``harmonics`` holds ``(k, c_k, s_k)`` triples with distinct positive k.
    Evaluation reduces θ modulo 1 first, so shifting θ by an integer that is
    exactly representable never changes the result.
    """

    mean: float
    harmonics: tuple[tuple[int, float, float], ...] = field(default=())

    def __post_init__(self):
        cleaned = []
        seen = set()
        for k, c, s in self.harmonics:
            k = int(k)
            if k <= 0:
                raise ValueError(f"harmonic index must be positive, got {k}")
            if k in seen:
                raise ValueError(f"duplicate harmonic index {k}")
            seen.add(k)
            cleaned.append((k, float(c), float(s)))
        cleaned.sort()
        object.__setattr__(self, "mean", float(self.mean))
        object.__setattr__(self, "harmonics", tuple(cleaned))

    @classmethod
    def constant(cls, value: float) -> "PeriodicFn":
        return cls(float(value), ())

    @property
    def kmax(self) -> int:
        return self.harmonics[-1][0] if self.harmonics else 0

    def __call__(self, theta):
        if np.ndim(theta) == 0:
            t = float(theta)
            t -= math.floor(t)
            v = self.mean
            for k, c, s in self.harmonics:
                w = TWO_PI * k * t
                v += c * math.cos(w) + s * math.sin(w)
            return v
        t = np.asarray(theta, dtype=float)
        t = t - np.floor(t)
        v = np.full(t.shape, self.mean)
        for k, c, s in self.harmonics:
            w = TWO_PI * k * t
            v += c * np.cos(w) + s * np.sin(w)
        return v

    def derivative(self) -> "PeriodicFn":
        # d/dθ [c cos + s sin] = 2πk (s cos − c sin)
        return PeriodicFn(0.0, tuple((k, TWO_PI * k * s, -TWO_PI * k * c)
                                     for k, c, s in self.harmonics))

    def scaled(self, factor: float, shift: float = 0.0) -> "PeriodicFn":
        """Return factor·f + shift."""
        return PeriodicFn(factor * self.mean + shift,
                          tuple((k, factor * c, factor * s) for k, c, s in self.harmonics))

    def coefficient_l1(self) -> float:
        return sum(abs(c) + abs(s) for _, c, s in self.harmonics)

    def lipschitz_bound(self) -> float:
        return sum(TWO_PI * k * (abs(c) + abs(s)) for k, c, s in self.harmonics)

    def sampled_extrema(self, n: int = POSITIVITY_SAMPLES) -> tuple[float, float]:
        vals = self(np.arange(n) / n)
        return float(vals.min()), float(vals.max())

    def positivity_margin(self, n: int = POSITIVITY_SAMPLES) -> float:
        """Certified lower bound on min f.

        The sampled minimum minus the largest possible dip between grid points
        (half a grid spacing times a Lipschitz bound from the coefficients).
        """
        lo, _ = self.sampled_extrema(n)
        return lo - 0.5 / n * self.lipschitz_bound()

    def dense(self, kmax: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Dense cos/sin coefficient arrays indexed by k-1."""
        kmax = self.kmax if kmax is None else kmax
        cos_c = np.zeros(kmax)
        sin_c = np.zeros(kmax)
        for k, c, s in self.harmonics:
            if k > kmax:
                raise ValueError("kmax smaller than the highest harmonic")
            cos_c[k - 1] = c
            sin_c[k - 1] = s
        return cos_c, sin_c

    @classmethod
    def fit(cls, samples, kmax: int = 16, drop_below: float = 0.0) -> tuple["PeriodicFn", float]:
        """Fit uniform samples f(j/n), j=0..n-1, by a discrete Fourier transform.

        Returns the series and the maximum residual on the sample grid.
        """
        y = np.asarray(samples, dtype=float)
        n = y.size
        if n < 2 * kmax + 1:
            raise ValueError("need at least 2*kmax+1 samples")
        spec = np.fft.rfft(y) / n
        harmonics = []
        for k in range(1, kmax + 1):
            c = 2.0 * spec[k].real
            s = -2.0 * spec[k].imag
            if abs(c) > drop_below or abs(s) > drop_below:
                harmonics.append((k, c, s))
        fn = cls(float(spec[0].real), tuple(harmonics))
        resid = float(np.max(np.abs(fn(np.arange(n) / n) - y)))
        return fn, resid

    def to_dict(self) -> dict:
        return {"mean": self.mean,
                "harmonics": [[k, c, s] for k, c, s in self.harmonics]}


def pack_functions(funcs) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Stack several series into (means, cos[nf, K], sin[nf, K]) with a shared K."""
    kmax = max([f.kmax for f in funcs] + [1])
    means = np.array([f.mean for f in funcs], dtype=float)
    cos_c = np.zeros((len(funcs), kmax))
    sin_c = np.zeros((len(funcs), kmax))
    for i, f in enumerate(funcs):
        cos_c[i], sin_c[i] = f.dense(kmax)
    return means, cos_c, sin_c
