"""Representations of the aggregate-sum distribution and their primitives.

Four interchangeable forms, each exposing the same primitives (mean,
variance, cdf, quantile, stop-loss transform, log-mgf) that the risk-measure
layer builds on:

* LatticeDistribution: pmf on the integers 0..m (discrete margins),
* GridDistribution: pmf lumped on a step-h lattice (uniform margins),
* MixedErlangDistribution: countable Erlang(beta) mixture (exponential
  margins), evaluated analytically from its component weights,
* EmpiricalDistribution: a sorted Monte Carlo sample.

Quantiles follow the generalized-inverse convention inf{y : F(y) >= level};
a 1e-12 slack absorbs float round-off when a cdf value sits exactly on the
level.
"""

from __future__ import annotations

import numpy as np
from scipy import special

_CDF_SLACK = 1e-12


class LatticeDistribution:
    """pmf on {0, 1, ..., m}."""

    kind = "lattice"

    def __init__(self, probs, renormalize: bool = True):
        probs = np.asarray(probs, dtype=float)
        if probs.min() < -1e-9:
            raise ValueError(f"pmf entry {probs.min()} too negative for round-off")
        probs = np.clip(probs, 0.0, None)
        total = probs.sum()
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"pmf mass {total} deviates from 1 beyond 1e-10")
        self.probs = probs / total if renormalize else probs
        self._cdf = np.cumsum(self.probs)
        self.support = np.arange(probs.size, dtype=float)

    @classmethod
    def from_sum_pmf(cls, g) -> "LatticeDistribution":
        return cls(np.asarray(g.as_floats()))

    def mean(self) -> float:
        return float(np.dot(self.support, self.probs))

    def variance(self) -> float:
        m = self.mean()
        return float(np.dot((self.support - m) ** 2, self.probs))

    def cdf(self, x) -> np.ndarray | float:
        idx = np.clip(np.floor(np.asarray(x, dtype=float)).astype(int), -1, self.probs.size - 1)
        padded = np.concatenate([[0.0], self._cdf])
        return padded[idx + 1]

    def quantile(self, level: float) -> float:
        return float(np.searchsorted(self._cdf, level - _CDF_SLACK, side="left"))

    def stop_loss(self, t: float) -> float:
        return float(np.dot(np.clip(self.support - t, 0.0, None), self.probs))

    def log_mgf(self, gamma: float) -> float:
        mask = self.probs > 0
        return float(
            special.logsumexp(np.log(self.probs[mask]) + gamma * self.support[mask])
        )


class GridDistribution:
    """pmf lumped on the lattice {0, h, 2h, ...}."""

    kind = "grid"

    def __init__(self, h: float, probs):
        if h <= 0:
            raise ValueError("grid step must be positive")
        self.h = float(h)
        self._lattice = LatticeDistribution(probs)
        self.probs = self._lattice.probs

    def mean(self) -> float:
        return self.h * self._lattice.mean()

    def variance(self) -> float:
        return self.h**2 * self._lattice.variance()

    def cdf(self, x) -> np.ndarray | float:
        return self._lattice.cdf(np.asarray(x, dtype=float) / self.h + 1e-9)

    def quantile(self, level: float) -> float:
        return self.h * self._lattice.quantile(level)

    def stop_loss(self, t: float) -> float:
        return self.h * self._lattice.stop_loss(t / self.h)

    def log_mgf(self, gamma: float) -> float:
        return self._lattice.log_mgf(gamma * self.h)


class MixedErlangDistribution:
    """Mixture over k of Erlang(shape_offset + k, beta), weights eta_k.

    The recorded ``tail_mass`` is the weight dropped at truncation; quantiles
    computed from the truncated weights bracket the true ones accordingly.
    """

    kind = "mixed-erlang"

    def __init__(self, beta: float, shape_offset: int, eta, tail_mass: float = 0.0):
        if beta <= 0:
            raise ValueError("rate must be positive")
        eta = np.asarray(eta, dtype=float)
        if eta.min() < -1e-15:
            raise ValueError("mixture weights must be nonnegative")
        total = eta.sum() + tail_mass
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"mixture mass {total} deviates from 1 beyond 1e-10")
        keep = eta > 0
        self.beta = float(beta)
        self.shapes = (shape_offset + np.nonzero(keep)[0]).astype(float)
        self.eta = eta[keep]
        self.tail_mass = float(tail_mass)

    def mean(self) -> float:
        return float(np.dot(self.eta, self.shapes)) / self.beta

    def variance(self) -> float:
        second = float(np.dot(self.eta, self.shapes * (self.shapes + 1.0))) / self.beta**2
        return second - self.mean() ** 2

    def cdf(self, x) -> np.ndarray | float:
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        out = np.zeros_like(x)
        pos = x > 0
        if pos.any():
            out[pos] = special.gammainc(self.shapes[None, :], self.beta * x[pos, None]) @ self.eta
        return float(out[0]) if scalar else out

    def quantile(self, level: float, tol: float = 1e-10) -> float:
        if not 0 < level < 1:
            raise ValueError("level must be inside (0,1)")
        lo, hi = 0.0, self.mean() + 10.0 * np.sqrt(self.variance()) + 1.0
        while self.cdf(hi) < level:
            hi *= 2.0
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if self.cdf(mid) >= level:
                hi = mid
            else:
                lo = mid
        return hi

    def stop_loss(self, t: float) -> float:
        """E[(S - t)+] from the analytic Erlang tail integrals."""
        if t <= 0:
            return self.mean() - t
        surv_next = 1.0 - special.gammainc(self.shapes + 1.0, self.beta * t)
        surv = 1.0 - special.gammainc(self.shapes, self.beta * t)
        return float(np.dot(self.eta, (self.shapes / self.beta) * surv_next - t * surv))

    def log_mgf(self, gamma: float) -> float:
        if gamma >= self.beta:
            raise ValueError(f"mgf diverges: gamma={gamma} at or above the mixture rate {self.beta}")
        return float(
            special.logsumexp(np.log(self.eta) + self.shapes * np.log(self.beta / (self.beta - gamma)))
        )


class EmpiricalDistribution:
    """Sorted Monte Carlo sample with plug-in estimators."""

    kind = "empirical"

    def __init__(self, samples):
        samples = np.sort(np.asarray(samples, dtype=float))
        if samples.size < 2:
            raise ValueError("need at least two samples")
        self.samples = samples
        self.n = samples.size

    def mean(self) -> float:
        return float(self.samples.mean())

    def variance(self) -> float:
        return float(self.samples.var(ddof=1))

    def cdf(self, x) -> np.ndarray | float:
        return np.searchsorted(self.samples, np.asarray(x, dtype=float), side="right") / self.n

    def quantile(self, level: float) -> float:
        idx = int(np.ceil(level * self.n)) - 1
        return float(self.samples[max(idx, 0)])

    def stop_loss(self, t: float) -> float:
        return float(np.clip(self.samples - t, 0.0, None).mean())

    def log_mgf(self, gamma: float) -> float:
        return float(special.logsumexp(gamma * self.samples) - np.log(self.n))


AggregateDistribution = (
    LatticeDistribution | GridDistribution | MixedErlangDistribution | EmpiricalDistribution
)
