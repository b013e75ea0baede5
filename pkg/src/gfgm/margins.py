"""Marginal distributions and their conditional-mixture components.

Each coordinate of a GFGM-coupled vector splits, conditionally on its
Bernoulli indicator, into one of two transformed variables: the quantile
transform of V0 ~ Beta(1/(1-p), 1) when the indicator is 0 and of V0*V1
(V1 uniform, independent) when it is 1.  The two conditional cdfs are

    F_{V0}(u)    = u^(1/(1-p)),
    F_{V0 V1}(u) = u/p - ((1-p)/p) * u^(1/(1-p)),

and they mix back to the uniform cdf: p*F_{V0 V1} + (1-p)*F_{V0} = id.

This module provides the margin families used across the package
(exponential, discrete on {0..n}, standard uniform), their split components
(pmfs for discrete margins, expectations for all), and the closed-form
lower/upper tail quantities needed for dependence-free bounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate


def _p_float(p) -> float:
    if isinstance(p, Fraction):
        return float(p)
    return float(Fraction(p)) if isinstance(p, str) else float(p)


def v0_cdf(u, p) -> np.ndarray | float:
    """cdf of V0 ~ Beta(1/(1-p), 1) on [0,1]."""
    pf = _p_float(p)
    return np.power(u, 1.0 / (1.0 - pf))


def v0v1_cdf(u, p) -> np.ndarray | float:
    """cdf of the product V0*V1 on [0,1]."""
    pf = _p_float(p)
    u = np.asarray(u, dtype=float)
    return u / pf - ((1.0 - pf) / pf) * np.power(u, 1.0 / (1.0 - pf))


def v0_pdf(u, p) -> np.ndarray | float:
    pf = _p_float(p)
    r = 1.0 / (1.0 - pf)
    return r * np.power(u, r - 1.0)


def v0v1_pdf(u, p) -> np.ndarray | float:
    pf = _p_float(p)
    r = 1.0 / (1.0 - pf)
    return (1.0 - np.power(u, r - 1.0)) / pf


def v0_stop_loss(t, p) -> np.ndarray | float:
    """E[(V0 - t)+] for t in [0,1], closed form."""
    pf = _p_float(p)
    s = (2.0 - pf) / (1.0 - pf)  # exponent of the integrated cdf
    t = np.asarray(t, dtype=float)
    return (1.0 - t) - ((1.0 - pf) / (2.0 - pf)) * (1.0 - np.power(t, s))


def v0v1_stop_loss(t, p) -> np.ndarray | float:
    """E[(V0*V1 - t)+] for t in [0,1], closed form."""
    pf = _p_float(p)
    s = (2.0 - pf) / (1.0 - pf)
    t = np.asarray(t, dtype=float)
    integral_cdf = (1.0 - t * t) / (2.0 * pf) - ((1.0 - pf) ** 2 / (pf * (2.0 - pf))) * (
        1.0 - np.power(t, s)
    )
    return (1.0 - t) - integral_cdf


@dataclass(frozen=True)
class ZPair:
    """Split pmfs of a discrete margin, conditional on the indicator value."""

    z0: np.ndarray
    z1: np.ndarray
    p: float
    margin_pmf: np.ndarray

    def mixture_gap(self) -> float:
        """Max deviation of p*z1 + (1-p)*z0 from the margin pmf (identity check)."""
        mix = self.p * self.z1 + (1.0 - self.p) * self.z0
        return float(np.max(np.abs(mix - self.margin_pmf)))


class ExponentialMargin:
    """Exponential margin with the given rate."""

    kind = "exp"

    def __init__(self, rate: float):
        if rate <= 0:
            raise ValueError(f"rate must be positive, got {rate}")
        self.rate = float(rate)

    @property
    def mean(self) -> float:
        return 1.0 / self.rate

    @property
    def var(self) -> float:
        return 1.0 / self.rate**2

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x < 0, 0.0, 1.0 - np.exp(-self.rate * x))

    def ppf(self, u):
        return -np.log1p(-np.asarray(u, dtype=float)) / self.rate

    def es(self, alpha: float) -> float:
        return (1.0 - np.log1p(-alpha)) / self.rate

    def ltvar(self, alpha: float) -> float:
        """Lower tail value-at-risk (1/a) * int_0^a VaR_u du, closed form."""
        a = float(alpha)
        return (1.0 - (1.0 - a) * (1.0 - np.log1p(-a))) / (self.rate * a)

    def z_means(self, p) -> tuple[float, float]:
        """Split-component means under the additive exponential representation.

        Exponential margins split additively, X = W1 + I*W2 with W1 of mean
        (1-p)/rate and W2 of mean 1/rate, which is the convention behind the
        mixed-Erlang aggregation path and the identity "pair correlation =
        indicator covariance".  It matches the quantile-transform split
        exactly at p = 1/2 (up to relabeling the indicator); for other p the
        quantile split is available through QuantileMargin.
        """
        pf = _p_float(p)
        return (1.0 - pf) / self.rate, (2.0 - pf) / self.rate

    def describe(self) -> str:
        return f"exp:{self.rate:g}"


class UniformMargin:
    """Standard uniform margin on [0,1]."""

    kind = "uniform"

    mean = 0.5
    var = 1.0 / 12.0

    def cdf(self, x):
        return np.clip(np.asarray(x, dtype=float), 0.0, 1.0)

    def ppf(self, u):
        return np.asarray(u, dtype=float)

    def es(self, alpha: float) -> float:
        return (1.0 + alpha) / 2.0

    def ltvar(self, alpha: float) -> float:
        return alpha / 2.0

    def z_means(self, p) -> tuple[float, float]:
        pf = _p_float(p)
        return 1.0 / (2.0 - pf), 1.0 / (2.0 * (2.0 - pf))

    def describe(self) -> str:
        return "uniform"


class DiscreteMargin:
    """Margin supported on {0, 1, ..., n} with nonnegative pmf summing to one."""

    kind = "discrete"

    def __init__(self, pmf):
        pmf = np.asarray(pmf, dtype=float)
        if pmf.ndim != 1 or pmf.size < 1:
            raise ValueError("pmf must be a nonempty vector")
        if pmf.min() < -1e-12:
            raise ValueError(f"pmf entries must be nonnegative, min={pmf.min()}")
        total = pmf.sum()
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"pmf must sum to 1 within 1e-12, got {total}")
        self.pmf = np.clip(pmf, 0.0, None) / total
        self._cdf = np.cumsum(self.pmf)
        self._cdf[-1] = 1.0
        self.n = pmf.size - 1

    @classmethod
    def from_power_cdf(cls, a: float, c: float, n: int) -> "DiscreteMargin":
        """Margin with F(k) = 1 - a + a*(k/n)^c: an atom at zero and a power tail."""
        k = np.arange(n + 1, dtype=float)
        cdf = 1.0 - a + a * (k / n) ** c
        pmf = np.diff(cdf, prepend=0.0)
        return cls(pmf)

    @classmethod
    def point_mass(cls, k: int) -> "DiscreteMargin":
        pmf = np.zeros(k + 1)
        pmf[k] = 1.0
        return cls(pmf)

    @classmethod
    def bernoulli(cls, q: float) -> "DiscreteMargin":
        return cls(np.array([1.0 - q, q]))

    @property
    def mean(self) -> float:
        return float(np.dot(np.arange(self.n + 1), self.pmf))

    @property
    def var(self) -> float:
        k = np.arange(self.n + 1)
        return float(np.dot(k * k, self.pmf) - self.mean**2)

    def cdf(self, x):
        x = np.floor(np.asarray(x, dtype=float)).astype(int)
        x = np.clip(x, -1, self.n)
        padded = np.concatenate([[0.0], self._cdf])
        return padded[x + 1]

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        return np.searchsorted(self._cdf, u - 1e-12, side="left").astype(float)

    def quantile(self, alpha: float) -> int:
        return int(np.searchsorted(self._cdf, alpha - 1e-12, side="left"))

    def es(self, alpha: float) -> float:
        v = self.quantile(alpha)
        k = np.arange(self.n + 1)
        tail = np.dot(np.clip(k - v, 0, None), self.pmf)
        return v + tail / (1.0 - alpha)

    def ltvar(self, alpha: float) -> float:
        """(1/a) * int_0^a VaR_u du by exact partial sums over the cdf jumps."""
        upper = np.minimum(self._cdf, alpha)
        lower = np.minimum(np.concatenate([[0.0], self._cdf[:-1]]), alpha)
        k = np.arange(self.n + 1)
        return float(np.dot(k, upper - lower)) / alpha

    def z_pmfs(self, p) -> ZPair:
        """Conditional pmfs of the split components, from the two mixed cdfs."""
        pf = _p_float(p)
        cdf = np.concatenate([[0.0], self._cdf])
        cdf0 = v0_cdf(cdf, pf)
        cdf1 = v0v1_cdf(cdf, pf)
        z0 = np.diff(cdf0)
        z1 = np.diff(cdf1)
        return ZPair(np.clip(z0, 0.0, None), np.clip(z1, 0.0, None), pf, self.pmf.copy())

    def z_means(self, p) -> tuple[float, float]:
        """E[Z0] = n - sum F_{V0}(F(k)), and likewise for Z1, closed sums."""
        pf = _p_float(p)
        body = self._cdf[:-1]
        e0 = self.n - float(np.sum(v0_cdf(body, pf)))
        e1 = self.n - float(np.sum(v0v1_cdf(body, pf)))
        return e0, e1

    def describe(self) -> str:
        return f"discrete:n={self.n}"


class QuantileMargin:
    """Generic margin defined by a quantile function; moments by quadrature."""

    kind = "quantile"

    def __init__(self, ppf, mean: float | None = None, var: float | None = None):
        self._ppf = ppf
        self._mean = mean
        self._var = var

    def ppf(self, u):
        return np.asarray(self._ppf(np.asarray(u, dtype=float)), dtype=float)

    @property
    def mean(self) -> float:
        if self._mean is None:
            val, _ = integrate.quad(lambda u: float(self._ppf(u)), 0.0, 1.0, epsabs=1e-10)
            object.__setattr__(self, "_mean", val)
        return self._mean

    @property
    def var(self) -> float:
        if self._var is None:
            m = self.mean
            val, _ = integrate.quad(
                lambda u: (float(self._ppf(u)) - m) ** 2, 0.0, 1.0, epsabs=1e-10
            )
            object.__setattr__(self, "_var", val)
        return self._var

    def z_means(self, p) -> tuple[float, float]:
        """Expectations of the split components by adaptive quadrature."""
        pf = _p_float(p)
        e0, _ = integrate.quad(
            lambda u: float(self._ppf(u)) * float(v0_pdf(u, pf)), 0.0, 1.0, epsabs=1e-10
        )
        e1, _ = integrate.quad(
            lambda u: float(self._ppf(u)) * float(v0v1_pdf(u, pf)), 0.0, 1.0, epsabs=1e-10
        )
        return e0, e1

    def describe(self) -> str:
        return "quantile"


Margin = ExponentialMargin | UniformMargin | DiscreteMargin | QuantileMargin


def margin_from_json(obj: dict) -> Margin:
    kind = obj.get("type")
    if kind == "exp":
        return ExponentialMargin(float(obj["rate"]))
    if kind == "uniform":
        return UniformMargin()
    if kind == "discrete":
        if "pmf" in obj:
            return DiscreteMargin(np.asarray(obj["pmf"], dtype=float))
        power = obj["power"]
        return DiscreteMargin.from_power_cdf(float(power["a"]), float(power["c"]), int(power["n"]))
    raise ValueError(f"unknown margin type {kind!r}")


def margin_to_json(margin: Margin) -> dict:
    if isinstance(margin, ExponentialMargin):
        return {"type": "exp", "rate": margin.rate}
    if isinstance(margin, UniformMargin):
        return {"type": "uniform"}
    if isinstance(margin, DiscreteMargin):
        return {"type": "discrete", "pmf": margin.pmf.tolist()}
    raise TypeError(f"cannot serialize margin {type(margin).__name__}")
