"""Distribution of the aggregate sum under GFGM dependence.

For a common margin the sum's law depends on the driving Bernoulli
distribution only through its component-sum pmf, so each path mixes over
that pmf:

* discrete margins: the sum's generating function is a mixture of powers of
  the two split-component generating functions; pmf values are extracted on
  a power-of-two grid with the FFT,
* exponential margins: the Laplace transform is a mixture of Erlang terms;
  each exponential factor below the base rate expands as a geometric
  compound, giving negative-binomial weights (numerically stable at high
  dimension, unlike partial fractions with alternating signs),
* uniform margins: the two split densities are discretized mean-preservingly
  on a step grid and convolved by FFT.

Heterogeneous discrete margins mix over the driver's atoms instead, with the
per-coordinate transforms cached.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np
from scipy import stats

from .distributions import GridDistribution, LatticeDistribution, MixedErlangDistribution
from .drivers import as_driver
from .margins import (
    DiscreteMargin,
    ExponentialMargin,
    UniformMargin,
    v0_stop_loss,
    v0v1_stop_loss,
)
from .sums import ExtremalSumPoint, SumPmf

_NEG_CLIP = 1e-12
_ETA_EPS = 1e-12


def _sum_values(sum_pmf) -> list[tuple[int, float]]:
    """Support of a sum pmf (or extremal point) as (k, float weight) pairs."""
    if isinstance(sum_pmf, ExtremalSumPoint):
        sum_pmf = sum_pmf.pmf
    if not isinstance(sum_pmf, SumPmf):
        raise TypeError(f"expected a sum pmf, got {type(sum_pmf).__name__}")
    return [(k, float(v)) for k, v in enumerate(sum_pmf.values) if v != 0]


def _fft_length(n: int) -> int:
    return 1 << max(1, (n - 1).bit_length())


def _ifft_pmf(spectrum: np.ndarray, length: int, size: int) -> np.ndarray:
    pmf = np.fft.irfft(spectrum, n=length)[:size]
    low = pmf.min()
    if low < -1e-9:
        raise ArithmeticError(f"FFT round-off produced mass {low}, beyond tolerance")
    pmf = np.clip(pmf, 0.0, None)
    return pmf / pmf.sum()


def aggregate_discrete_common(
    margin: DiscreteMargin, d: int, sum_pmf, p
) -> LatticeDistribution:
    """Sum of d identically distributed discrete margins under the given driver sum.

    The spectrum is sum_k g(k) * Z0hat^(d-k) * Z1hat^k on a power-of-two grid
    covering {0, ..., d*n}; tiny negative round-off is clipped and the pmf
    renormalized.  The mean is checked against d*((1-p)E[Z0] + p E[Z1]).
    """
    if d < 1:
        raise ValueError("need d >= 1")
    pairs = _sum_values(sum_pmf)
    size = d * margin.n + 1
    length = _fft_length(size)
    z = margin.z_pmfs(p)
    z0_hat = np.fft.rfft(z.z0, n=length)
    z1_hat = np.fft.rfft(z.z1, n=length)
    spectrum = np.zeros(length // 2 + 1, dtype=complex)
    for k, w in pairs:
        spectrum += w * z0_hat ** (d - k) * z1_hat**k
    pmf = _ifft_pmf(spectrum, length, size)
    dist = LatticeDistribution(pmf)
    e0, e1 = margin.z_means(p)
    pf = float(Fraction(p)) if isinstance(p, str) else float(p)
    mean_sum = sum(k * w for k, w in pairs)
    expected = (d - mean_sum) * e0 + mean_sum * e1
    if abs(dist.mean() - expected) > 1e-8 * max(1.0, abs(expected)):
        raise ArithmeticError(
            f"aggregate mean {dist.mean()} deviates from {expected} beyond 1e-8"
        )
    return dist


def aggregate_discrete_general(margins: list[DiscreteMargin], driver) -> LatticeDistribution:
    """Sum with heterogeneous discrete margins: mixture over the driver atoms.

    Per-coordinate split transforms are cached once; each atom contributes
    the product of its selected transforms.  Margin parameters p_j come from
    the driver margins.
    """
    driver = as_driver(driver)
    d = driver.d
    if len(margins) != d:
        raise ValueError(f"need {d} margins, got {len(margins)}")
    if d > 25:
        raise ValueError(f"atom mixture is capped at d=25, got {d}")
    p = driver.margins()
    size = sum(m.n for m in margins) + 1
    length = _fft_length(size)
    z_hats = []
    for j, margin in enumerate(margins):
        z = margin.z_pmfs(p[j])
        z_hats.append(
            (np.fft.rfft(z.z0, n=length), np.fft.rfft(z.z1, n=length))
        )
    spectrum = np.zeros(length // 2 + 1, dtype=complex)
    for mask, w in driver.atoms():
        term = np.full(length // 2 + 1, float(w), dtype=complex)
        for j in range(d):
            term *= z_hats[j][(mask >> j) & 1]
        spectrum += term
    return LatticeDistribution(_ifft_pmf(spectrum, length, size))


def erlang_mixture_weights(rate: float, d: int, sum_pmf, p) -> tuple[float, np.ndarray, float]:
    """Base rate and mixture weights for the exponential-margin sum.

    The sum is  Erlang(d, beta) + extra stages, beta = rate/(1-p): each
    exponential factor with the smaller rate expands as a geometric compound
    of Erlang(beta) stages, so conditioning on the driver sum k adds a
    negative-binomial NB(k, 1-p) number of stages on top of k.  Weights are
    truncated once the retained mass reaches 1 - 1e-12.
    """
    pf = float(Fraction(p)) if isinstance(p, str) else float(p)
    if not 0 < pf < 1:
        raise ValueError(f"p={pf} outside (0,1)")
    if rate <= 0:
        raise ValueError("rate must be positive")
    beta = rate / (1.0 - pf)
    pairs = _sum_values(sum_pmf)
    success = 1.0 - pf  # success probability of each geometric stage count
    blocks = []
    top = 0
    for k, w in pairs:
        if k == 0:
            blocks.append((0, np.array([w])))
            continue
        m_max = int(stats.nbinom.ppf(1.0 - _ETA_EPS * 1e-3, k, success)) + 10
        pmf = stats.nbinom.pmf(np.arange(m_max + 1), k, success)
        blocks.append((k, w * pmf))
        top = max(top, k + m_max)
    eta = np.zeros(top + 1)
    for k, chunk in blocks:
        eta[k : k + chunk.size] += chunk
    cum = np.cumsum(eta)
    cut = int(np.searchsorted(cum, 1.0 - _ETA_EPS)) + 1
    eta = eta[:cut]
    tail = max(0.0, 1.0 - eta.sum())
    return beta, eta, tail


def aggregate_exponential(rate: float, d: int, sum_pmf, p) -> MixedErlangDistribution:
    """Mixed-Erlang law of the sum of d exponential margins under the driver sum."""
    if d < 1:
        raise ValueError("need d >= 1")
    beta, eta, tail = erlang_mixture_weights(rate, d, sum_pmf, p)
    return MixedErlangDistribution(beta, d, eta, tail)


def _discretize_unit_density(stop_loss_fn, p, h: float) -> np.ndarray:
    """Mean-preserving lumping of a density on [0,1] onto the step-h lattice.

    Mass at node k is the second difference of the stop-loss transform,
    (L((k-1)h) - 2 L(kh) + L((k+1)h))/h, with the boundary node absorbing
    1 - (L(0) - L(h))/h; total mass and mean are preserved exactly.
    """
    nodes = int(np.ceil(1.0 / h)) + 1
    t = np.arange(nodes + 1) * h
    ell = np.where(t < 1.0, stop_loss_fn(np.clip(t, 0.0, 1.0), p), 0.0)
    pmf = np.empty(nodes)
    pmf[0] = 1.0 - (ell[0] - ell[1]) / h
    pmf[1:] = (ell[:-2] - 2.0 * ell[1:-1] + ell[2:]) / h
    return np.clip(pmf, 0.0, None)


def aggregate_uniform(p, d: int, sum_pmf, grid_h: float | None = None) -> GridDistribution:
    """Sum of d uniform margins (the copula's own sum) on a step grid.

    Mixes, over the driver sum k, the k-fold convolution of the V0*V1 lump
    with the (d-k)-fold convolution of the V0 lump.  Default step is d/2^15.
    """
    if d < 1:
        raise ValueError("need d >= 1")
    h = d / 2.0**15 if grid_h is None else float(grid_h)
    if h <= 0:
        raise ValueError("grid step must be positive")
    size = int(np.ceil(d / h)) + d + 1
    if size > 1 << 22:
        raise MemoryError(f"grid of {size} nodes exceeds the budget; raise grid_h")
    length = _fft_length(size)
    f0 = _discretize_unit_density(v0_stop_loss, p, h)
    f1 = _discretize_unit_density(v0v1_stop_loss, p, h)
    f0_hat = np.fft.rfft(f0, n=length)
    f1_hat = np.fft.rfft(f1, n=length)
    spectrum = np.zeros(length // 2 + 1, dtype=complex)
    for k, w in _sum_values(sum_pmf):
        spectrum += w * f0_hat ** (d - k) * f1_hat**k
    pmf = _ifft_pmf(spectrum, length, size)
    dist = GridDistribution(h, pmf)
    pf = float(Fraction(p)) if isinstance(p, str) else float(p)
    e0, e1 = 1.0 / (2.0 - pf), 1.0 / (2.0 * (2.0 - pf))
    mean_sum = sum(k * w for k, w in _sum_values(sum_pmf))
    expected = (d - mean_sum) * e0 + mean_sum * e1  # d/2 when the driver sum has mean d*p
    if abs(dist.mean() - expected) > 1e-6:
        raise ArithmeticError(f"uniform-sum mean {dist.mean()} deviates from {expected}")
    return dist


def aggregate(margin, d: int, sum_pmf, p, grid_h: float | None = None):
    """Dispatch on the margin family; "bernoulli" measures the driver sum itself."""
    if margin == "bernoulli":
        g = sum_pmf.pmf if isinstance(sum_pmf, ExtremalSumPoint) else sum_pmf
        return LatticeDistribution.from_sum_pmf(g)
    if isinstance(margin, ExponentialMargin):
        return aggregate_exponential(margin.rate, d, sum_pmf, p)
    if isinstance(margin, DiscreteMargin):
        return aggregate_discrete_common(margin, d, sum_pmf, p)
    if isinstance(margin, UniformMargin):
        return aggregate_uniform(p, d, sum_pmf, grid_h)
    raise ValueError(f"unsupported margin type {type(margin).__name__}")
