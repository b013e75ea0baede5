"""Exact arithmetic on multivariate Bernoulli pmfs with fixed margins.

A d-variate Bernoulli pmf is stored as a vector of 2^d rationals indexed by
the binary points in reverse-lexicographic order: index ``i`` encodes the
point whose coordinate j (1-based) equals bit j-1 of ``i``.  For d = 3 the
order is 000, 100, 010, 110, 001, 101, 011, 111.

The set of such pmfs with margins Bernoulli(p_j) is a convex polytope, so
membership and extremal identities are decided in exact rational arithmetic.
Floats never enter this module; they appear only when values are exported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterator, Sequence, Union

from .sums import SumPmf

RationalLike = Union[Fraction, int, str]

# Dense 2^d storage is capped; larger dimensions go through the
# exchangeable / sparse-atom representations.
MAX_DENSE_DIM = 25


def as_fraction(x: RationalLike) -> Fraction:
    """Coerce to Fraction, rejecting floats to keep the module exact."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    raise TypeError(f"expected an exact rational (Fraction, int or 'num/den' string), got {x!r}")


def format_fraction(x: Fraction) -> str:
    """Canonical 'num/den' form (gcd-reduced, positive denominator)."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _bit(mask: int, idx0: int) -> int:
    return (mask >> idx0) & 1


@dataclass(frozen=True)
class MarginVector:
    """Margin probabilities p_1..p_d, each a rational strictly inside (0,1)."""

    probs: tuple[Fraction, ...]

    def __post_init__(self):
        probs = tuple(as_fraction(p) for p in self.probs)
        for p in probs:
            if not (0 < p < 1):
                raise ValueError(f"margin probability {p} outside (0,1)")
        object.__setattr__(self, "probs", probs)

    @property
    def d(self) -> int:
        return len(self.probs)

    def __len__(self) -> int:
        return len(self.probs)

    def __iter__(self) -> Iterator[Fraction]:
        return iter(self.probs)

    def __getitem__(self, j: int) -> Fraction:
        """Margin of coordinate j (1-based, matching the usual notation)."""
        if not 1 <= j <= self.d:
            raise IndexError(f"coordinate {j} out of range 1..{self.d}")
        return self.probs[j - 1]


def margin_vector(p: Union[MarginVector, Sequence[RationalLike], RationalLike], d: int | None = None) -> MarginVector:
    """Build a MarginVector from a sequence, or replicate a scalar d times."""
    if isinstance(p, MarginVector):
        return p
    if isinstance(p, (Fraction, int, str)):
        if d is None:
            raise ValueError("scalar margin requires an explicit dimension")
        return MarginVector((as_fraction(p),) * d)
    return MarginVector(tuple(as_fraction(q) for q in p))


@dataclass(frozen=True)
class BernoulliPmf:
    """Dense pmf over {0,1}^d in reverse-lexicographic order, exact rationals.

    Invariants enforced at construction: 2^d entries, all >= 0, summing to
    exactly 1.
    """

    d: int
    values: tuple[Fraction, ...]

    def __post_init__(self):
        if not 1 <= self.d <= MAX_DENSE_DIM:
            raise ValueError(f"dimension {self.d} outside 1..{MAX_DENSE_DIM}")
        values = tuple(as_fraction(v) for v in self.values)
        if len(values) != 1 << self.d:
            raise ValueError(f"expected {1 << self.d} entries for d={self.d}, got {len(values)}")
        if any(v < 0 for v in values):
            raise ValueError("pmf entries must be nonnegative")
        if sum(values) != 1:
            raise ValueError("pmf entries must sum to exactly 1")
        object.__setattr__(self, "values", values)

    def __getitem__(self, mask: int) -> Fraction:
        return self.values[mask]

    def atoms(self) -> list[tuple[int, Fraction]]:
        """Nonzero entries as (mask, weight) pairs."""
        return [(m, v) for m, v in enumerate(self.values) if v != 0]

    def margin(self, j: int) -> Fraction:
        """P(I_j = 1) for 1-based coordinate j."""
        if not 1 <= j <= self.d:
            raise IndexError(f"coordinate {j} out of range 1..{self.d}")
        idx0 = j - 1
        return sum((v for m, v in enumerate(self.values) if _bit(m, idx0)), Fraction(0))

    def margins(self) -> tuple[Fraction, ...]:
        return tuple(self.margin(j) for j in range(1, self.d + 1))

    def is_exchangeable(self) -> bool:
        """True when the pmf only depends on the number of ones."""
        by_weight: dict[int, Fraction] = {}
        for m, v in enumerate(self.values):
            k = m.bit_count()
            if k in by_weight and by_weight[k] != v:
                return False
            by_weight.setdefault(k, v)
        return True

    def to_json(self) -> dict:
        return {"d": self.d, "order": "revlex", "values": [format_fraction(v) for v in self.values]}

    @classmethod
    def from_json(cls, obj: dict) -> "BernoulliPmf":
        if obj.get("order", "revlex") != "revlex":
            raise ValueError(f"unsupported index order {obj.get('order')!r}")
        return cls(int(obj["d"]), tuple(as_fraction(v) for v in obj["values"]))


def _as_values(f: Union[BernoulliPmf, Sequence[RationalLike]]) -> tuple[int, tuple[Fraction, ...]]:
    if isinstance(f, BernoulliPmf):
        return f.d, f.values
    values = tuple(as_fraction(v) for v in f)
    d = len(values).bit_length() - 1
    if 1 << d != len(values):
        raise ValueError(f"pmf length {len(values)} is not a power of two")
    return d, values


def validate_membership(f: Union[BernoulliPmf, Sequence[RationalLike]], p) -> bool:
    """Exact test of membership in the Fréchet class with margins Bernoulli(p_j).

    Equivalent to the linear-constraint characterization (margin rows plus
    normalization): nonnegative entries summing to one whose univariate
    margins equal p_j exactly.  Raises on a dimension mismatch, returns
    False on any other violation.
    """
    d, values = _as_values(f)
    pv = margin_vector(p)
    if pv.d != d:
        raise ValueError(f"margin vector has length {pv.d}, pmf has dimension {d}")
    if any(v < 0 for v in values) or sum(values) != 1:
        return False
    for j in range(d):
        mj = sum((v for m, v in enumerate(values) if _bit(m, j)), Fraction(0))
        if mj != pv.probs[j]:
            return False
    return True


def sum_pmf(f: BernoulliPmf) -> SumPmf:
    """Distribution of the component sum, grouped by Hamming weight."""
    out = [Fraction(0)] * (f.d + 1)
    for m, v in enumerate(f.values):
        out[m.bit_count()] += v
    return SumPmf(f.d, tuple(out))


def exchangeable_lift(g: SumPmf) -> BernoulliPmf:
    """The unique exchangeable pmf whose component sum has distribution g."""
    d = g.d
    if d > MAX_DENSE_DIM:
        raise ValueError(f"dense lift not available for d={d} > {MAX_DENSE_DIM}")
    values = [g.values[m.bit_count()] / math.comb(d, m.bit_count()) for m in range(1 << d)]
    return BernoulliPmf(d, tuple(values))


def nu_coefficient(f: BernoulliPmf, p, subset: Sequence[int]) -> Fraction:
    """Dependence coefficient E[prod_{j in subset} (I_j - p_j)/p_j], exact.

    ``subset`` holds 1-based coordinates, strictly increasing, size >= 2.
    """
    pv = margin_vector(p)
    subset = tuple(subset)
    if len(subset) < 2 or list(subset) != sorted(set(subset)):
        raise ValueError(f"subset must be >=2 strictly increasing coordinates, got {subset}")
    total = Fraction(0)
    for m, v in f.atoms():
        term = v
        for j in subset:
            pj = pv[j]
            term *= (Fraction(_bit(m, j - 1)) - pj) / pj
        total += term
    return total


def nu_coefficients(f: BernoulliPmf, p) -> dict[tuple[int, ...], Fraction]:
    """All dependence coefficients, keyed by the coordinate subset.

    Cost grows with 2^d times the support size, so the full map is only
    offered up to d = 20; use :func:`nu_coefficient` for single subsets.
    """
    pv = margin_vector(p)
    if f.d != pv.d:
        raise ValueError("dimension mismatch between pmf and margins")
    if f.d > 20:
        raise ValueError(f"full coefficient map not offered for d={f.d} > 20")
    atoms = f.atoms()
    # Pre-divide the centered indicators once per coordinate.
    centered = [
        [(Fraction(_bit(m, j)) - pv.probs[j]) / pv.probs[j] for m, _ in atoms]
        for j in range(f.d)
    ]
    out: dict[tuple[int, ...], Fraction] = {}
    for k in range(2, f.d + 1):
        for subset in combinations(range(f.d), k):
            total = Fraction(0)
            for a, (_, w) in enumerate(atoms):
                term = w
                for j in subset:
                    term *= centered[j][a]
                total += term
            out[tuple(j + 1 for j in subset)] = total
    return out


def pair_covariance(f: BernoulliPmf, p, j1: int, j2: int) -> tuple[Fraction, float]:
    """Covariance (exact) and Pearson correlation (float) of (I_j1, I_j2)."""
    pv = margin_vector(p)
    if not 1 <= j1 < j2 <= f.d:
        raise IndexError(f"need 1 <= j1 < j2 <= {f.d}, got ({j1}, {j2})")
    joint = sum(
        (v for m, v in enumerate(f.values) if _bit(m, j1 - 1) and _bit(m, j2 - 1)),
        Fraction(0),
    )
    cov = joint - pv[j1] * pv[j2]
    denom = pv[j1] * (1 - pv[j1]) * pv[j2] * (1 - pv[j2])
    return cov, float(cov) / math.sqrt(float(denom))


def covariance_bounds(p, j1: int, j2: int) -> tuple[Fraction, Fraction]:
    """Sharp covariance range for a Bernoulli pair with margins p_j1, p_j2.

    The upper bound min(p_j1, p_j2) - p_j1 p_j2 symmetrizes the formula
    p_j1 (1 - p_j2), which assumes p_j1 <= p_j2.
    """
    pv = margin_vector(p)
    if not 1 <= j1 < j2 <= pv.d:
        raise IndexError(f"need 1 <= j1 < j2 <= {pv.d}, got ({j1}, {j2})")
    a, b = pv[j1], pv[j2]
    lower = max(a + b - 1, Fraction(0)) - a * b
    upper = min(a, b) - a * b
    return lower, upper


def independence_pmf(p) -> BernoulliPmf:
    """Product pmf with independent Bernoulli(p_j) coordinates."""
    pv = margin_vector(p)
    values = []
    for m in range(1 << pv.d):
        w = Fraction(1)
        for j in range(pv.d):
            w *= pv.probs[j] if _bit(m, j) else 1 - pv.probs[j]
        values.append(w)
    return BernoulliPmf(pv.d, tuple(values))


def comonotone_pmf(p) -> BernoulliPmf:
    """Upper Fréchet bound: I_j = 1{U <= p_j} for a common uniform U."""
    pv = margin_vector(p)
    order = sorted(range(pv.d), key=lambda j: pv.probs[j], reverse=True)
    values = [Fraction(0)] * (1 << pv.d)
    prev = Fraction(1)
    mask = 0
    for j in order:
        values[mask] += prev - pv.probs[j]
        prev = pv.probs[j]
        mask |= 1 << j
    values[mask] += prev
    return BernoulliPmf(pv.d, tuple(values))


def countermonotone_pmf(p1: RationalLike, p2: RationalLike) -> BernoulliPmf:
    """Lower Fréchet bound for a Bernoulli pair."""
    a, b = as_fraction(p1), as_fraction(p2)
    f11 = max(a + b - 1, Fraction(0))
    return BernoulliPmf(2, (1 - a - b + f11, a - f11, b - f11, f11))
