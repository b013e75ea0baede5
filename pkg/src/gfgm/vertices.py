"""Exact vertex enumeration for Bernoulli Fréchet classes at small dimension.

The class is the polytope {f >= 0, margin_j(f) = p_j, sum(f) = 1} over 2^d
variables with d+1 independent equality constraints, so every vertex is the
unique nonnegative solution supported on at most d+1 points.  Enumeration
walks bases (independent column subsets of size d+1), solves each square
system in exact rationals, keeps nonnegative solutions and deduplicates.
Dependent column prefixes are pruned with an integer echelon carried along
the recursion, which keeps this module free of floating point entirely.

The search space is C(2^d, d+1), so a hard cap (default d = 5, about 9e5
candidate bases) guards against combinatorial blowup; higher-dimensional
work goes through the analytic extremal points of the sum class instead.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .bernoulli import BernoulliPmf, MarginVector, margin_vector

DEFAULT_CAP = 5


class EnumerationCapError(ValueError):
    """Vertex enumeration refused: combinatorial blowup beyond the cap."""


class NotInPolytopeError(ValueError):
    """Decomposition target is not a convex combination of the given vertices."""


def _columns(pv: MarginVector) -> tuple[list[tuple[int, ...]], list[int]]:
    """Integer constraint columns and right-hand side, denominators cleared per row."""
    d = pv.d
    dens = [q.denominator for q in pv.probs]
    cols = []
    for mask in range(1 << d):
        col = tuple(dens[j] if (mask >> j) & 1 else 0 for j in range(d)) + (1,)
        cols.append(col)
    rhs = [q.numerator for q in pv.probs] + [1]
    return cols, rhs


def _solve_square(col_ids: Sequence[int], cols, rhs, r: int) -> list[Fraction] | None:
    """Exact solution of the r x r system restricted to the chosen columns."""
    m = [[Fraction(cols[c][i]) for c in col_ids] + [Fraction(rhs[i])] for i in range(r)]
    for k in range(r):
        piv = next((i for i in range(k, r) if m[i][k] != 0), None)
        if piv is None:
            return None
        if piv != k:
            m[k], m[piv] = m[piv], m[k]
        for i in range(k + 1, r):
            if m[i][k]:
                factor = m[i][k] / m[k][k]
                m[i] = [a - factor * b for a, b in zip(m[i], m[k])]
    sol = [Fraction(0)] * r
    for i in range(r - 1, -1, -1):
        s = m[i][r]
        for j in range(i + 1, r):
            s -= m[i][j] * sol[j]
        sol[i] = s / m[i][i]
    return sol


def enumerate_vertices(p, cap: int = DEFAULT_CAP) -> list[BernoulliPmf]:
    """Complete, duplicate-free vertex set, sorted lexicographically.

    Args:
        p: margin vector (sequence of exact rationals in (0,1)).
        cap: maximum dimension accepted; above it the search space C(2^d, d+1)
            explodes and the call is refused.

    Every returned pmf satisfies the margin constraints exactly and has
    support of size at most d+1.
    """
    pv = margin_vector(p)
    d = pv.d
    if d > cap:
        raise EnumerationCapError(
            f"combinatorial blowup: vertex enumeration at d={d} needs "
            f"C({1 << d},{d + 1}) basis candidates; cap is d={cap}"
        )
    cols, rhs = _columns(pv)
    n = 1 << d
    r = d + 1
    found: dict[tuple[Fraction, ...], None] = {}

    def visit(start: int, chosen: list[int], pivots: list[tuple[int, tuple[int, ...]]]):
        depth = len(chosen)
        if depth == r:
            sol = _solve_square(chosen, cols, rhs, r)
            if sol is not None and all(x >= 0 for x in sol):
                values = [Fraction(0)] * n
                for mask, x in zip(chosen, sol):
                    values[mask] = x
                found.setdefault(tuple(values), None)
            return
        for c in range(start, n - (r - depth) + 1):
            vec = list(cols[c])
            for piv_row, piv_vec in pivots:
                if vec[piv_row]:
                    a, bval = piv_vec[piv_row], vec[piv_row]
                    vec = [a * x - bval * y for x, y in zip(vec, piv_vec)]
            piv_row = next((i for i, x in enumerate(vec) if x), None)
            if piv_row is None:
                continue  # column dependent on the chosen ones: no superset is a basis
            visit(c + 1, chosen + [c], pivots + [(piv_row, tuple(vec))])

    visit(0, [], [])
    return [BernoulliPmf(d, values) for values in sorted(found)]


def decompose(f: BernoulliPmf, vertices: Sequence[BernoulliPmf]) -> tuple[Fraction, ...]:
    """One exact convex decomposition of f over the given vertex set.

    Solves the feasibility program sum_k w_k r_k = f, w >= 0 (the weights sum
    to one automatically because every vertex sums to one) with a phase-one
    simplex in exact rationals.  Weights are not unique; any feasible vector
    is returned.

    Raises NotInPolytopeError when f is not in the convex hull.
    """
    if not vertices:
        raise ValueError("empty vertex list")
    m = len(f.values)
    nv = len(vertices)
    for v in vertices:
        if v.d != f.d:
            raise ValueError("vertex dimension mismatch")

    # Tableau rows: structural columns, artificial columns, rhs.
    rows = [
        [vertices[k].values[i] for k in range(nv)]
        + [Fraction(1) if a == i else Fraction(0) for a in range(m)]
        + [f.values[i]]
        for i in range(m)
    ]
    basis = [nv + i for i in range(m)]
    # Phase-one reduced costs: cost of artificials is 1.
    cost = [Fraction(0)] * (nv + m + 1)
    for row in rows:
        for j in range(nv + m + 1):
            cost[j] -= row[j]
    for a in range(m):
        cost[nv + a] += 1

    while True:
        enter = next((j for j in range(nv + m) if cost[j] < 0), None)
        if enter is None:
            break
        ratio = None
        leave = None
        for i in range(m):
            a = rows[i][enter]
            if a > 0:
                r = rows[i][-1] / a
                if ratio is None or r < ratio or (r == ratio and basis[i] < basis[leave]):
                    ratio, leave = r, i
        if leave is None:
            raise NotInPolytopeError("unbounded phase-one program")
        piv = rows[leave][enter]
        rows[leave] = [x / piv for x in rows[leave]]
        for i in range(m):
            if i != leave and rows[i][enter]:
                factor = rows[i][enter]
                rows[i] = [x - factor * y for x, y in zip(rows[i], rows[leave])]
        if cost[enter]:
            factor = cost[enter]
            cost = [x - factor * y for x, y in zip(cost, rows[leave])]
        basis[leave] = enter

    if -cost[-1] != 0:
        raise NotInPolytopeError("not in polytope: no convex combination reproduces f")
    weights = [Fraction(0)] * nv
    for i, b in enumerate(basis):
        if b < nv:
            weights[b] = rows[i][-1]
    return tuple(weights)
