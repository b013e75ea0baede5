"""Sharp risk-measure bounds by enumeration over extremal dependence structures.

Two enumeration routes:

* common parameter p, identical margins: the sum's law only depends on the
  driver through its component-sum pmf, so the analytic extremal points of
  the fixed-mean sum class are enumerated (works at any dimension),
* heterogeneous p (dimension <= 5): the vertices of the Bernoulli Fréchet
  class are enumerated exactly and each vertex is aggregated.

For convex measures (expected shortfall, entropic, standard deviation) the
extremes over the common-p class are attained at the convex-order minimum
and at the upper Fréchet sum; the engine verifies this against the full
enumeration and flags a violation as an internal error, which doubles as a
guard on the aggregation paths.  Value-at-risk is not convex and always goes
through full enumeration.

For heterogeneous margins the convex shortcut is never applied: equal driver
sums no longer force equal aggregate laws, so the convex-order transfer
breaks down (the engine exposes that counterexample in the tests).
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .aggregation import aggregate, aggregate_discrete_general
from .bernoulli import as_fraction, format_fraction, margin_vector
from .copula import GfgmSpec, sample_x
from .distributions import EmpiricalDistribution
from .drivers import DenseDriver
from .margins import DiscreteMargin, Margin
from .measures import Measure, evaluate, parse_measure
from .sums import extremal_points, max_convex_point, min_convex_point
from .vertices import enumerate_vertices

_CONVEX_CHECK_RTOL = 1e-9


class ConvexBoundViolation(AssertionError):
    """Full enumeration disagreed with the convex-order shortcut: internal error."""


@dataclass
class RiskReport:
    """Per-extremal-point measure values with the identified extrema."""

    margin: str
    d: int
    p: str | list[str]
    measures: list[str]
    point_labels: list[str]
    values: dict[str, list[float]]
    minima: dict[str, tuple[float, str]]
    maxima: dict[str, tuple[float, str]]
    metadata: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "schema": "gfgm-risk-report/1",
            "margin": self.margin,
            "d": self.d,
            "p": self.p,
            "measures": self.measures,
            "points": self.point_labels,
            "values": self.values,
            "min": {m: {"value": v, "at": lab} for m, (v, lab) in self.minima.items()},
            "max": {m: {"value": v, "at": lab} for m, (v, lab) in self.maxima.items()},
            "metadata": self.metadata,
        }


def _normalize_measures(measures) -> list[Measure]:
    out = []
    for m in measures:
        out.append(parse_measure(m) if isinstance(m, str) else m)
    if not out:
        raise ValueError("no measures requested")
    return out


def _margin_desc(margin) -> str:
    return margin if isinstance(margin, str) else margin.describe()


def _worker_count(n_tasks: int) -> int:
    env = os.environ.get("GFGM_THREADS")
    if env:
        return max(1, int(env))
    if n_tasks < 64:
        return 1
    return min(os.cpu_count() or 1, 8)


def _extrema(measure_label: str, values: list[float], labels: list[str]):
    arr = np.asarray(values)
    imin = int(arr.argmin())
    imax = int(arr.argmax())
    return (values[imin], labels[imin]), (values[imax], labels[imax])


def bounds_common_p(
    margin,
    d: int,
    p,
    measures,
    grid_h: float | None = None,
    check_convex: bool = True,
) -> RiskReport:
    """Full enumeration over the analytic extremal points of the sum class.

    ``margin`` is a margin object or the string "bernoulli" (measure the
    indicator sums themselves).  For convex measures the minimum must land on
    the convex-order smallest point and the maximum on the upper Fréchet
    point; a mismatch raises ConvexBoundViolation.
    """
    p = as_fraction(p)
    measures = _normalize_measures(measures)
    points = extremal_points(d, p)
    labels = [pt.label for pt in points]
    t0 = time.perf_counter()

    def task(pt):
        dist = aggregate(margin, d, pt, p, grid_h=grid_h)
        return [evaluate(dist, m) for m in measures]

    workers = _worker_count(len(points))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(task, points))
    else:
        rows = [task(pt) for pt in points]

    values = {m.label: [row[i] for row in rows] for i, m in enumerate(measures)}
    minima, maxima = {}, {}
    for m in measures:
        minima[m.label], maxima[m.label] = _extrema(m.label, values[m.label], labels)

    if check_convex:
        lo_idx = min_convex_point(d, p).index - 1
        hi_idx = max_convex_point(d, p).index - 1
        for m in measures:
            if not m.is_convex:
                continue
            vals = values[m.label]
            scale = max(1.0, abs(minima[m.label][0]), abs(maxima[m.label][0]))
            if minima[m.label][0] < vals[lo_idx] - _CONVEX_CHECK_RTOL * scale:
                raise ConvexBoundViolation(
                    f"{m.label}: minimum {minima[m.label]} undercuts the convex-order "
                    f"smallest point {labels[lo_idx]} ({vals[lo_idx]})"
                )
            if maxima[m.label][0] > vals[hi_idx] + _CONVEX_CHECK_RTOL * scale:
                raise ConvexBoundViolation(
                    f"{m.label}: maximum {maxima[m.label]} exceeds the upper Fréchet "
                    f"point {labels[hi_idx]} ({vals[hi_idx]})"
                )

    return RiskReport(
        margin=_margin_desc(margin),
        d=d,
        p=format_fraction(p),
        measures=[m.label for m in measures],
        point_labels=labels,
        values=values,
        minima=minima,
        maxima=maxima,
        metadata={
            "extremal_points": len(points),
            "runtime_s": round(time.perf_counter() - t0, 6),
            "grid_h": grid_h,
            "path": "common-p",
        },
    )


def var_bounds_common_p(margin, d: int, p, alpha: float, grid_h: float | None = None):
    """(min, max, attaining labels) of the alpha-quantile over the class."""
    report = bounds_common_p(margin, d, p, [Measure("var", alpha)], grid_h=grid_h)
    label = f"var:{alpha:g}"
    lo, lo_at = report.minima[label]
    hi, hi_at = report.maxima[label]
    return lo, hi, (lo_at, hi_at)


def convex_bounds_fast(margin, d: int, p, measures, grid_h: float | None = None) -> RiskReport:
    """Bounds for convex measures from the two distinguished extremal points only."""
    p = as_fraction(p)
    measures = _normalize_measures(measures)
    bad = [m.label for m in measures if not m.is_convex]
    if bad:
        raise ValueError(f"fast path is restricted to convex measures; refused: {bad}")
    t0 = time.perf_counter()
    points = [min_convex_point(d, p), max_convex_point(d, p)]
    labels = [pt.label for pt in points]
    rows = []
    for pt in points:
        dist = aggregate(margin, d, pt, p, grid_h=grid_h)
        rows.append([evaluate(dist, m) for m in measures])
    values = {m.label: [row[i] for row in rows] for i, m in enumerate(measures)}
    minima = {m.label: (values[m.label][0], labels[0]) for m in measures}
    maxima = {m.label: (values[m.label][1], labels[1]) for m in measures}
    return RiskReport(
        margin=_margin_desc(margin),
        d=d,
        p=format_fraction(p),
        measures=[m.label for m in measures],
        point_labels=labels,
        values=values,
        minima=minima,
        maxima=maxima,
        metadata={
            "extremal_points": 2,
            "runtime_s": round(time.perf_counter() - t0, 6),
            "grid_h": grid_h,
            "path": "convex-fast",
        },
    )


def bounds_general_p(
    margins: list[Margin],
    p_vector,
    measures,
    mc_n: int = 10**6,
    seed: int = 0,
    cap: int = 5,
) -> RiskReport:
    """Bounds by exact vertex enumeration for heterogeneous margin parameters.

    Discrete margins aggregate exactly; continuous margins fall back to
    seeded Monte Carlo per vertex (standard errors recorded in the
    metadata).  Dimensions above the vertex cap are refused: use the
    common-p path instead.
    """
    pv = margin_vector(p_vector)
    d = pv.d
    if len(margins) != d:
        raise ValueError(f"need {d} margins, got {len(margins)}")
    measures = _normalize_measures(measures)
    vertices = enumerate_vertices(pv, cap=cap)
    labels = [f"v{i + 1}" for i in range(len(vertices))]
    all_discrete = all(isinstance(m, DiscreteMargin) for m in margins)
    t0 = time.perf_counter()

    rows = []
    mc_se = []
    for i, vertex in enumerate(vertices):
        if all_discrete:
            dist = aggregate_discrete_general(margins, vertex)
        else:
            spec = GfgmSpec(pv.probs, DenseDriver(vertex))
            draws = sample_x(spec, margins, mc_n, seed=seed + i)
            dist = EmpiricalDistribution(draws.sum(axis=1))
            mc_se.append(float(np.std(dist.samples, ddof=1) / np.sqrt(mc_n)))
        rows.append([evaluate(dist, m) for m in measures])

    values = {m.label: [row[i] for row in rows] for i, m in enumerate(measures)}
    minima, maxima = {}, {}
    for m in measures:
        minima[m.label], maxima[m.label] = _extrema(m.label, values[m.label], labels)
    metadata = {
        "vertices": len(vertices),
        "runtime_s": round(time.perf_counter() - t0, 6),
        "path": "vertex-enumeration",
        "exact": all_discrete,
    }
    if not all_discrete:
        metadata["mc_n"] = mc_n
        metadata["seed"] = seed
        metadata["mean_standard_errors"] = mc_se
    return RiskReport(
        margin=",".join(_margin_desc(m) for m in margins),
        d=d,
        p=[format_fraction(q) for q in pv.probs],
        measures=[m.label for m in measures],
        point_labels=labels,
        values=values,
        minima=minima,
        maxima=maxima,
        metadata=metadata,
    )
