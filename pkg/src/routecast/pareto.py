"""Expected routing cost, the alpha sweep, and knee selection.

With a fraction ``alpha`` of series sent to the generalist, expected cost
per series is ``alpha * c_fm + (1 - alpha) * c_spec``. The sweep ranks
series by advantage score and, for each alpha, sends the top
``ceil(alpha * n)`` to the generalist.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import AlphaOutOfRange, CurveTooShort, MissingEndpoints, MissingModelResult

KNEE_TOLERANCE = 0.005
DEFAULT_GRID = tuple(round(i / 100, 2) for i in range(101))


@dataclass(frozen=True)
class CostModel:
    c_fm: float = 1000.0
    c_spec: float = 1.0

    def __post_init__(self):
        for v in (self.c_fm, self.c_spec):
            if not (math.isfinite(v) and v > 0):
                raise ValueError("costs must be positive and finite")


def expected_cost(alpha: float, cm: CostModel) -> float:
    if not 0.0 <= alpha <= 1.0:
        raise AlphaOutOfRange(f"alpha={alpha} outside [0, 1]")
    return alpha * cm.c_fm + (1.0 - alpha) * cm.c_spec


@dataclass(frozen=True)
class SeriesOutcome:
    series_id: str
    advantage_score: float
    fm_mase: float | None
    spec_mase: float | None


@dataclass(frozen=True)
class ParetoPoint:
    alpha: float
    cost: float
    mase: float
    n_fm: int


@dataclass(frozen=True)
class ParetoCurve:
    points: tuple[ParetoPoint, ...]
    knee: ParetoPoint | None = None

    def at(self, alpha: float) -> ParetoPoint | None:
        for p in self.points:
            if math.isclose(p.alpha, alpha, abs_tol=1e-12):
                return p
        return None


def n_routed(alpha: float, n: int) -> int:
    """``ceil(alpha * n)``, robust to float noise such as 0.3 * 10 = 3.0000000000000004."""
    return min(n, max(0, math.ceil(alpha * n - 1e-9)))


def fm_order(records: Sequence[SeriesOutcome]) -> list[int]:
    """Indices by descending advantage score, ties broken by series id."""
    return sorted(range(len(records)), key=lambda i: (-records[i].advantage_score, records[i].series_id))


def pareto_sweep(
    records: Sequence[SeriesOutcome],
    cm: CostModel = CostModel(),
    grid: Sequence[float] = DEFAULT_GRID,
    tolerance: float = KNEE_TOLERANCE,
) -> ParetoCurve:
    if not records:
        raise MissingModelResult("no series to sweep")
    for r in records:
        if r.fm_mase is None or r.spec_mase is None:
            raise MissingModelResult("series lacks a defined MASE for both models", series_id=r.series_id)
    grid = list(grid)
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("alpha grid must be strictly increasing")
    n = len(records)
    order = fm_order(records)
    fm = np.array([records[i].fm_mase for i in order], dtype=float)
    spec = np.array([records[i].spec_mase for i in order], dtype=float)
    # total MASE when the first k ranked series go to the generalist
    totals = np.concatenate([[0.0], np.cumsum(fm)]) + np.concatenate(
        [[spec.sum()], spec.sum() - np.cumsum(spec)]
    )
    points = []
    for a in grid:
        cost = expected_cost(a, cm)
        k = n_routed(a, n)
        if k == 0:
            mase = math.fsum(spec) / n
        elif k == n:
            mase = math.fsum(fm) / n
        else:
            mase = float(totals[k]) / n
        points.append(ParetoPoint(float(a), cost, mase, k))
    curve = ParetoCurve(tuple(points))
    knee = find_knee(curve, tolerance) if len(points) >= 3 else None
    return ParetoCurve(curve.points, knee)


def find_knee(curve: ParetoCurve, tolerance: float = KNEE_TOLERANCE) -> ParetoPoint:
    """Cheapest point whose MASE is within ``tolerance`` (relative) of the minimum."""
    if len(curve.points) < 3:
        raise CurveTooShort(f"need at least 3 points, got {len(curve.points)}")
    best = min(p.mase for p in curve.points)
    near = [p for p in curve.points if p.mase <= best * (1 + tolerance) + 1e-15]
    return min(near, key=lambda p: (p.cost, p.alpha))


@dataclass(frozen=True)
class DominanceReport:
    knee: ParetoPoint
    pure_spec: ParetoPoint
    pure_fm: ParetoPoint
    beats_fm_on_mase: bool
    beats_fm_on_cost: bool
    beats_spec_on_mase: bool

    @property
    def hybrid_dominates_pure_fm(self) -> bool:
        return self.beats_fm_on_mase and self.beats_fm_on_cost

    @property
    def hybrid_dominates_pure_spec(self) -> bool:
        return self.beats_spec_on_mase

    def to_dict(self) -> dict:
        return {
            "hybrid_dominates_pure_fm": self.hybrid_dominates_pure_fm,
            "hybrid_dominates_pure_spec": self.hybrid_dominates_pure_spec,
            "beats_fm_on_mase": self.beats_fm_on_mase,
            "beats_fm_on_cost": self.beats_fm_on_cost,
            "beats_spec_on_mase": self.beats_spec_on_mase,
        }


def dominance_check(curve: ParetoCurve) -> DominanceReport:
    lo, hi = curve.at(0.0), curve.at(1.0)
    if lo is None or hi is None:
        raise MissingEndpoints("curve must include alpha=0 and alpha=1")
    knee = curve.knee or find_knee(curve)
    return DominanceReport(
        knee,
        lo,
        hi,
        beats_fm_on_mase=knee.mase < hi.mase,
        beats_fm_on_cost=knee.cost < hi.cost,
        beats_spec_on_mase=knee.mase < lo.mase,
    )
