"""Threshold selection, heuristic threshold search and per-feature ranking."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classify import ClassifierConfig, loocv_accuracy
from .dataset import Dataset
from .overlap import BinSpec, OverlapTable, overlap_table

#: Attributes with min_overlap strictly below this are kept when no sweep is run.
DEFAULT_THRESHOLD = 0.2

#: Search grid used by the heuristic threshold sweep.
DEFAULT_GRID = tuple(round(0.05 * i, 2) for i in range(1, 11))


@dataclass(frozen=True)
class SelectionResult:
    """Attributes whose minimum relative overlap falls strictly below threshold."""

    threshold: float
    selected: tuple[int, ...]
    table: OverlapTable

    def __post_init__(self):
        sel = tuple(int(a) for a in self.selected)
        if list(sel) != sorted(set(sel)):
            raise ValueError("selected indices must be ascending and duplicate-free")
        if any(self.table.min_overlap[a] >= self.threshold for a in sel):
            raise ValueError("selected attribute at or above threshold")
        object.__setattr__(self, "selected", sel)

    @property
    def selected_names(self) -> tuple[str, ...]:
        return tuple(self.table.attribute_names[a] for a in self.selected)

    def to_dict(self) -> dict:
        return {"threshold": self.threshold,
                "selected": list(self.selected),
                "selected_names": list(self.selected_names),
                "min_overlap": [float(self.table.min_overlap[a]) for a in self.selected]}


def select_by_threshold(table: OverlapTable, threshold: float) -> SelectionResult:
    """Strict filter: keep attribute a iff min_overlap[a] < threshold."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    selected = tuple(int(a) for a in np.flatnonzero(table.min_overlap < threshold))
    return SelectionResult(threshold, selected, table)


@dataclass(frozen=True)
class ThresholdSearch:
    """Outcome of the leave-one-out threshold sweep."""

    threshold: float
    accuracy: float
    curve: tuple[tuple[float, float], ...]  # (threshold, loocv accuracy) pairs


def heuristic_threshold(train: Dataset, bins: BinSpec | None = None,
                        grid=DEFAULT_GRID,
                        classifier: ClassifierConfig | None = None,
                        table: OverlapTable | None = None) -> ThresholdSearch:
    """Pick the grid threshold whose selection scores best under leave-one-out.

    A threshold that selects nothing scores 0. Accuracy ties go to the smaller
    threshold, which keeps fewer features. The overlap table can be passed in
    when the caller already computed it.
    """
    grid = tuple(float(t) for t in grid)
    if not grid:
        raise ValueError("threshold grid is empty")
    if any(not 0.0 <= t <= 1.0 for t in grid):
        raise ValueError("grid thresholds must lie in [0, 1]")
    classifier = classifier or ClassifierConfig()
    if table is None:
        table = overlap_table(train, bins)

    cache: dict[tuple[int, ...], float] = {}
    curve = []
    for t in sorted(grid):
        subset = select_by_threshold(table, t).selected
        if not subset:
            curve.append((t, 0.0))
            continue
        if subset not in cache:
            cache[subset] = loocv_accuracy(train, subset, classifier)
        curve.append((t, cache[subset]))
    best_t, best_acc = max(curve, key=lambda pair: (pair[1], -pair[0]))
    return ThresholdSearch(best_t, best_acc, tuple(curve))


@dataclass(frozen=True)
class RankedFeature:
    attribute: int
    accuracy: float
    min_overlap: float


@dataclass(frozen=True)
class RankedFeatures:
    """Selected attributes ordered by individual leave-one-out accuracy.

    Descending accuracy; equal accuracies order by ascending attribute index.
    """

    entries: tuple[RankedFeature, ...]

    def __post_init__(self):
        keys = [(-e.accuracy, e.attribute) for e in self.entries]
        if keys != sorted(keys):
            raise ValueError("entries are not in ranking order")

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def attributes(self) -> tuple[int, ...]:
        return tuple(e.attribute for e in self.entries)

    def to_rows(self) -> list[dict]:
        return [{"attribute": e.attribute, "accuracy": e.accuracy,
                 "A_min": e.min_overlap} for e in self.entries]


def rank_features(train: Dataset, selection: SelectionResult,
                  classifier: ClassifierConfig | None = None) -> RankedFeatures:
    """Score each selected attribute alone with leave-one-out and sort."""
    if not selection.selected:
        raise ValueError("cannot rank an empty selection")
    classifier = classifier or ClassifierConfig()
    entries = [
        RankedFeature(a, loocv_accuracy(train, (a,), classifier),
                      float(selection.table.min_overlap[a]))
        for a in selection.selected
    ]
    entries.sort(key=lambda e: (-e.accuracy, e.attribute))
    return RankedFeatures(tuple(entries))


def top_k(ranked: RankedFeatures, k: int) -> tuple[int, ...]:
    """Ascending attribute indices of the k best-ranked features."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return tuple(sorted(e.attribute for e in ranked.entries[:k]))
