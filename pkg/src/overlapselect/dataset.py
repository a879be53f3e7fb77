"""Loading, validation, imputation and deterministic splitting of labeled tables."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np


class DataFormatError(ValueError):
    """The input file is malformed (ragged rows, non-numeric cells, ...)."""


class DatasetError(ValueError):
    """The parsed data cannot be used (tiny classes, all-missing column, ...)."""


@dataclass(frozen=True)
class LoadConfig:
    """Options for :func:`load_csv`.

    label_column indexes the class column (negative counts from the end).
    imputation is "median" (whole-column median of the observed values) or
    "drop" (remove any row with a missing cell).
    """

    label_column: int = -1
    header: bool = True
    missing_token: str = "?"
    imputation: str = "median"

    def __post_init__(self):
        if self.imputation not in ("median", "drop"):
            raise ValueError(f"unknown imputation policy {self.imputation!r}")


@dataclass(frozen=True)
class Dataset:
    """Immutable labeled instance table.

    values holds one row per instance and one column per attribute; labels are
    dense integer class ids indexing class_names, assigned in first-appearance
    order by the loader.
    """

    values: np.ndarray
    labels: np.ndarray
    attribute_names: tuple[str, ...]
    class_names: tuple[str, ...]
    source: str = "<memory>"
    imputation: str = "median"

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        labels = np.asarray(self.labels, dtype=int)
        if values.ndim != 2:
            raise DatasetError("values must be a 2-d array")
        if len(labels) != values.shape[0]:
            raise DatasetError(
                f"{values.shape[0]} rows but {len(labels)} labels")
        if len(self.attribute_names) != values.shape[1]:
            raise DatasetError("attribute_names length does not match columns")
        if len(labels) and (labels.min() < 0 or labels.max() >= len(self.class_names)):
            raise DatasetError("labels must index class_names")
        values.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "attribute_names", tuple(self.attribute_names))
        object.__setattr__(self, "class_names", tuple(self.class_names))

    @property
    def n_instances(self) -> int:
        return self.values.shape[0]

    @property
    def n_attributes(self) -> int:
        return self.values.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)

    def class_rows(self, class_id: int) -> np.ndarray:
        """Row indices of one class, in row order."""
        return np.flatnonzero(self.labels == class_id)

    def subset(self, rows: np.ndarray) -> "Dataset":
        """New Dataset restricted to the given rows (class vocabulary kept)."""
        rows = np.asarray(rows, dtype=int)
        return Dataset(self.values[rows].copy(), self.labels[rows].copy(),
                       self.attribute_names, self.class_names,
                       source=self.source, imputation=self.imputation)

    @staticmethod
    def from_arrays(values, labels, attribute_names=None, class_names=None) -> "Dataset":
        """Build a Dataset from plain arrays; labels may be any hashable tokens.

        Class ids follow first appearance, matching the CSV loader.
        """
        values = np.asarray(values, dtype=float)
        tokens = list(labels)
        if class_names is None:
            seen: dict = {}
            for tok in tokens:
                if tok not in seen:
                    seen[tok] = len(seen)
            class_names = tuple(str(tok) for tok in seen)
            ids = np.array([seen[tok] for tok in tokens], dtype=int)
        else:
            lookup = {name: i for i, name in enumerate(class_names)}
            ids = np.array([lookup[tok] for tok in tokens], dtype=int)
        if attribute_names is None:
            attribute_names = tuple(f"attr_{j}" for j in range(values.shape[1]))
        return Dataset(values, ids, tuple(attribute_names), tuple(class_names))


def require_pairable(dataset: Dataset, minimum: int = 2) -> None:
    """Raise unless every class has at least `minimum` instances."""
    counts = dataset.class_counts()
    small = np.flatnonzero(counts < minimum)
    if small.size:
        name = dataset.class_names[small[0]]
        raise DatasetError(
            f"class {name!r} has {counts[small[0]]} instances, need >= {minimum}")


def load_csv(path, config: LoadConfig | None = None) -> Dataset:
    """Parse a delimited text file into a validated, fully imputed Dataset."""
    config = config or LoadConfig()
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise DataFormatError(f"{path}: empty file")

    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise DataFormatError(
                f"{path}: row {i + 1} has {len(row)} columns, expected {width}")

    label_col = config.label_column if config.label_column >= 0 else width + config.label_column
    if not 0 <= label_col < width:
        raise DataFormatError(f"{path}: label column {config.label_column} out of range")
    attr_cols = [j for j in range(width) if j != label_col]

    if config.header:
        header, body = rows[0], rows[1:]
        attribute_names = tuple(header[j].strip() for j in attr_cols)
    else:
        body = rows
        attribute_names = tuple(f"attr_{k}" for k in range(len(attr_cols)))
    if not body:
        raise DataFormatError(f"{path}: no data rows")

    values = np.empty((len(body), len(attr_cols)))
    tokens = []
    for i, row in enumerate(body):
        tokens.append(row[label_col].strip())
        for k, j in enumerate(attr_cols):
            cell = row[j].strip()
            if cell == config.missing_token:
                values[i, k] = np.nan
            else:
                try:
                    values[i, k] = float(cell)
                except ValueError:
                    raise DataFormatError(
                        f"{path}: row {i + (2 if config.header else 1)}, "
                        f"column {j + 1}: non-numeric cell {cell!r}") from None

    # class ids in first-appearance order
    seen: dict[str, int] = {}
    for tok in tokens:
        if tok not in seen:
            seen[tok] = len(seen)
    labels = np.array([seen[tok] for tok in tokens], dtype=int)
    class_names = tuple(seen)

    if config.imputation == "drop":
        keep = ~np.isnan(values).any(axis=1)
        values, labels = values[keep], labels[keep]
        if not len(values):
            raise DatasetError(f"{path}: every row has a missing cell")
    else:
        for k in range(values.shape[1]):
            col = values[:, k]
            mask = np.isnan(col)
            if mask.all():
                raise DatasetError(
                    f"{path}: column {attribute_names[k]!r} is entirely missing")
            if mask.any():
                col[mask] = np.nanmedian(col)

    dataset = Dataset(values, labels, attribute_names, class_names,
                      source=str(path), imputation=config.imputation)
    require_pairable(dataset)
    return dataset


@dataclass(frozen=True)
class SplitSpec:
    """Stratified split plan: per class, train gets floor(n_c * train_fraction)."""

    train_fraction: float = 0.5
    seed: int = 0
    repetitions: int = 30

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")


def stratified_split(dataset: Dataset, spec: SplitSpec,
                     repetition_index: int) -> tuple[Dataset, Dataset]:
    """Deterministic stratified split keyed on (spec.seed, repetition_index).

    Each repetition draws an independent permutation stream, so repetitions can
    be generated in any order and always reproduce the same partition.
    """
    if not 0 <= repetition_index < spec.repetitions:
        raise ValueError(
            f"repetition_index {repetition_index} outside [0, {spec.repetitions})")
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, repetition_index]))
    train_rows, test_rows = [], []
    for c in range(dataset.n_classes):
        rows = dataset.class_rows(c)
        n_train = int(math.floor(len(rows) * spec.train_fraction))
        if len(rows) and n_train < 2:
            raise DatasetError(
                f"class {dataset.class_names[c]!r}: train share would be "
                f"{n_train} < 2 instances")
        perm = rng.permutation(rows)
        train_rows.append(perm[:n_train])
        test_rows.append(perm[n_train:])
    train_idx = np.sort(np.concatenate(train_rows))
    test_idx = np.sort(np.concatenate(test_rows))
    return dataset.subset(train_idx), dataset.subset(test_idx)
