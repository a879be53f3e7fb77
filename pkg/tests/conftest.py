from pathlib import Path

import numpy as np
import pytest

import overlapselect as ov

WISCONSIN_CSV = Path(__file__).parent / "data" / "wisconsin.csv"


@pytest.fixture(scope="session")
def wisconsin() -> ov.Dataset:
    return ov.load_csv(WISCONSIN_CSV)


@pytest.fixture(scope="session")
def wisconsin_split0(wisconsin):
    """First seeded 50% stratified split: (train, test)."""
    return ov.stratified_split(wisconsin, ov.SplitSpec(seed=0, repetitions=30), 0)


@pytest.fixture
def toy3() -> ov.Dataset:
    """Small 3-class integer dataset with 2 attributes."""
    values = [
        [1, 5], [2, 6], [1, 7], [2, 5],
        [5, 1], [6, 2], [5, 2],
        [9, 9], [8, 8], [9, 8],
    ]
    labels = ["a"] * 4 + ["b"] * 3 + ["c"] * 3
    return ov.Dataset.from_arrays(values, labels)


@pytest.fixture
def write_csv(tmp_path):
    """Write rows to a temp CSV file and return its path."""

    def _write(rows, name="data.csv"):
        path = tmp_path / name
        path.write_text("\n".join(",".join(str(c) for c in row) for row in rows) + "\n")
        return path

    return _write


def random_integer_dataset(rng, max_instances=30, max_attributes=5,
                           max_classes=4, value_range=(0, 8)) -> ov.Dataset:
    """Random small dataset with >=2 instances per class, integer cells."""
    n_classes = rng.integers(2, max_classes + 1)
    n_attr = rng.integers(1, max_attributes + 1)
    counts = rng.integers(2, max(3, max_instances // n_classes) + 1, size=n_classes)
    labels = np.repeat(np.arange(n_classes), counts)
    values = rng.integers(value_range[0], value_range[1] + 1,
                          size=(len(labels), n_attr)).astype(float)
    perm = rng.permutation(len(labels))
    return ov.Dataset.from_arrays(values[perm], labels[perm])
