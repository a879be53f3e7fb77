"""Evaluation classifiers: 1-nearest-neighbor and Gaussian naive Bayes.

Both are deterministic sklearn-style estimators. Every tie breaks toward the
smallest index: nearest-neighbor distance ties pick the lowest training-row
index, naive-Bayes posterior ties pick the lowest class id. Euclidean
comparisons use squared distances so ties on integer-valued data are exact.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .dataset import Dataset

log = logging.getLogger(__name__)

_METRICS = {"euclidean": "sqeuclidean", "manhattan": "cityblock"}
_KINDS = ("nearest-neighbor", "naive-bayes")
_SCALINGS = ("none", "minmax")


@dataclass(frozen=True)
class ClassifierConfig:
    """Which evaluation classifier to run and its numeric guards."""

    kind: str = "nearest-neighbor"
    metric: str = "euclidean"
    variance_floor: float = 1e-9
    scaling: str = "none"

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}")
        if self.metric not in _METRICS:
            raise ValueError(f"metric must be one of {tuple(_METRICS)}")
        if self.variance_floor <= 0:
            raise ValueError("variance_floor must be positive")
        if self.scaling not in _SCALINGS:
            raise ValueError(f"scaling must be one of {_SCALINGS}")

    @property
    def key(self) -> str:
        """Stable column label for reports."""
        base = f"nn_{self.metric}" if self.kind == "nearest-neighbor" else "nb"
        return base if self.scaling == "none" else f"{base}_{self.scaling}"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "metric": self.metric,
                "variance_floor": self.variance_floor, "scaling": self.scaling}

    @classmethod
    def from_dict(cls, payload: dict) -> "ClassifierConfig":
        return cls(**payload)


def make_classifier(config: ClassifierConfig):
    if config.kind == "nearest-neighbor":
        return NearestNeighborClassifier(metric=config.metric, scaling=config.scaling)
    return GaussianNaiveBayes(variance_floor=config.variance_floor,
                              scaling=config.scaling)


class _MinMaxState:
    """Per-feature min-max scaling fitted on training data only."""

    def __init__(self, X):
        self.low = X.min(axis=0)
        span = X.max(axis=0) - self.low
        span[span == 0] = 1.0
        self.span = span

    def __call__(self, X):
        return (X - self.low) / self.span


class NearestNeighborClassifier(BaseEstimator, ClassifierMixin):
    """1-NN classifier; distance ties resolve to the lowest training-row index."""

    def __init__(self, metric="euclidean", scaling="none"):
        self.metric = metric
        self.scaling = scaling

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        if self.metric not in _METRICS:
            raise ValueError(f"metric must be one of {tuple(_METRICS)}")
        self.classes_, self._y_idx = np.unique(y, return_inverse=True)
        self._scale = _MinMaxState(X) if self.scaling == "minmax" else None
        self._X = self._scale(X) if self._scale else X
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "_X")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        if self._scale:
            X = self._scale(X)
        distances = cdist(X, self._X, _METRICS[self.metric])
        return self.classes_[self._y_idx[distances.argmin(axis=1)]]


class GaussianNaiveBayes(BaseEstimator, ClassifierMixin):
    """Gaussian naive Bayes with unbiased per-class variances.

    Variances are floored at variance_floor. Fitting a class with fewer than
    two rows is an error; the leave-one-out driver uses the lenient internal
    path where a singleton class keeps the floor variance.
    """

    def __init__(self, variance_floor=1e-9, scaling="none"):
        self.variance_floor = variance_floor
        self.scaling = scaling

    def fit(self, X, y):
        return self._fit(X, y, strict=True)

    def _fit(self, X, y, strict):
        X, y = check_X_y(X, y)
        self._scale = _MinMaxState(X) if self.scaling == "minmax" else None
        if self._scale:
            X = self._scale(X)
        self.classes_, counts = np.unique(y, return_counts=True)
        if strict and counts.min() < 2:
            small = self.classes_[counts.argmin()]
            raise ValueError(f"class {small!r} has fewer than 2 training instances")
        k, d = len(self.classes_), X.shape[1]
        self.class_prior_ = counts / len(y)
        self.theta_ = np.empty((k, d))
        self.var_ = np.empty((k, d))
        for i, cls in enumerate(self.classes_):
            rows = X[y == cls]
            self.theta_[i] = rows.mean(axis=0)
            var = rows.var(axis=0, ddof=1) if len(rows) > 1 else np.zeros(d)
            self.var_[i] = np.maximum(var, self.variance_floor)
        self.n_features_in_ = d
        return self

    def _joint_log_likelihood(self, X):
        out = np.empty((X.shape[0], len(self.classes_)))
        for i in range(len(self.classes_)):
            log_pdf = -0.5 * (np.log(2.0 * np.pi * self.var_[i])
                              + (X - self.theta_[i]) ** 2 / self.var_[i])
            out[:, i] = np.log(self.class_prior_[i]) + log_pdf.sum(axis=1)
        return out

    def predict(self, X):
        check_is_fitted(self, "theta_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        if self._scale:
            X = self._scale(X)
        return self.classes_[self._joint_log_likelihood(X).argmax(axis=1)]


@dataclass(frozen=True)
class EvaluationResult:
    """Accuracy plus the confusion matrix (rows true class, columns predicted)."""

    accuracy: float
    confusion: np.ndarray
    predictions: np.ndarray

    def to_dict(self) -> dict:
        return {"accuracy": self.accuracy,
                "confusion": self.confusion.tolist(),
                "predictions": self.predictions.tolist()}


def _feature_view(dataset: Dataset, features) -> np.ndarray:
    features = np.asarray(list(features), dtype=int)
    if features.size == 0:
        raise ValueError("feature subset is empty")
    if features.min() < 0 or features.max() >= dataset.n_attributes:
        raise ValueError(f"feature index out of range for {dataset.n_attributes} attributes")
    return dataset.values[:, features]


def evaluate(train: Dataset, test: Dataset, features,
             config: ClassifierConfig | None = None) -> EvaluationResult:
    """Fit on train only, predict every test instance, tally the confusion."""
    config = config or ClassifierConfig()
    if train.n_attributes != test.n_attributes:
        raise ValueError("train and test have different attribute counts")
    if train.class_names != test.class_names:
        raise ValueError("train and test have different class vocabularies")
    model = make_classifier(config)
    model.fit(_feature_view(train, features), train.labels)
    predictions = model.predict(_feature_view(test, features))
    k = train.n_classes
    confusion = np.zeros((k, k), dtype=int)
    np.add.at(confusion, (test.labels, predictions), 1)
    accuracy = float(np.trace(confusion)) / len(test.labels)
    return EvaluationResult(accuracy, confusion, predictions)


def loocv_accuracy(train: Dataset, features,
                   config: ClassifierConfig | None = None) -> float:
    """Leave-one-out accuracy on the training partition."""
    config = config or ClassifierConfig()
    if train.n_instances < 2:
        raise ValueError("leave-one-out needs at least two instances")
    X = _feature_view(train, features)
    y = train.labels
    if config.kind == "nearest-neighbor" and config.scaling == "none":
        distances = cdist(X, X, _METRICS[config.metric])
        np.fill_diagonal(distances, np.inf)
        predictions = y[distances.argmin(axis=1)]
        return float(np.mean(predictions == y))

    n = len(y)
    correct = 0
    class_counts = np.bincount(y, minlength=train.n_classes)
    for i in range(n):
        keep = np.arange(n) != i
        Xi, yi = X[keep], y[keep]
        if class_counts[y[i]] == 1:
            log.debug("fold %d leaves class %d empty", i, y[i])
        if config.kind == "nearest-neighbor":
            model = NearestNeighborClassifier(metric=config.metric,
                                              scaling=config.scaling).fit(Xi, yi)
        else:
            model = GaussianNaiveBayes(variance_floor=config.variance_floor,
                                       scaling=config.scaling)._fit(Xi, yi, strict=False)
        correct += int(model.predict(X[i:i + 1])[0] == y[i])
    return correct / n
