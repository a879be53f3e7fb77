"""Scikit-learn compatible front end for the overlap-area selector."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.feature_selection import SelectorMixin
from sklearn.utils.validation import check_is_fitted, check_X_y

from .dataset import Dataset
from .overlap import BinSpec, overlap_table
from .selection import DEFAULT_THRESHOLD, select_by_threshold


class OverlapAreaSelector(SelectorMixin, BaseEstimator):
    """Supervised filter keeping features whose minimum relative overlap
    between intra-class and inter-class difference distributions falls
    strictly below `threshold`.

    Composes with pipelines like any sklearn transformer:

        Pipeline([("select", OverlapAreaSelector(threshold=0.2)),
                  ("clf", NearestNeighborClassifier())])

    After fit: `overlap_table_` holds the full A_o / A_r / A_min table,
    `min_overlap_` the per-feature selection statistic and `selected_` the
    kept feature indices in ascending order.
    """

    def __init__(self, threshold=DEFAULT_THRESHOLD, mode="smooth", bin_count=None,
                 grid_size=200, max_pairs=None, pair_seed=0):
        self.threshold = threshold
        self.mode = mode
        self.bin_count = bin_count
        self.grid_size = grid_size
        self.max_pairs = max_pairs
        self.pair_seed = pair_seed

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        dataset = Dataset.from_arrays(X, y)
        bins = BinSpec(mode=self.mode, bin_count=self.bin_count,
                       grid_size=self.grid_size)
        self.overlap_table_ = overlap_table(dataset, bins,
                                            max_pairs=self.max_pairs,
                                            pair_seed=self.pair_seed)
        self.min_overlap_ = self.overlap_table_.min_overlap
        self.selection_ = select_by_threshold(self.overlap_table_, self.threshold)
        self.selected_ = np.asarray(self.selection_.selected, dtype=int)
        self.n_features_in_ = X.shape[1]
        return self

    def _get_support_mask(self):
        check_is_fitted(self, "selected_")
        mask = np.zeros(self.n_features_in_, dtype=bool)
        mask[self.selected_] = True
        return mask

    def _more_tags(self):
        return {"requires_y": True}

    def __sklearn_tags__(self):
        tags = super().__sklearn_tags__()
        tags.target_tags.required = True
        return tags
