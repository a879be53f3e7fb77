"""Feature selection by the overlap area between intra-class and inter-class
per-attribute difference distributions, with built-in evaluation classifiers
and repeated-split benchmarking protocols."""

from .classify import (ClassifierConfig, EvaluationResult, GaussianNaiveBayes,
                       NearestNeighborClassifier, evaluate, loocv_accuracy,
                       make_classifier)
from .dataset import (DataFormatError, Dataset, DatasetError, LoadConfig,
                      SplitSpec, load_csv, stratified_split)
from .estimators import OverlapAreaSelector
from .experiment import (ExperimentReport, ExperimentSpec, RepetitionRecord,
                         export_report, run_experiment, run_fixed_threshold,
                         run_threshold_sweep, run_top_k)
from .overlap import (BinSpec, DifferenceDistribution, OverlapTable,
                      build_histogram, build_smoothed, inter_differences,
                      intra_differences, overlap_area, overlap_table,
                      resolve_mode, shared_edges, silverman_bandwidth)
from .selection import (DEFAULT_GRID, DEFAULT_THRESHOLD, RankedFeature,
                        RankedFeatures, SelectionResult, ThresholdSearch,
                        heuristic_threshold, rank_features, select_by_threshold,
                        top_k)

__version__ = "0.1.0"

__all__ = [
    "BinSpec", "ClassifierConfig", "DEFAULT_GRID", "DEFAULT_THRESHOLD",
    "DataFormatError", "Dataset", "DatasetError", "DifferenceDistribution",
    "EvaluationResult", "ExperimentReport", "ExperimentSpec",
    "GaussianNaiveBayes", "LoadConfig", "NearestNeighborClassifier",
    "OverlapAreaSelector", "OverlapTable", "RankedFeature", "RankedFeatures",
    "RepetitionRecord", "SelectionResult", "SplitSpec", "ThresholdSearch",
    "build_histogram", "build_smoothed", "evaluate", "export_report",
    "inter_differences", "intra_differences", "load_csv", "loocv_accuracy",
    "make_classifier", "overlap_area", "overlap_table", "rank_features",
    "resolve_mode", "run_experiment", "run_fixed_threshold",
    "run_threshold_sweep", "run_top_k",
    "select_by_threshold", "shared_edges", "silverman_bandwidth",
    "stratified_split", "top_k",
]
