"""Repeated-split experiment protocols and report aggregation.

Three protocols, all running over seeded stratified splits and all selecting,
ranking and tuning on the training partition only:

* fixed-threshold: select at one threshold, evaluate on test.
* threshold-sweep: the fixed protocol for every grid threshold, emitting the
  normalized-feature-count and mean-accuracy curves.
* top-k-ranked: select at a threshold, rank, evaluate ranked prefixes on test.

Reports are pure functions of (spec, dataset bytes); rerunning a spec yields
byte-identical exports.
"""
from __future__ import annotations

import csv
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .classify import ClassifierConfig, evaluate
from .dataset import Dataset, LoadConfig, SplitSpec, load_csv, stratified_split
from .overlap import BinSpec, overlap_table
from .selection import (DEFAULT_GRID, DEFAULT_THRESHOLD, heuristic_threshold,
                        rank_features, select_by_threshold, top_k)

SCHEMA_VERSION = 1

_PROTOCOLS = ("fixed-threshold", "threshold-sweep", "top-k-ranked")


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything needed to reproduce one experiment run."""

    source: str | None = None
    load: LoadConfig = field(default_factory=LoadConfig)
    split: SplitSpec = field(default_factory=SplitSpec)
    bins: BinSpec = field(default_factory=BinSpec)
    protocol: str = "fixed-threshold"
    threshold: float = DEFAULT_THRESHOLD
    grid: tuple[float, ...] = DEFAULT_GRID
    k: int = 100
    prefixes: tuple[int, ...] | None = None
    heuristic_per_repetition: bool = False
    classifiers: tuple[ClassifierConfig, ...] = (ClassifierConfig(),)
    jobs: int = 1

    def __post_init__(self):
        if self.protocol not in _PROTOCOLS:
            raise ValueError(f"protocol must be one of {_PROTOCOLS}")
        if self.protocol == "threshold-sweep" and not self.grid:
            raise ValueError("threshold-sweep needs a grid")
        if self.protocol == "top-k-ranked" and self.k < 1:
            raise ValueError("k must be >= 1")
        if not self.classifiers:
            raise ValueError("at least one classifier is required")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        object.__setattr__(self, "grid", tuple(float(t) for t in self.grid))
        object.__setattr__(self, "classifiers", tuple(self.classifiers))
        if self.prefixes is not None:
            object.__setattr__(self, "prefixes",
                               tuple(sorted({int(p) for p in self.prefixes})))

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "load": {"label_column": self.load.label_column,
                     "header": self.load.header,
                     "missing_token": self.load.missing_token,
                     "imputation": self.load.imputation},
            "split": {"train_fraction": self.split.train_fraction,
                      "seed": self.split.seed,
                      "repetitions": self.split.repetitions},
            "bins": {"mode": self.bins.mode, "bin_count": self.bins.bin_count,
                     "grid_size": self.bins.grid_size},
            "protocol": self.protocol,
            "threshold": self.threshold,
            "grid": list(self.grid),
            "k": self.k,
            "prefixes": None if self.prefixes is None else list(self.prefixes),
            "heuristic_per_repetition": self.heuristic_per_repetition,
            "classifiers": [c.to_dict() for c in self.classifiers],
            "jobs": self.jobs,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ExperimentSpec":
        payload = dict(payload)
        load = LoadConfig(**payload.get("load", {}))
        split = SplitSpec(**payload.get("split", {}))
        bins = BinSpec(**payload.get("bins", {}))
        classifiers = tuple(ClassifierConfig.from_dict(c)
                            for c in payload.get("classifiers",
                                                 [ClassifierConfig().to_dict()]))
        prefixes = payload.get("prefixes")
        return cls(source=payload.get("source"), load=load, split=split,
                   bins=bins, protocol=payload.get("protocol", "fixed-threshold"),
                   threshold=payload.get("threshold", DEFAULT_THRESHOLD),
                   grid=tuple(payload.get("grid", DEFAULT_GRID)),
                   k=payload.get("k", 100),
                   prefixes=None if prefixes is None else tuple(prefixes),
                   heuristic_per_repetition=payload.get(
                       "heuristic_per_repetition", False),
                   classifiers=classifiers, jobs=payload.get("jobs", 1))


@dataclass
class RepetitionRecord:
    repetition: int
    threshold: float
    selected: list[int]
    flags: list[str]
    accuracies: dict[str, float]
    ranking: list[int] | None = None
    prefix_accuracies: dict[str, list[float]] | None = None

    def to_dict(self) -> dict:
        return {"repetition": self.repetition, "threshold": self.threshold,
                "selected": self.selected, "flags": self.flags,
                "accuracies": self.accuracies, "ranking": self.ranking,
                "prefix_accuracies": self.prefix_accuracies}

    @classmethod
    def from_dict(cls, payload: dict) -> "RepetitionRecord":
        return cls(**payload)


@dataclass
class ExperimentReport:
    spec: dict
    records: list[RepetitionRecord]
    aggregates: dict
    curves: dict
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {"schema_version": self.schema_version, "spec": self.spec,
                "records": [r.to_dict() for r in self.records],
                "aggregates": self.aggregates, "curves": self.curves}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, payload: dict) -> "ExperimentReport":
        return cls(spec=payload["spec"],
                   records=[RepetitionRecord.from_dict(r) for r in payload["records"]],
                   aggregates=payload["aggregates"], curves=payload["curves"],
                   schema_version=payload["schema_version"])

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        return cls.from_dict(json.loads(text))


def _spec_echo(spec: ExperimentSpec) -> dict:
    """Spec payload stored in reports; drops the worker cap, which is an
    execution detail that must never change report bytes."""
    payload = spec.to_dict()
    payload.pop("jobs")
    return payload


def _mean(values) -> float:
    values = list(values)
    return sum(values) / len(values) if values else 0.0


def _sample_std(values) -> float:
    """Sample standard deviation (n-1 denominator); 0 for fewer than 2 values."""
    values = list(values)
    if len(values) < 2:
        return 0.0
    mean = _mean(values)
    return math.sqrt(sum((v - mean) ** 2 for v in values) / (len(values) - 1))


def _resolve_dataset(spec: ExperimentSpec, dataset: Dataset | None) -> Dataset:
    if dataset is not None:
        return dataset
    if spec.source is None:
        raise ValueError("spec has no source path and no dataset was passed")
    return load_csv(spec.source, spec.load)


def _map_repetitions(spec: ExperimentSpec, worker):
    reps = range(spec.split.repetitions)
    if spec.jobs > 1:
        with ThreadPoolExecutor(max_workers=spec.jobs) as pool:
            results = list(pool.map(worker, reps))
    else:
        results = [worker(rep) for rep in reps]
    return results


def _evaluate_selection(train, test, selected, classifiers):
    flags, accuracies = [], {}
    if not selected:
        flags.append("empty_selection")
        accuracies = {c.key: 0.0 for c in classifiers}
    else:
        for config in classifiers:
            accuracies[config.key] = evaluate(train, test, selected, config).accuracy
    return flags, accuracies


def run_fixed_threshold(spec: ExperimentSpec,
                        dataset: Dataset | None = None) -> ExperimentReport:
    """Select once per repetition at a fixed (or per-repetition heuristic)
    threshold and evaluate the selection on the held-out half."""
    data = _resolve_dataset(spec, dataset)

    def one(rep: int) -> RepetitionRecord:
        train, test = stratified_split(data, spec.split, rep)
        table = overlap_table(train, spec.bins)
        threshold = spec.threshold
        if spec.heuristic_per_repetition:
            threshold = heuristic_threshold(
                train, spec.bins, spec.grid or DEFAULT_GRID,
                spec.classifiers[0], table=table).threshold
        selection = select_by_threshold(table, threshold)
        flags, accuracies = _evaluate_selection(train, test,
                                                selection.selected, spec.classifiers)
        return RepetitionRecord(rep, float(threshold), list(selection.selected),
                                flags, accuracies)

    records = sorted(_map_repetitions(spec, one), key=lambda r: r.repetition)
    aggregates = {
        "accuracy_mean": {c.key: _mean(r.accuracies[c.key] for r in records)
                          for c in spec.classifiers},
        "accuracy_std": {c.key: _sample_std(r.accuracies[c.key] for r in records)
                         for c in spec.classifiers},
        "selected_count_mean": _mean(len(r.selected) for r in records),
    }
    return ExperimentReport(_spec_echo(spec), records, aggregates, {})


def run_threshold_sweep(spec: ExperimentSpec,
                        dataset: Dataset | None = None) -> ExperimentReport:
    """Fixed-threshold protocol for every grid threshold.

    The overlap table of each repetition is computed once and reused for every
    threshold, which is result-identical to rerunning the fixed protocol."""
    data = _resolve_dataset(spec, dataset)
    grid = sorted(spec.grid)
    n_attr = data.n_attributes

    def one(rep: int) -> list[RepetitionRecord]:
        train, test = stratified_split(data, spec.split, rep)
        table = overlap_table(train, spec.bins)
        out = []
        for threshold in grid:
            selection = select_by_threshold(table, threshold)
            flags, accuracies = _evaluate_selection(
                train, test, selection.selected, spec.classifiers)
            out.append(RepetitionRecord(rep, float(threshold),
                                        list(selection.selected), flags, accuracies))
        return out

    nested = _map_repetitions(spec, one)
    records = sorted((r for chunk in nested for r in chunk),
                     key=lambda r: (r.repetition, r.threshold))
    per_threshold = []
    curve_counts, curve_acc = [], {c.key: [] for c in spec.classifiers}
    for threshold in grid:
        bucket = [r for r in records if r.threshold == threshold]
        entry = {
            "threshold": float(threshold),
            "normalized_count_mean": _mean(len(r.selected) / n_attr for r in bucket),
            "accuracy_mean": {c.key: _mean(r.accuracies[c.key] for r in bucket)
                              for c in spec.classifiers},
            "accuracy_std": {c.key: _sample_std(r.accuracies[c.key] for r in bucket)
                             for c in spec.classifiers},
        }
        per_threshold.append(entry)
        curve_counts.append(entry["normalized_count_mean"])
        for c in spec.classifiers:
            curve_acc[c.key].append(entry["accuracy_mean"][c.key])
    curves = {"threshold": [float(t) for t in grid],
              "normalized_count": curve_counts,
              "accuracy": curve_acc}
    return ExperimentReport(_spec_echo(spec), records,
                            {"per_threshold": per_threshold}, curves)


def run_top_k(spec: ExperimentSpec, dataset: Dataset | None = None) -> ExperimentReport:
    """Rank the selection of each repetition and evaluate ranked prefixes."""
    data = _resolve_dataset(spec, dataset)

    def one(rep: int) -> RepetitionRecord:
        train, test = stratified_split(data, spec.split, rep)
        table = overlap_table(train, spec.bins)
        selection = select_by_threshold(table, spec.threshold)
        if not selection.selected:
            return RepetitionRecord(rep, spec.threshold, [], ["empty_selection"],
                                    {c.key: 0.0 for c in spec.classifiers},
                                    ranking=[], prefix_accuracies={})
        flags = []
        if len(selection.selected) < spec.k:
            flags.append("selection_smaller_than_k")
        ranked = rank_features(train, selection, spec.classifiers[0])
        limit = min(spec.k, len(ranked))
        sizes = [p for p in (spec.prefixes or range(1, limit + 1)) if p <= limit]
        prefix_acc: dict[str, list[float]] = {c.key: [] for c in spec.classifiers}
        for size in sizes:
            subset = top_k(ranked, size)
            for config in spec.classifiers:
                prefix_acc[config.key].append(
                    evaluate(train, test, subset, config).accuracy)
        final = {c.key: prefix_acc[c.key][-1] if prefix_acc[c.key] else 0.0
                 for c in spec.classifiers}
        return RepetitionRecord(rep, spec.threshold, list(selection.selected),
                                flags, final, ranking=list(ranked.attributes),
                                prefix_accuracies=prefix_acc)

    records = sorted(_map_repetitions(spec, one), key=lambda r: r.repetition)
    n_sizes = max((len(next(iter(r.prefix_accuracies.values())))
                   for r in records if r.prefix_accuracies), default=0)
    sizes = list(spec.prefixes[:n_sizes]) if spec.prefixes else list(range(1, n_sizes + 1))
    mean_acc: dict[str, list[float]] = {}
    best: dict[str, dict] = {}
    for config in spec.classifiers:
        key = config.key
        mean_acc[key] = []
        for i in range(n_sizes):
            vals = [r.prefix_accuracies[key][i] for r in records
                    if r.prefix_accuracies and len(r.prefix_accuracies[key]) > i]
            mean_acc[key].append(_mean(vals))
        if mean_acc[key]:
            top = max(range(n_sizes), key=lambda i: (mean_acc[key][i], -sizes[i]))
            best[key] = {"accuracy": mean_acc[key][top], "prefix_size": sizes[top]}
        else:
            best[key] = {"accuracy": 0.0, "prefix_size": 0}
    aggregates = {"prefix_sizes": sizes, "prefix_accuracy_mean": mean_acc,
                  "best": best,
                  "selected_count_mean": _mean(len(r.selected) for r in records)}
    curves = {"prefix_size": sizes, "accuracy": mean_acc}
    return ExperimentReport(_spec_echo(spec), records, aggregates, curves)


def run_experiment(spec: ExperimentSpec, dataset: Dataset | None = None) -> ExperimentReport:
    """Dispatch on spec.protocol."""
    runner = {"fixed-threshold": run_fixed_threshold,
              "threshold-sweep": run_threshold_sweep,
              "top-k-ranked": run_top_k}[spec.protocol]
    return runner(spec, dataset)


def _open_out(path):
    if path == "-":
        return sys.stdout, False
    return open(path, "w", newline="", encoding="utf-8"), True


def _write_csv(path, fieldnames, rows) -> str:
    fh, close = _open_out(path)
    try:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (repr(v) if isinstance(v, float) else v)
                             for k, v in row.items()})
    finally:
        if close:
            fh.close()
    return path


def export_report(report: ExperimentReport, fmt: str, path: str) -> list[str]:
    """Write a report as JSON (one file) or CSV (one file per curve/table).

    CSV output derives sibling file names from `path`:
    <base>_repetitions.csv always, plus <base>_sweep.csv or
    <base>_prefixes.csv when the protocol produced those curves.
    Path "-" streams to standard output (JSON, or the main CSV table).
    """
    if fmt == "json":
        fh, close = _open_out(path)
        try:
            fh.write(report.to_json())
        finally:
            if close:
                fh.close()
        return [path]
    if fmt != "csv":
        raise ValueError("format must be 'json' or 'csv'")

    keys = sorted(next((r.accuracies for r in report.records), {}))
    rep_rows = []
    for r in report.records:
        row = {"repetition": r.repetition, "threshold": r.threshold,
               "n_selected": len(r.selected),
               "selected": ";".join(str(a) for a in r.selected),
               "flags": ";".join(r.flags)}
        for key in keys:
            row[f"accuracy_{key}"] = r.accuracies[key]
        rep_rows.append(row)
    rep_fields = ["repetition", "threshold", "n_selected", "selected", "flags"] + \
        [f"accuracy_{k}" for k in keys]

    if path == "-":
        _write_csv("-", rep_fields, rep_rows)
        return ["-"]
    base = path[:-4] if path.endswith(".csv") else path
    written = [_write_csv(f"{base}_repetitions.csv", rep_fields, rep_rows)]

    if "normalized_count" in report.curves:
        rows = []
        for i, threshold in enumerate(report.curves["threshold"]):
            row = {"threshold": threshold,
                   "normalized_count": report.curves["normalized_count"][i]}
            for key in keys:
                row[f"accuracy_{key}"] = report.curves["accuracy"][key][i]
            rows.append(row)
        fields = ["threshold", "normalized_count"] + [f"accuracy_{k}" for k in keys]
        written.append(_write_csv(f"{base}_sweep.csv", fields, rows))

    if "prefix_size" in report.curves:
        rows = []
        for i, size in enumerate(report.curves["prefix_size"]):
            row = {"prefix_size": size}
            for key in keys:
                row[f"accuracy_{key}"] = report.curves["accuracy"][key][i]
            rows.append(row)
        fields = ["prefix_size"] + [f"accuracy_{k}" for k in keys]
        written.append(_write_csv(f"{base}_prefixes.csv", fields, rows))
    return written
