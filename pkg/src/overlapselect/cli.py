"""Command-line front end. Thin adapters only; no numeric logic lives here.

Exit status: 0 success, 1 runtime failure (file or data problems, prefixed
"error:"), 2 usage errors (argparse, prefixed "usage:"). All randomness flows
from --seed, which defaults to 0; wall-clock entropy is never used.
"""
from __future__ import annotations

import argparse
import json
import sys

from .classify import ClassifierConfig, evaluate
from .dataset import LoadConfig, SplitSpec, load_csv, stratified_split
from .experiment import ExperimentSpec, export_report, run_experiment
from .overlap import BinSpec, overlap_table
from .selection import (DEFAULT_GRID, DEFAULT_THRESHOLD, heuristic_threshold,
                        rank_features, select_by_threshold, top_k)


def _add_load_flags(parser):
    parser.add_argument("--input", required=True, help="CSV dataset path")
    parser.add_argument("--label-column", type=int, default=-1,
                        help="label column index (default: last)")
    parser.add_argument("--no-header", action="store_true",
                        help="the CSV has no header row")
    parser.add_argument("--missing-token", default="?",
                        help="cell value meaning missing (default '?')")
    parser.add_argument("--imputation", choices=("median", "drop"),
                        default="median", help="missing-value policy")


def _add_split_flags(parser):
    parser.add_argument("--seed", type=int, default=0,
                        help="root random seed (default 0)")
    parser.add_argument("--train-fraction", type=float, default=0.5)
    parser.add_argument("--rep", type=int, default=0,
                        help="repetition index of the split to use")
    parser.add_argument("--full-data", action="store_true",
                        help="skip splitting; use every row as training data")


def _add_bin_flags(parser):
    parser.add_argument("--bins", choices=("smooth", "integer", "uniform", "auto"),
                        default="smooth", help="density mode (default smooth)")
    parser.add_argument("--bin-count", type=int, default=None,
                        help="bin count for uniform mode")
    parser.add_argument("--grid-size", type=int, default=200,
                        help="grid cells for smooth mode")


def _add_classifier_flags(parser):
    parser.add_argument("--classifier", choices=("nn", "nb"), default="nn")
    parser.add_argument("--metric", choices=("euclidean", "manhattan"),
                        default="euclidean")
    parser.add_argument("--scaling", choices=("none", "minmax"), default="none")


def _add_out_flag(parser, default_format):
    parser.add_argument("--out", default="-",
                        help="output path; '-' writes to standard output")
    parser.add_argument("--format", choices=("json", "csv"),
                        default=default_format)


def _load(args):
    config = LoadConfig(label_column=args.label_column,
                        header=not args.no_header,
                        missing_token=args.missing_token,
                        imputation=args.imputation)
    return load_csv(args.input, config)


def _train_partition(dataset, args):
    if args.full_data:
        return dataset
    spec = SplitSpec(train_fraction=args.train_fraction, seed=args.seed,
                     repetitions=max(args.rep + 1, 1))
    train, _ = stratified_split(dataset, spec, args.rep)
    return train


def _bins(args):
    return BinSpec(mode=args.bins, bin_count=args.bin_count,
                   grid_size=args.grid_size)


def _classifier(args):
    kind = "nearest-neighbor" if args.classifier == "nn" else "naive-bayes"
    return ClassifierConfig(kind=kind, metric=args.metric, scaling=args.scaling)


def _parse_grid(text):
    if ":" in text:
        start, stop, step = (float(x) for x in text.split(":"))
        grid, t = [], start
        while t <= stop + 1e-12:
            grid.append(round(t, 10))
            t += step
        return tuple(grid)
    return tuple(float(x) for x in text.split(","))


def _write_text(path, text):
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _write_json(path, payload):
    _write_text(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="overlapselect",
        description="Feature selection by intra/inter-class difference overlap")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("overlap", help="write the A_o / A_r / A_min table")
    for add in (_add_load_flags, _add_split_flags, _add_bin_flags):
        add(p)
    _add_out_flag(p, "csv")

    p = sub.add_parser("select", help="select attributes below a threshold")
    for add in (_add_load_flags, _add_split_flags, _add_bin_flags):
        add(p)
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    _add_out_flag(p, "json")

    p = sub.add_parser("rank", help="rank selected attributes by individual accuracy")
    for add in (_add_load_flags, _add_split_flags, _add_bin_flags,
                _add_classifier_flags):
        add(p)
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.add_argument("--top", type=int, default=None,
                   help="also report the top-k prefix")
    _add_out_flag(p, "json")

    p = sub.add_parser("evaluate", help="train/test accuracy on chosen features")
    for add in (_add_load_flags, _add_split_flags, _add_bin_flags,
                _add_classifier_flags):
        add(p)
    p.add_argument("--features", default=None,
                   help="comma-separated attribute indices; omit to select by threshold")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    _add_out_flag(p, "json")

    p = sub.add_parser("sweep", help="LOOCV threshold sweep on the training half")
    for add in (_add_load_flags, _add_split_flags, _add_bin_flags,
                _add_classifier_flags):
        add(p)
    p.add_argument("--grid", default=None,
                   help="comma list or start:stop:step (default 0.05:0.5:0.05)")
    _add_out_flag(p, "json")

    p = sub.add_parser("experiment", help="run a JSON experiment spec")
    p.add_argument("--spec", required=True, help="ExperimentSpec JSON path")
    p.add_argument("--jobs", type=int, default=None,
                   help="worker cap; never changes results")
    _add_out_flag(p, "json")
    return parser


def _cmd_overlap(args) -> None:
    table = overlap_table(_train_partition(_load(args), args), _bins(args))
    if args.format == "json":
        _write_json(args.out, table.to_dict())
    elif args.out == "-":
        table.to_csv(sys.stdout)
    else:
        with open(args.out, "w", newline="") as fh:
            table.to_csv(fh)


def _cmd_select(args) -> None:
    table = overlap_table(_train_partition(_load(args), args), _bins(args))
    result = select_by_threshold(table, args.threshold)
    if args.format == "json":
        _write_json(args.out, result.to_dict())
    else:
        rows = result.to_dict()
        lines = ["attribute,name,A_min"]
        for a, name, amin in zip(rows["selected"], rows["selected_names"],
                                 rows["min_overlap"]):
            lines.append(f"{a},{name},{amin!r}")
        _write_text(args.out, "\n".join(lines) + "\n")


def _cmd_rank(args) -> None:
    train = _train_partition(_load(args), args)
    table = overlap_table(train, _bins(args))
    selection = select_by_threshold(table, args.threshold)
    ranked = rank_features(train, selection, _classifier(args))
    payload = {"threshold": args.threshold, "ranking": ranked.to_rows()}
    if args.top is not None:
        payload["top"] = list(top_k(ranked, args.top))
    if args.format == "json":
        _write_json(args.out, payload)
    else:
        lines = ["attribute,accuracy,A_min"]
        for row in ranked.to_rows():
            lines.append(f"{row['attribute']},{row['accuracy']!r},{row['A_min']!r}")
        _write_text(args.out, "\n".join(lines) + "\n")


def _cmd_evaluate(args) -> None:
    dataset = _load(args)
    if args.full_data:
        raise ValueError("evaluate needs a train/test split; drop --full-data")
    spec = SplitSpec(train_fraction=args.train_fraction, seed=args.seed,
                     repetitions=max(args.rep + 1, 1))
    train, test = stratified_split(dataset, spec, args.rep)
    if args.features:
        features = tuple(int(x) for x in args.features.split(","))
        threshold = None
    else:
        table = overlap_table(train, _bins(args))
        features = select_by_threshold(table, args.threshold).selected
        threshold = args.threshold
    result = evaluate(train, test, features, _classifier(args))
    payload = result.to_dict()
    payload["features"] = list(features)
    if threshold is not None:
        payload["threshold"] = threshold
    _write_json(args.out, payload)


def _cmd_sweep(args) -> None:
    train = _train_partition(_load(args), args)
    grid = _parse_grid(args.grid) if args.grid else DEFAULT_GRID
    search = heuristic_threshold(train, _bins(args), grid, _classifier(args))
    _write_json(args.out, {"best_threshold": search.threshold,
                           "best_accuracy": search.accuracy,
                           "curve": [list(point) for point in search.curve]})


def _cmd_experiment(args) -> None:
    with open(args.spec) as fh:
        payload = json.load(fh)
    spec = ExperimentSpec.from_dict(payload)
    if args.jobs is not None:
        spec = ExperimentSpec.from_dict({**spec.to_dict(), "jobs": args.jobs})
    report = run_experiment(spec)
    export_report(report, args.format, args.out)


_COMMANDS = {"overlap": _cmd_overlap, "select": _cmd_select, "rank": _cmd_rank,
             "evaluate": _cmd_evaluate, "sweep": _cmd_sweep,
             "experiment": _cmd_experiment}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _COMMANDS[args.command](args)
    except Exception as exc:  # argparse already handled usage errors with exit 2
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
