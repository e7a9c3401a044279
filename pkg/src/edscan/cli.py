"""Command line interface.

Three subcommands: ``detect`` runs the single change-point test on a CSV
table, ``segment`` runs the recursive segmentation, and ``simulate``
replays Monte Carlo scenarios. Reports are JSON (canonical: sorted keys)
or plot-ready CSV. Exit codes: 0 on success, 2 for input or
configuration errors, 3 when the data are too degenerate to analyze.

Reported positions are 1-based within each ordered group; a change point
at position k means the change falls between observations k and k + 1.
"""

import argparse
import csv
import json
import math
import os
import sys
import time

import numpy as np
from joblib import Parallel, delayed

from ._validation import as_seed_sequence, spawn_seed
from .calibration import detect_single
from .exceptions import DegenerateScaleError
from .segmentation import segment_series
from .simulate import (
    Change,
    DetectorSettings,
    PRESET_NAMES,
    Scenario,
    preset_scenario,
    run_localization,
    run_power,
    run_size,
    standard_family,
)

__all__ = ["main"]

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DEGENERATE = 3

SEED_ENV_VAR = "EDSCAN_SEED"


class CliError(Exception):
    """Input or configuration problem; maps to exit code 2."""


def _add_detector_arguments(parser):
    group = parser.add_argument_group("detector")
    group.add_argument("--trim", type=float, default=0.1,
                       help="fraction trimmed from each end of the split "
                            "search (default 0.1)")
    group.add_argument("--exponent", type=float, default=1.0,
                       help="power applied to euclidean distances, in (0, 2) "
                            "(default 1.0)")
    group.add_argument("--alpha", type=float, default=0.05,
                       help="test level (default 0.05)")
    group.add_argument("--permutations", type=int, default=999,
                       dest="n_permutations", metavar="L",
                       help="permutation replicates (default 999)")
    group.add_argument("--scheme", choices=["uniform", "circular_block"],
                       default=None,
                       help="permutation scheme (default uniform, or "
                            "circular_block under --genomic)")
    group.add_argument("--block-length", type=int, default=None, metavar="M",
                       help="block length for the circular block scheme "
                            "(default ceil(sqrt(n)))")


def _add_io_arguments(parser):
    group = parser.add_argument_group("input/output")
    group.add_argument("--seed", type=int, default=None,
                       help=f"random seed; falls back to ${SEED_ENV_VAR}, "
                            "then to fresh entropy echoed in the report")
    group.add_argument("--format", choices=["json", "csv"], default="json",
                       help="report format (default json)")
    group.add_argument("--output", default=None, metavar="FILE",
                       help="write the report here instead of stdout")
    group.add_argument("--jobs", type=int, default=1,
                       help="parallel workers (default 1, -1 for all cores)")


def _add_table_arguments(parser):
    group = parser.add_argument_group("table")
    group.add_argument("input", help="CSV file with a header row, or - for stdin")
    group.add_argument("--values", default=None, metavar="COLS",
                       help="comma-separated value columns (default: every "
                            "column not used for grouping or ordering)")
    group.add_argument("--group-col", default=None, metavar="COL",
                       help="analyze each value of this column separately")
    group.add_argument("--order-col", default=None, metavar="COL",
                       help="numeric column that orders rows within a group "
                            "(default: file order); ties keep file order")
    group.add_argument("--genomic", action="store_true",
                       help="preset for serially dependent tracks such as "
                            "along-genome measurements: makes circular_block "
                            "the default permutation scheme")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="edscan",
        description="Change-point detection by permutation-calibrated "
                    "energy-distance scans.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    detect = sub.add_parser(
        "detect", help="test each group for a single change point")
    _add_table_arguments(detect)
    _add_detector_arguments(detect)
    _add_io_arguments(detect)

    segment = sub.add_parser(
        "segment", help="recursively segment each group")
    _add_table_arguments(segment)
    _add_detector_arguments(segment)
    segment.add_argument("--min-segment", type=int, default=None, metavar="N",
                         help="shortest segment still tested "
                              "(default max(4, ceil(2 * trim * n)))")
    segment.add_argument("--correction", choices=["none", "bonferroni"],
                         default="none",
                         help="multiplicity correction across the recursion")
    segment.add_argument("--max-tests", type=int, default=None,
                         help="test budget for --correction bonferroni")
    segment.add_argument("--trace", action="store_true",
                         help="include the per-segment recursion trace in the "
                              "JSON report")
    _add_io_arguments(segment)

    simulate = sub.add_parser(
        "simulate", help="run a Monte Carlo scenario")
    simulate.add_argument("--preset", choices=list(PRESET_NAMES), default=None,
                          help="replication preset; pick a cell with --cell")
    simulate.add_argument("--cell", default=None, metavar="SPEC",
                          help="preset cell, e.g. 'normal,n=100' or "
                               "'n=50,shift=1.5,at=0.3'")
    simulate.add_argument("--kind", choices=["size", "power", "localization"],
                          default=None,
                          help="custom run kind (inferred when omitted)")
    simulate.add_argument("--dist",
                          choices=["normal", "skew-normal", "exponential"],
                          default="normal",
                          help="base family for custom runs (default normal)")
    simulate.add_argument("--n", type=int, default=100,
                          help="series length for custom runs (default 100)")
    simulate.add_argument("--change-at", type=float, default=None,
                          metavar="FRACTION",
                          help="change location as a fraction of the series")
    simulate.add_argument("--mean-shift", type=float, default=None,
                          help="post-change mean shift")
    simulate.add_argument("--new-variance", type=float, default=None,
                          help="post-change variance")
    simulate.add_argument("--new-shape", type=float, default=None,
                          help="post-change shape (skew-normal only)")
    simulate.add_argument("--replications", type=int, default=None,
                          help="Monte Carlo replicates (default 1000)")
    simulate.add_argument("--conditional", action="store_true",
                          help="average localization error over rejecting "
                               "replicates only (runs the full test)")
    _add_detector_arguments(simulate)
    _add_io_arguments(simulate)

    return parser


def _resolve_seed(seed_arg):
    if seed_arg is not None:
        return np.random.SeedSequence(seed_arg)
    raw = os.environ.get(SEED_ENV_VAR)
    if raw:
        try:
            return np.random.SeedSequence(int(raw))
        except ValueError:
            raise CliError(
                f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from None
    return np.random.SeedSequence()


def _resolve_scheme(args):
    if args.scheme is not None:
        return args.scheme
    if getattr(args, "genomic", False):
        return "circular_block"
    return "uniform"


def _detector_kwargs(args):
    return {
        "trim": args.trim,
        "exponent": args.exponent,
        "alpha": args.alpha,
        "n_permutations": args.n_permutations,
        "scheme": _resolve_scheme(args),
        "block_length": args.block_length,
    }


# --- table ingestion -------------------------------------------------------

class TableGroup:
    """One ordered group of rows: values (n, d) plus their order keys."""

    def __init__(self, key, values, orders):
        self.key = key
        self.values = values
        self.orders = orders

    @property
    def n_samples(self):
        return self.values.shape[0]


def _parse_number(cell, column, line_num):
    text = (cell or "").strip()
    try:
        value = float(text)
    except ValueError:
        raise CliError(
            f"row {line_num}: could not parse {text!r} in column "
            f"{column!r} as a number") from None
    if not math.isfinite(value):
        raise CliError(
            f"row {line_num}: non-finite value {text!r} in column {column!r}")
    return value


def read_table(stream, *, value_columns=None, group_column=None,
               order_column=None):
    """Parse a header CSV into ordered groups.

    Rows are grouped by ``group_column`` (a single unnamed group without
    one) and sorted by the numeric ``order_column`` with ties keeping
    file order; without one, file order is used and order keys are the
    1-based row positions. Row numbers in error messages count physical
    file lines, header included.
    """
    reader = csv.DictReader(stream)
    header = reader.fieldnames
    if not header:
        raise CliError("input has no header row")
    named = [c for c in (group_column, order_column, *(value_columns or []))]
    for column in named:
        if column is not None and column not in header:
            raise CliError(
                f"column {column!r} not found; available: {', '.join(header)}")
    if value_columns is None:
        value_columns = [c for c in header
                         if c not in (group_column, order_column)]
        if not value_columns:
            raise CliError("no value columns left after grouping and ordering")

    rows_by_key = {}
    for row in reader:
        line = reader.line_num
        key = row.get(group_column, "") if group_column else ""
        if group_column and key is None:
            raise CliError(f"row {line}: missing group value")
        values = [_parse_number(row.get(c), c, line) for c in value_columns]
        if order_column:
            order = _parse_number(row.get(order_column), order_column, line)
        else:
            order = None
        rows_by_key.setdefault(key, []).append((order, values))
    if not rows_by_key:
        raise CliError("input has no data rows")

    groups = []
    skipped = []
    for key in sorted(rows_by_key):
        rows = rows_by_key[key]
        label = key if group_column else None
        if len(rows) < 4:
            skipped.append((label, len(rows)))
            continue
        if order_column:
            orders = np.array([r[0] for r in rows], dtype=np.float64)
            index = np.argsort(orders, kind="stable")
            orders = [float(orders[i]) for i in index]
        else:
            index = np.arange(len(rows))
            orders = [int(i + 1) for i in index]
        values = np.array([rows[i][1] for i in index], dtype=np.float64)
        groups.append(TableGroup(label, values, orders))
    if not groups:
        raise CliError("every group has fewer than the minimum 4 rows")
    return groups, skipped


def _open_table(args):
    if args.input == "-":
        return read_table(
            sys.stdin,
            value_columns=args.values.split(",") if args.values else None,
            group_column=args.group_col,
            order_column=args.order_col,
        )
    try:
        with open(args.input, newline="") as stream:
            return read_table(
                stream,
                value_columns=args.values.split(",") if args.values else None,
                group_column=args.group_col,
                order_column=args.order_col,
            )
    except OSError as exc:
        raise CliError(f"cannot read {args.input}: {exc.strerror}") from None


def _warn_skipped(skipped):
    for label, count in skipped:
        name = "ungrouped rows" if label is None else f"group {label!r}"
        rows = "row" if count == 1 else "rows"
        print(f"warning: skipping {name}: {count} {rows}, need at least 4",
              file=sys.stderr)


def _boundary(group, position):
    """1-based change-point entry with the order keys either side of it."""
    return {
        "position": int(position),
        "order_before": group.orders[position - 1],
        "order_after": group.orders[position],
    }


# --- detect ----------------------------------------------------------------

def _detect_group(group, kwargs, seed):
    decision = detect_single(group.values, random_state=seed, **kwargs)
    entry = {
        "group": group.key,
        "n_samples": int(decision.n_samples),
        "statistic": float(decision.statistic),
        "critical_value": float(decision.critical_value),
        "p_value": float(decision.p_value),
        "reject": bool(decision.reject),
        "block_length": (None if decision.block_length is None
                         else int(decision.block_length)),
        "change_point": (None if decision.change_point is None
                         else _boundary(group, decision.change_point)),
    }
    return entry


def _run_groups(worker, groups, kwargs, root_seed, jobs):
    tasks = [(g, kwargs, spawn_seed(root_seed, i))
             for i, g in enumerate(groups)]
    if jobs == 1 or len(groups) == 1:
        return [worker(*task) for task in tasks]
    return Parallel(n_jobs=jobs)(delayed(worker)(*task) for task in tasks)


def _run_detect(args):
    groups, skipped = _open_table(args)
    _warn_skipped(skipped)
    root = _resolve_seed(args.seed)
    kwargs = _detector_kwargs(args)
    entries = _run_groups(_detect_group, groups, kwargs, root, args.jobs)
    report = {
        "command": "detect",
        "parameters": kwargs,
        "seed_entropy": int(root.entropy),
        "groups": entries,
        "skipped": [{"group": label, "n_rows": count}
                    for label, count in skipped],
    }
    fields = ["group", "n_samples", "statistic", "critical_value", "p_value",
              "reject", "change_position", "order_before", "order_after"]
    rows = []
    for entry in entries:
        point = entry["change_point"]
        rows.append({
            "group": "" if entry["group"] is None else entry["group"],
            "n_samples": entry["n_samples"],
            "statistic": entry["statistic"],
            "critical_value": entry["critical_value"],
            "p_value": entry["p_value"],
            "reject": int(entry["reject"]),
            "change_position": "" if point is None else point["position"],
            "order_before": "" if point is None else point["order_before"],
            "order_after": "" if point is None else point["order_after"],
        })
    return report, rows, fields


# --- segment ---------------------------------------------------------------

def _segment_group(group, kwargs, seed):
    report = segment_series(group.values, random_state=seed, **kwargs)
    points = [int(p) for p in report.change_points]
    bounds = [0, *points, report.n_samples]
    segments = []
    for index, (start, stop) in enumerate(zip(bounds[:-1], bounds[1:])):
        segments.append({
            "segment": index + 1,
            "start": start + 1,
            "stop": stop,
            "order_start": group.orders[start],
            "order_stop": group.orders[stop - 1],
            "length": stop - start,
        })
    trace = []
    for node in report.nodes:
        entry = {
            "start": node.start + 1,
            "stop": node.stop,
            "depth": node.depth,
            "tested": node.decision is not None,
            "note": node.note,
        }
        if node.decision is not None:
            entry.update({
                "statistic": float(node.decision.statistic),
                "critical_value": float(node.decision.critical_value),
                "p_value": float(node.decision.p_value),
                "reject": bool(node.decision.reject),
            })
        if node.split is not None:
            entry["split"] = int(node.split)
        trace.append(entry)
    return {
        "group": group.key,
        "n_samples": int(report.n_samples),
        "min_segment": int(report.min_segment),
        "tested_level": float(report.tested_level),
        "depth": int(report.depth),
        "change_points": [_boundary(group, p) for p in points],
        "segments": segments,
        "trace": trace,
    }


def _run_segment(args):
    groups, skipped = _open_table(args)
    _warn_skipped(skipped)
    root = _resolve_seed(args.seed)
    kwargs = _detector_kwargs(args)
    kwargs.update({
        "min_segment": args.min_segment,
        "correction": args.correction,
        "max_tests": args.max_tests,
    })
    entries = _run_groups(_segment_group, groups, kwargs, root, args.jobs)
    if not args.trace:
        for entry in entries:
            del entry["trace"]
    report = {
        "command": "segment",
        "parameters": kwargs,
        "seed_entropy": int(root.entropy),
        "groups": entries,
        "skipped": [{"group": label, "n_rows": count}
                    for label, count in skipped],
    }
    fields = ["group", "segment", "start", "stop", "order_start",
              "order_stop", "length"]
    rows = []
    for entry in entries:
        for segment in entry["segments"]:
            rows.append({
                "group": "" if entry["group"] is None else entry["group"],
                **segment,
            })
    return report, rows, fields


# --- simulate --------------------------------------------------------------

def _parse_cell(text):
    cell = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            cell["dist"] = part
            continue
        key, _, value = part.partition("=")
        key, value = key.strip(), value.strip()
        try:
            if key == "n":
                cell["n"] = int(value)
            elif key in ("shift", "at"):
                cell[key] = float(value)
            elif key == "dist":
                cell["dist"] = value
            else:
                raise CliError(
                    f"unknown cell key {key!r}; expected dist, n, shift or at")
        except ValueError:
            raise CliError(
                f"could not parse cell entry {part!r}") from None
    return cell


def _build_simulation(args):
    detector = DetectorSettings(**_detector_kwargs(args))
    replications = args.replications if args.replications is not None else 1000
    custom_flags = (args.change_at, args.mean_shift, args.new_variance,
                    args.new_shape)
    if args.preset is not None:
        if any(flag is not None for flag in custom_flags):
            raise CliError(
                "--preset conflicts with the custom scenario flags; "
                "use --cell to pick the cell")
        if args.cell is None:
            raise CliError("--preset needs --cell, e.g. --cell normal,n=100")
        cell = _parse_cell(args.cell)
        try:
            scenario, kind = preset_scenario(
                args.preset, replications=replications, detector=detector,
                **cell)
        except ValueError as exc:
            raise CliError(str(exc)) from None
        return scenario, kind, cell
    if args.cell is not None:
        raise CliError("--cell needs --preset")
    base = standard_family(args.dist)
    change = None
    if any(flag is not None for flag in custom_flags[1:]) or \
            args.change_at is not None:
        if args.change_at is None:
            raise CliError("a custom change needs --change-at")
        change = Change(fraction=args.change_at, mean_shift=args.mean_shift,
                        variance=args.new_variance, shape=args.new_shape)
    kind = args.kind
    if kind is None:
        kind = "size" if change is None else "power"
    if kind == "size" and change is not None:
        raise CliError("size runs take no change flags")
    if kind != "size" and change is None:
        raise CliError(f"{kind} runs need --change-at plus a change flag")
    scenario = Scenario(base=base, n_samples=args.n, change=change,
                        replications=replications, detector=detector)
    return scenario, kind, None


def _run_simulate(args):
    try:
        scenario, kind, cell = _build_simulation(args)
    except (ValueError, TypeError) as exc:
        if isinstance(exc, CliError):
            raise
        raise CliError(str(exc)) from None
    root = _resolve_seed(args.seed)
    runners = {
        "size": run_size,
        "power": run_power,
        "localization": run_localization,
    }
    extra = {"conditional": args.conditional} if kind == "localization" else {}
    summary = runners[kind](scenario, random_state=root, n_jobs=args.jobs,
                            **extra)
    change = scenario.change
    report = {
        "command": "simulate",
        "kind": kind,
        "preset": args.preset,
        "cell": cell,
        "scenario": {
            "base": scenario.base.describe(),
            "n_samples": scenario.n_samples,
            "change": None if change is None else {
                "fraction": change.fraction,
                "mean_shift": change.mean_shift,
                "variance": change.variance,
                "shape": change.shape,
            },
            "replications": scenario.replications,
        },
        "parameters": _detector_kwargs(args),
        "seed_entropy": int(root.entropy),
        "summary": {
            "rejection_rate": summary.rejection_rate,
            "rejection_se": summary.rejection_se,
            "localization_error": summary.localization_error,
            "localization_se": summary.localization_se,
        },
    }
    fields = ["kind", "preset", "family", "n_samples", "fraction",
              "mean_shift", "replications", "rejection_rate", "rejection_se",
              "localization_error", "localization_se"]
    blank = lambda value: "" if value is None else value
    rows = [{
        "kind": kind,
        "preset": blank(args.preset),
        "family": scenario.base.describe()["family"],
        "n_samples": scenario.n_samples,
        "fraction": blank(None if change is None else change.fraction),
        "mean_shift": blank(None if change is None else change.mean_shift),
        "replications": scenario.replications,
        "rejection_rate": blank(summary.rejection_rate),
        "rejection_se": blank(summary.rejection_se),
        "localization_error": blank(summary.localization_error),
        "localization_se": blank(summary.localization_se),
    }]
    return report, rows, fields


# --- output ----------------------------------------------------------------

def _emit(args, report, rows, fields):
    if args.format == "json":
        text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    else:
        import io
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        text = buffer.getvalue()
    if args.output is None:
        sys.stdout.write(text)
    else:
        with open(args.output, "w") as stream:
            stream.write(text)


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else int(exc.code)
    runners = {
        "detect": _run_detect,
        "segment": _run_segment,
        "simulate": _run_simulate,
    }
    start = time.perf_counter()
    try:
        report, rows, fields = runners[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DegenerateScaleError as exc:
        print(f"error: degenerate data: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report["timing_seconds"] = round(time.perf_counter() - start, 6)
    _emit(args, report, rows, fields)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
