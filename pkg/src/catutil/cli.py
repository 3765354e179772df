"""Command-line interface: ``catutil analyze | basic-level | simulate | cluster``.

Exit status is 0 on success, 1 when an input file fails validation and 2 on
a usage error (unknown flag, missing flag, malformed flag value).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from catutil import clustering, game
from catutil.dataset import Dataset, DatasetError, HierarchyError, hierarchy_to_json, parse_category, parse_dataset, parse_hierarchy
from catutil.hierarchy import (
    MEASURE_IDS,
    UnknownMeasureError,
    format_number,
    level_report,
    ordering,
    predict_basic_level,
    report_header,
    report_to_json,
    report_to_tsv,
)
from catutil.measures import FeatureRule, MeasureOptions

EXIT_OK, EXIT_INVALID, EXIT_USAGE = 0, 1, 2


class InputError(Exception):
    """A file that could not be read or failed validation."""


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < game.MAX_SEED:
        raise argparse.ArgumentTypeError("seed must be in [0, 2**64)")
    return value


def _log_base(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 1 < value < float("inf"):
        raise argparse.ArgumentTypeError("log base must be a finite number greater than 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="catutil", description="Category Utility analysis of nominal datasets.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--data", required=True, metavar="PATH", help="CSV dataset")
    common.add_argument("--log-base", type=_log_base, default=2.0, metavar="FLOAT")
    common.add_argument("--feature-rule", choices=[r.value for r in FeatureRule], default=FeatureRule.MODAL.value)
    common.add_argument("--format", choices=["tsv", "json"], default="tsv")
    common.add_argument("--output", metavar="PATH", help="write here instead of standard output")

    p = sub.add_parser("analyze", parents=[common], help="per-level measure report")
    p.add_argument("--hierarchy", required=True, metavar="PATH")

    p = sub.add_parser("basic-level", parents=[common], help="basic-level prediction and orderings")
    p.add_argument("--hierarchy", required=True, metavar="PATH")
    p.add_argument("--measure", choices=MEASURE_IDS, default="cu-info-partition")

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo guessing game")
    p.add_argument("--category-file", metavar="PATH", help="JSON id list or {name, members}")
    p.add_argument("--condition", choices=[c.value for c in game.GameCondition], default="partition")
    p.add_argument("--strategy", choices=[s.value for s in game.Strategy], default="matching")
    p.add_argument("--trials", type=_positive_int, default=100_000)
    p.add_argument("--seed", type=_seed, default=0)

    p = sub.add_parser("cluster", parents=[common], help="build a hierarchy by maximizing Category Utility")
    p.add_argument("--method", choices=["exhaustive", "greedy"], default="greedy")
    p.add_argument("--k", type=_positive_int, default=2, help="final block count (greedy)")
    return parser


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None
    except UnicodeDecodeError:
        raise InputError(f"{path}: not UTF-8 text") from None


def _load(kind: str, path: str, parse, *args):
    try:
        return parse(_read(path), *args)
    except (DatasetError, HierarchyError, ValueError) as exc:
        raise InputError(f"{kind} {path}: {exc}") from None


def _options(args) -> MeasureOptions:
    return MeasureOptions(log_base=args.log_base, feature_rule=FeatureRule(args.feature_rule))


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _levels_text(groups) -> str:
    return " > ".join(",".join(str(lv) for lv in g) for g in groups)


def _analyze(args, d: Dataset) -> str:
    h = _load("hierarchy", args.hierarchy, parse_hierarchy, d)
    report = level_report(d, h, _options(args))
    return report_to_json(report) if args.format == "json" else report_to_tsv(report)


def _basic_level(args, d: Dataset) -> str:
    h = _load("hierarchy", args.hierarchy, parse_hierarchy, d)
    opts = _options(args)
    report = level_report(d, h, opts)
    pred = predict_basic_level(report, args.measure)
    orders = {mid: ordering(report, mid) for mid in MEASURE_IDS}
    names = {row.level: row.name for row in report.rows}
    if args.format == "json":
        return _dumps(
            {
                "measure": pred.measure,
                "basic_level": pred.level,
                "name": names.get(pred.level),
                "tied": list(pred.tied),
                "tie_break_used": pred.tie_break_used,
                "orderings": orders,
            }
        )
    lines = ["# " + " ".join(report_header(report))]
    level = "none" if pred.level is None else str(pred.level)
    lines.append(f"measure\t{pred.measure}")
    lines.append(f"basic-level\t{level}")
    lines.append(f"name\t{names.get(pred.level) or ''}")
    lines.append(f"tied\t{','.join(str(t) for t in pred.tied)}")
    lines.append(f"tie-break-used\t{'yes' if pred.tie_break_used else 'no'}")
    for mid in MEASURE_IDS:
        lines.append(f"ordering\t{mid}\t{_levels_text(orders[mid])}")
    return "\n".join(lines) + "\n"


def _simulate(args, d: Dataset) -> str:
    cond = game.GameCondition(args.condition)
    strat = game.Strategy(args.strategy)
    c = None
    if args.category_file:
        c = _load("category", args.category_file, parse_category, d)
    elif cond is not game.GameCondition.NONE:
        raise InputError(f"condition {cond.value!r} needs --category-file")
    opts = _options(args)
    try:
        exact = game.closed_form_score(d, c, cond, strat, opts)
        est = game.simulate(d, c, cond, strat, args.trials, args.seed, opts)
    except DatasetError as exc:
        raise InputError(f"category {args.category_file}: {exc}") from None
    if args.format == "json":
        return _dumps(
            {
                "condition": cond.value,
                "strategy": strat.value,
                "estimate": est.to_dict(),
                "closed_form": float(exact),
                "closed_form_exact": str(exact),
            }
        )
    rows = [
        ("condition", cond.value),
        ("strategy", strat.value),
        ("trials", str(est.trials)),
        ("seed", str(est.seed)),
        ("mean", format_number(est.mean)),
        ("stderr", format_number(est.stderr)),
        ("closed-form", format_number(exact)),
        ("closed-form-exact", str(exact)),
    ]
    return "".join(f"{k}\t{v}\n" for k, v in rows)


def _cluster(args, d: Dataset) -> str:
    opts = _options(args)
    try:
        if args.method == "exhaustive":
            part = clustering.best_split_exhaustive(d, opts)
            h = clustering.hierarchy_from_partitioning(part, d)
        else:
            part = clustering.greedy_agglomerate(d, min(args.k, len(d)), opts)
            h = clustering.hierarchy_from_merges(part.trace, d)
    except DatasetError as exc:
        raise InputError(f"data {args.data}: {exc}") from None
    # the hierarchy file format is JSON whatever --format says
    return hierarchy_to_json(h, d)


COMMANDS = {"analyze": _analyze, "basic-level": _basic_level, "simulate": _simulate, "cluster": _cluster}


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        d = _load("data", args.data, parse_dataset)
        text = COMMANDS[args.command](args, d)
    except InputError as exc:
        print(f"catutil: error: {exc}", file=stderr)
        return EXIT_INVALID
    except UnknownMeasureError as exc:
        print(f"catutil: error: {exc}", file=stderr)
        return EXIT_USAGE
    if args.output:
        try:
            Path(args.output).write_text(text, encoding="utf-8")
        except OSError as exc:
            print(f"catutil: error: {args.output}: {exc.strerror or exc}", file=stderr)
            return EXIT_INVALID
    else:
        stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
