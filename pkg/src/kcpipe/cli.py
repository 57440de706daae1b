"""Command-line entry point (installed as ``kc``).

Subcommands mirror the pipeline stages: ingest and validate a dataset,
plan stratified folds, run a cross-validated training job, compare runs
statistically, and render report tables.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .corpus import KCLabel, ingest, stratified_kfold, write_jsonl
from .errors import DegenerateInputError, NumericError, ValidationError
from .runner import (ExperimentConfig, compare_models, report, run_cv,
                     write_comparison)


def _infer_format(path: str, explicit: str | None) -> str:
    if explicit:
        return explicit
    return "csv" if path.endswith(".csv") else "jsonl"


def _cmd_ingest(args) -> int:
    data = ingest(args.file, format=_infer_format(args.file, args.format))
    print(f"{args.file}: {len(data)} examples")
    for lab in KCLabel:
        print(f"  {lab.display_name:<10} {data.class_counts[lab]}")
    if args.out:
        write_jsonl(data, args.out)
        print(f"normalized dataset written to {args.out}")
    return 0


def _cmd_split(args) -> int:
    data = ingest(args.file, format=_infer_format(args.file, args.format))
    plan = stratified_kfold(data, n_folds=args.folds, seed=args.seed)
    Path(args.out).write_text(plan.to_json() + "\n", encoding="utf-8")
    sizes = [0] * plan.n_folds
    for fold in plan.assignment.values():
        sizes[fold] += 1
    print(f"fold plan written to {args.out}")
    print("fold sizes: " + ", ".join(str(s) for s in sizes))
    return 0


def _cmd_train(args) -> int:
    if args.config:
        cfg = ExperimentConfig.from_dict(
            json.loads(Path(args.config).read_text(encoding="utf-8")))
    elif args.data:
        cfg = ExperimentConfig(dataset=args.data)
    else:
        raise ValidationError("provide --config and/or --data")
    overrides = {}
    if args.model:
        overrides["model"] = args.model
    if args.data:
        overrides["dataset"] = args.data
    if args.out:
        overrides["out_dir"] = args.out
    if args.folds:
        overrides["n_folds"] = args.folds
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        import dataclasses
        cfg = dataclasses.replace(cfg, **overrides)
    result = run_cv(cfg)
    agg = result.summary["aggregate"]["metrics"]["macro_f1"]
    print(f"{cfg.model}: macro-F1 {agg['mean']:.3f} ± {agg['sd']:.3f} "
          f"over {cfg.n_folds} folds -> {result.run_dir}")
    return 0


def _cmd_compare(args) -> int:
    table = compare_models(args.dirs, correction=args.correction,
                           n_resamples=args.bootstrap, seed=args.seed)
    write_comparison(table, args.out)
    print(f"Friedman chi2 = {table.friedman_chi2:.3f}, p = {table.friedman_p:.4g}")
    fmt = lambda p: "n/a" if p is None else f"{p:.4f}"
    for pair in table.pairs:
        print(f"{pair.model_a} vs {pair.model_b}: delta = {pair.delta_mean:+.4f}, "
              f"p_wilcoxon = {fmt(pair.p_wilcoxon)}, adjusted = {fmt(pair.p_adjusted)} "
              f"[{pair.verdict}]")
    print(f"comparison written to {args.out}")
    return 0


def _cmd_report(args) -> int:
    text = report(args.dirs, out_dir=args.out)
    print(text)
    print(f"\nreport files written to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kc",
        description="knowledge-construction comment classification pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a dataset file and print class counts")
    p.add_argument("file")
    p.add_argument("--format", choices=["csv", "jsonl"])
    p.add_argument("--out", help="write the normalized dataset as JSONL")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("split", help="write a stratified fold plan")
    p.add_argument("file")
    p.add_argument("--format", choices=["csv", "jsonl"])
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="foldplan.json")
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("train", help="run cross-validated training")
    p.add_argument("--model", choices=["tfidf-lr", "tfidf-svm", "neural"])
    p.add_argument("--config", help="experiment config JSON")
    p.add_argument("--data", help="dataset path (overrides config)")
    p.add_argument("--out", help="run directory (overrides config)")
    p.add_argument("--folds", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("compare", help="statistical comparison of runs")
    p.add_argument("dirs", nargs="+")
    p.add_argument("--correction", choices=["holm", "none"], default="holm")
    p.add_argument("--bootstrap", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="comparison")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("report", help="render summary tables and plot CSVs")
    p.add_argument("dirs", nargs="+")
    p.add_argument("--out", default="report")
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, DegenerateInputError, NumericError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
