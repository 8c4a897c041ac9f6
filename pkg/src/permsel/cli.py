"""Command-line interface.

Subcommands: run (full experiment from a JSON config), synth (generate a
synthetic regression CSV), rank (single-method feature ranking), select
(one evolutionary subset-selection run), report (summaries from an
existing report CSV).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .dataset import (
    SyntheticSpec,
    Task,
    generate_synthetic,
    load_csv,
    split,
    write_csv,
)
from .learner import LearnerSpec
from .moea import MoeaConfig, evolve
from .runner import (
    MethodSpec,
    aggregate,
    load_config,
    read_report_csv,
    run_experiment,
    run_selection,
    write_summary,
)


def _parse_task(text: str) -> Task:
    return Task.CLASSIFICATION if text in ("cls", "classification") else Task.REGRESSION


def _parse_synth_spec(text: str, seed: int) -> SyntheticSpec:
    parts = text.split(",")
    if len(parts) != 4:
        raise SystemExit("--spec expects n,features,informative,noise")
    return SyntheticSpec(int(parts[0]), int(parts[1]), int(parts[2]),
                         float(parts[3]), seed)


def cmd_run(args) -> int:
    from dataclasses import replace
    cfg = load_config(args.config)
    if args.workers is not None:
        cfg = replace(cfg, workers=args.workers)
    if args.out is not None:
        cfg = replace(cfg, output_dir=args.out)
    rows = run_experiment(cfg)
    n_err = sum(1 for r in rows if r.status != "ok")
    print(f"{len(rows)} report rows ({n_err} failures)"
          + (f" written under {cfg.output_dir}" if cfg.output_dir else ""))
    return 0 if n_err == 0 else 1


def cmd_synth(args) -> int:
    spec = _parse_synth_spec(args.spec, args.seed)
    ds = generate_synthetic(spec)
    write_csv(ds, args.out)
    print(f"wrote {ds.n_rows} rows x {ds.n_features} features to {args.out}")
    return 0


def cmd_rank(args) -> int:
    task = _parse_task(args.task)
    ds = load_csv(args.data, task, target_col=args.target_col)
    part = split(ds, args.seed, stratified=task is Task.CLASSIFICATION)
    params = {}
    if args.method in ("pfi-v1", "pfi-v2"):
        params["repeats"] = args.repeats
    if args.method == "infogain":
        params["bins"] = args.bins
    learner = LearnerSpec(n_trees=args.trees)
    sel = run_selection(ds, part, MethodSpec(args.method, params), args.seed, learner)
    order = sel.scores.ranking
    lines = ["feature,name,score"]
    limit = args.k if args.k is not None else len(order)
    for i in order[:limit]:
        lines.append(f"{i},{ds.feature_names[i]},{sel.scores.scores[i]!r}")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_select(args) -> int:
    task = _parse_task(args.task)
    ds = load_csv(args.data, task, target_col=args.target_col)
    part = split(ds, args.seed, stratified=task is Task.CLASSIFICATION)
    cfg = MoeaConfig(population_size=args.pop, generations=args.gens,
                     crossover_prob=args.crossover, mutation_prob=args.mutation,
                     seed=args.seed, variant=args.variant)
    learner = LearnerSpec(n_trees=args.trees)
    trace = evolve(ds, part, learner, cfg)
    selected = trace.selected_features()
    print(f"selected {selected.size} of {ds.n_features} features "
          f"(merit {trace.best.merit!r})")
    print(",".join(str(i) for i in selected))
    if args.trace_out:
        with open(args.trace_out, "w", encoding="utf-8") as fh:
            json.dump(trace.to_json_dict(), fh, indent=1)
        print(f"trace written to {args.trace_out}")
    return 0


def cmd_report(args) -> int:
    report = os.path.join(args.in_dir, "reports", "report.csv")
    rows = read_report_csv(report)
    tables = aggregate(rows)
    write_summary(os.path.join(args.in_dir, "summary"), tables)
    print(f"summary tables written under {os.path.join(args.in_dir, 'summary')}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="permsel",
                                     description="Permutation-based feature subset selection")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default=None, help="override output directory")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("synth", help="generate a synthetic regression CSV")
    p.add_argument("--spec", required=True, metavar="N,W,INFORMATIVE,NOISE")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("rank", help="rank features with one method")
    p.add_argument("--method", required=True,
                   choices=["pfi-v1", "pfi-v2", "corr", "infogain"])
    p.add_argument("--data", required=True)
    p.add_argument("--task", required=True, choices=["cls", "reg"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--trees", type=int, default=100)
    p.add_argument("--k", type=int, default=None, help="print only the top k")
    p.add_argument("--target-col", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("select", help="evolutionary subset selection")
    p.add_argument("--variant", required=True, choices=["v1", "v2"])
    p.add_argument("--data", required=True)
    p.add_argument("--task", required=True, choices=["cls", "reg"])
    p.add_argument("--pop", type=int, default=50)
    p.add_argument("--gens", type=int, default=2000)
    p.add_argument("--crossover", type=float, default=1.0)
    p.add_argument("--mutation", type=float, default=0.02)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trees", type=int, default=100)
    p.add_argument("--target-col", type=int, default=None)
    p.add_argument("--trace-out", default=None)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("report", help="summaries from an existing run directory")
    p.add_argument("--in", dest="in_dir", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
