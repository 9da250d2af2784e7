"""Command-line entry point: ``subanneal <command> ...``."""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import bimodal, urns
from . import rng as rngs
from .bench import (BENCH_STRATEGIES, RunManifest, compare_strategies, fit,
                    heldout_log_score)
from .config import as_list, read_config
from .data import CvSplit, ingest_csv, synth_dataset, write_csv
from .hyper import HyperGrid
from .schedules import build, validate


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _grid(path) -> HyperGrid:
    return HyperGrid.from_file(path) if path else HyperGrid.default()


def cmd_fit(args) -> int:
    data = ingest_csv(args.data)
    manifest = RunManifest(args.strategy, args.seed, 0, 0, args.budget_secs, args.budget_assigns,
                           dataset=data.fingerprint(), config={"data": str(args.data)})
    split = CvSplit.random(data.n_rows, manifest.split_rng())
    train, test = data.take(split.train), data.take(split.test)
    fitted = fit(train, manifest.strategy, manifest.chain_rng(), budget_secs=args.budget_secs,
                 budget_assigns=args.budget_assigns, grid=_grid(args.grid),
                 init_rng=manifest.hyper_init_rng())
    manifest.schedule = fitted.schedule
    state = fitted.state
    out = {
        "manifest": json.loads(manifest.to_json()),
        "train_rows": split.train.tolist(),
        "labels": state.labels.tolist(),
        "alpha": state.py.alpha,
        "d": state.py.d,
        "models": [{"type": type(m).__name__, **{k: np.asarray(v).tolist() for k, v in m.hyper().items()}}
                   for m in state.models],
        "clusters": int(state.num_clusters),
        "heldout_log_score": heldout_log_score(state, test),
        "assigns": fitted.assigns,
        "wall_secs": fitted.elapsed,
    }
    Path(args.out).write_text(json.dumps(out, indent=1))
    print(f"{manifest.strategy}: {state.num_clusters} clusters, held-out score {out['heldout_log_score']:.3f}")
    return 0


def cmd_bench(args) -> int:
    data = ingest_csv(args.data)
    budgets = args.budget_assigns if args.budget_assigns else args.budgets
    kind = "assigns" if args.budget_assigns else "secs"
    if args.budget_assigns:
        budgets = [int(b) for b in budgets]
    res = compare_strategies(data, args.strategies.split(","), budgets, args.chains, args.seed,
                             budget_kind=kind, grid=_grid(args.grid), name=Path(args.data).stem,
                             workers=args.workers)
    res.write_csv(args.out)
    res.write_json(Path(args.out).with_suffix(".json"))
    for cell in res.summary():
        print(f"{cell['strategy']:>12} budget={cell['budget']:<8} mean={cell['mean']:+.3f} var={cell['var']:.3f}")
    return 0


def cmd_toy_urns(args) -> int:
    params = urns.UrnModelParams(args.red, args.blue, args.p, args.alpha)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    target = urns.exact_posterior(params)
    budget = int(args.budget_factor * params.n)
    rows, hist_rows = [], []
    for k, strategy in enumerate(args.strategies.split(",")):
        rng = rngs.stream(args.seed, rngs.TOY, k)
        chains = urns.run_strategy(strategy, params, budget, args.chains, rng)
        value, se = urns.tvd_with_error(chains.r1, chains.b1, target, params, bins=args.bins, rng=rng)
        rows.append({"strategy": strategy, "budget": budget, "chains": args.chains, "bins": args.bins,
                     "tvd": value, "se": se})
        hist = urns.histogram(chains.r1, chains.b1, params, bins=args.bins)
        for (i, j), v in np.ndenumerate(hist):
            hist_rows.append({"strategy": strategy, "red_bin": i, "blue_bin": j, "freq": v})
        print(f"{strategy:>18} tvd={value:.4f} +- {se:.4f}")
    exact = urns.coarsen(target, args.bins)
    for (i, j), v in np.ndenumerate(exact):
        hist_rows.append({"strategy": "exact", "red_bin": i, "blue_bin": j, "freq": v})
    _write_rows(out / "tvd.csv", rows)
    _write_rows(out / "histograms.csv", hist_rows)
    _write_rows(out / "exact_posterior.csv",
                [{"r1": i, "b1": j, "prob": v} for (i, j), v in np.ndenumerate(target)])
    summary = {"red": args.red, "blue": args.blue, "p": args.p, "alpha": args.alpha, "budget": budget,
               "chains": args.chains, "bins": args.bins, "seed": args.seed,
               "tvd": {r["strategy"]: {"value": r["tvd"], "se": r["se"]} for r in rows}}
    (out / "tvd.json").write_text(json.dumps(summary, indent=2))
    return 0


def cmd_toy_bimodal(args) -> int:
    cfg = read_config(args.sweep) if args.sweep else {}
    rows = []
    for gamma in as_list(cfg.get("gamma", [0.5, 1.0, 2.0])):
        for delta in as_list(cfg.get("delta", [0.25, 0.5, 1.0])):
            for n in as_list(cfg.get("n", [20, 50, 100])):
                for eps in as_list(cfg.get("eps", [0.1, 0.05, 0.01])):
                    p = bimodal.BimodalParams(float(gamma), float(delta), float(n))
                    row = {"gamma": gamma, "delta": delta, "n": n, "eps": eps,
                           "hypothesis": bimodal.hypothesis_holds(p, eps),
                           "cold_time": bimodal.cold_time_to_eps(p, eps).value,
                           "cold_log_time": bimodal.cold_time_to_eps(p, eps).log_value}
                    try:
                        T = bimodal.anneal_bound(p, eps)
                        x = bimodal.integrate(p, bimodal.Linear(), 0.0, T)
                        row.update(anneal_bound=T, tvd_at_bound=float(bimodal.tvd_final(x, p)),
                                   log_speedup=row["cold_log_time"] - math.log(T))
                    except bimodal.HypothesisError:
                        row.update(anneal_bound="", tvd_at_bound="", log_speedup="")
                    rows.append(row)
    _write_rows(args.out, rows)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def cmd_schedule_dump(args) -> int:
    schedule = build(args.strategy, args.n, args.t, hyper=not args.no_hyper)
    check = validate(schedule)
    with open(args.out, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["step", "action", "subsample_size"])
        size = schedule.initial_size()
        for step, action in enumerate(schedule.actions(), 1):
            size += {"remove": -1, "assign": 1}.get(action.value, 0)
            w.writerow([step, action.value, size])
    if not check.ok:
        print("schedule violates invariants: " + "; ".join(check.violations), file=sys.stderr)
        return 1
    return 0


def cmd_synth(args) -> int:
    cfg = read_config(args.config) if args.config else {}
    data, labels, _ = synth_dataset(cfg, args.seed)
    write_csv(data, args.out)
    out = Path(args.out)
    with open(out.with_name(out.stem + ".labels.csv"), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["row", "cluster"])
        w.writerows(enumerate(labels.tolist()))
    print(f"wrote {data.n_rows} rows x {len(data.schema)} columns to {out}")
    return 0


def _write_rows(path, rows) -> None:
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="subanneal", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="train one chain and score it on a held-out eighth")
    p.add_argument("--data", required=True)
    p.add_argument("--strategy", choices=BENCH_STRATEGIES, default="anneal")
    budget = p.add_mutually_exclusive_group(required=True)
    budget.add_argument("--budget-secs", type=float)
    budget.add_argument("--budget-assigns", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", help="hyperparameter grid file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("bench", help="compare strategies under budgets")
    p.add_argument("--data", required=True)
    p.add_argument("--strategies", default=",".join(BENCH_STRATEGIES))
    budget = p.add_mutually_exclusive_group(required=True)
    budget.add_argument("--budgets", type=_floats, help="wall-clock seconds, comma separated")
    budget.add_argument("--budget-assigns", type=_floats, help="assignment counts, comma separated")
    p.add_argument("--chains", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--grid")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("toy-urns", help="two-urn posterior: TVD of each strategy")
    p.add_argument("--red", type=int, default=800)
    p.add_argument("--blue", type=int, default=1200)
    p.add_argument("--p", type=float, default=0.45)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--budget-factor", type=float, default=10.0)
    p.add_argument("--chains", type=int, default=20_000)
    p.add_argument("--bins", type=int, default=16)
    p.add_argument("--strategies", default=",".join(urns.STRATEGIES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_toy_urns)

    p = sub.add_parser("toy-bimodal", help="annealing bound versus cold relaxation on a grid")
    p.add_argument("--sweep", help="config with gamma, delta, n, eps lists")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_toy_bimodal)

    p = sub.add_parser("schedule-dump", help="write the action sequence of a schedule")
    p.add_argument("--strategy", default="anneal")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--no-hyper", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_schedule_dump)

    p = sub.add_parser("synth", help="sample a synthetic mixture dataset")
    p.add_argument("--config")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
