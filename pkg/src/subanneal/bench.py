"""Crossvalidated, budget-constrained comparison of inference strategies."""
from __future__ import annotations

import csv
import json
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterator

import numpy as np

from . import rng as rngs
from .data import CvSplit, Dataset, default_models
from .hyper import HyperGrid, gibbs_hyper_step, sample_hyper_prior
from .mixture import PartitionState, PitmanYor
from .schedules import Action, HyperCounter, Strategy, build, run

BENCH_STRATEGIES = ("prior-gibbs", "seq-gibbs", "anneal")
# full-data Gibbs horizon for wall-clock runs; the clock stops them first
_OPEN_ENDED = 10 ** 9
# fraction of a wall-clock budget the annealed growth is paced to fill;
# leftover time goes to full-data sweeps
_SAFETY = 0.8


def heldout_log_score(state: PartitionState, test) -> float:
    """Sum over test rows of the log posterior-predictive probability.

    ``test`` is a :class:`Dataset` or a list of feature columns. Each row is
    marginalized over every existing cluster and a fresh one.
    """
    columns = test.columns if isinstance(test, Dataset) else test
    return float(sum(state.log_predictive_row(row) for row in zip(*columns)))


def normalize_scores(scores) -> np.ndarray:
    """Shift and scale to zero mean and unit (population) variance."""
    scores = np.asarray(scores, dtype=float)
    sd = scores.std()
    if scores.size == 0 or not sd > 0:
        warnings.warn("scores have zero variance; normalizing to zeros", RuntimeWarning, stacklevel=2)
        return np.zeros_like(scores)
    return (scores - scores.mean()) / sd


@dataclass
class RunManifest:
    """Everything needed to repeat one chain of one benchmark cell."""

    strategy: str
    seed: int
    budget_index: int
    chain: int
    budget_secs: float | None = None
    budget_assigns: int | None = None
    schedule: dict = field(default_factory=dict)
    dataset: str = ""
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        self.strategy = Strategy.parse(self.strategy).value
        if self.budget_secs is None and self.budget_assigns is None:
            raise ValueError("a run needs a wall-clock or assignment budget")

    def split_rng(self) -> np.random.Generator:
        # shared by all strategies in a cell: common random splits
        return rngs.stream(self.seed, rngs.SPLIT, self.budget_index, self.chain)

    def hyper_init_rng(self) -> np.random.Generator:
        # shared by all strategies in a cell: common initial hyperparameters
        return rngs.stream(self.seed, rngs.HYPER_INIT, self.budget_index, self.chain)

    def chain_rng(self) -> np.random.Generator:
        return rngs.stream(self.seed, rngs.CHAIN, BENCH_STRATEGIES.index(self.strategy), self.budget_index, self.chain)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        return cls(**json.loads(text))


class PacedAnneal:
    """Annealing whose churn is re-sized after every growth step to fit a wall-clock budget.

    Assignment cost grows with the number of clusters, which is unknown in
    advance, so the churn per remaining datapoint is recomputed from the rate
    measured over the last ``window`` assignments so that growth ends at
    ``safety * seconds``. Not replayable.
    """

    strategy = Strategy.ANNEAL
    prior_init = False

    def __init__(self, n: int, seconds: float, clock=time.perf_counter, safety: float = 0.8,
                 hyper: bool = True, window: int = 32):
        if n < 1 or not seconds > 0 or not 0 < safety <= 1:
            raise ValueError("need n >= 1, seconds > 0 and safety in (0, 1]")
        self.n, self.seconds, self.clock = int(n), float(seconds), clock
        self.safety, self.hyper, self.window = safety, hyper, window
        self.churn_trace: list[float] = []

    def initial_size(self) -> int:
        return 0

    def actions(self) -> Iterator[Action]:
        start = mark = self.clock()
        counter = HyperCounter(self.hyper)
        since, owed, churn = 0, 0.0, 0.0
        self.churn_trace = []
        for size in range(1, self.n + 1):
            yield Action.ASSIGN
            since += 1
            left = self.n - size
            if since >= self.window:
                now = self.clock()
                if now > mark:
                    rate = since / (now - mark)
                    remaining = self.safety * self.seconds - (now - start)
                    # churn pairs go to this step and the ``left`` growth steps after it
                    churn = max(0.0, (rate * remaining - left) / (left + 1))
                since, mark = 0, now
            self.churn_trace.append(churn)
            owed += churn
            while owed >= 1.0:
                owed -= 1.0
                since += 1
                yield Action.REMOVE
                yield Action.ASSIGN
                if counter.pair(size):
                    yield Action.HYPER


@dataclass
class FitResult:
    state: PartitionState
    assigns: int
    elapsed: float
    schedule: dict


def resolve_schedule(strategy, n: int, budget_secs=None, budget_assigns=None) -> dict:
    """Schedule parameters for a budget.

    Assignment budgets map exactly: Gibbs runs ``ceil(K / n)`` sweeps cut at
    ``K`` assignments, and annealing uses churn ``(K - n) / n``. Wall-clock
    annealing is paced online (see :class:`PacedAnneal`).
    """
    strategy = Strategy.parse(strategy)
    if strategy is Strategy.ANNEAL:
        if budget_assigns is None:
            if budget_secs is None:
                raise ValueError("annealing needs a wall-clock or assignment budget")
            return {"paced": _SAFETY}
        return {"churn": max(0.0, (budget_assigns - n) / n)}
    if budget_assigns is not None:
        return {"t": max(1, math.ceil(budget_assigns / n))}
    return {"t": _OPEN_ENDED}


def fit(train: Dataset, strategy, rng: np.random.Generator, *, budget_secs=None, budget_assigns=None,
        schedule: dict | None = None, grid: HyperGrid | None = None, init_rng: np.random.Generator | None = None,
        clock=time.perf_counter) -> FitResult:
    """Train a mixture on ``train`` under the given strategy and budget.

    Hyperparameters start from a draw of their grid prior, taken from
    ``init_rng`` when given. A wall-clock anneal that finishes early keeps
    sweeping the full data until time runs out.
    """
    strategy = Strategy.parse(strategy)
    grid = HyperGrid.default() if grid is None else grid
    start = clock()
    state = PartitionState(train.columns, default_models(train), PitmanYor())
    sample_hyper_prior(state, grid, rng if init_rng is None else init_rng)
    schedule = schedule or resolve_schedule(strategy, train.n_rows, budget_secs, budget_assigns)
    if "paced" in schedule:
        plan = PacedAnneal(train.n_rows, budget_secs, clock, schedule["paced"])
    else:
        plan = build(strategy, train.n_rows, schedule.get("churn", schedule.get("t")))

    def hyper_step(s, r):
        gibbs_hyper_step(s, grid, r)

    result = run(plan, state, rng, max_assigns=budget_assigns, max_seconds=budget_secs,
                 hyper_step=hyper_step, clock=clock)
    assigns = result.assigns
    if budget_secs is not None and budget_assigns is None and strategy is Strategy.ANNEAL:
        left = budget_secs - (clock() - start)
        if left > 0:
            extra = run(build(Strategy.PRIOR_GIBBS, train.n_rows, _OPEN_ENDED), state, rng,
                        max_seconds=left, hyper_step=hyper_step, clock=clock)
            assigns += extra.assigns
    return FitResult(state, assigns, clock() - start, schedule)


@dataclass
class ChainResult:
    manifest: RunManifest
    raw_score: float
    wall_secs: float
    assigns: int


def run_manifest(dataset: Dataset, manifest: RunManifest, grid: HyperGrid | None = None) -> ChainResult:
    split = CvSplit.random(dataset.n_rows, manifest.split_rng())
    train, test = dataset.take(split.train), dataset.take(split.test)
    fitted = fit(train, manifest.strategy, manifest.chain_rng(), budget_secs=manifest.budget_secs,
                 budget_assigns=manifest.budget_assigns, schedule=manifest.schedule, grid=grid,
                 init_rng=manifest.hyper_init_rng())
    return ChainResult(manifest, heldout_log_score(fitted.state, test), fitted.elapsed, fitted.assigns)


@dataclass
class BenchResult:
    dataset: str
    rows: list

    def cells(self) -> dict:
        out = {}
        for r in self.rows:
            out.setdefault((r["strategy"], r["budget"]), []).append(r)
        return out

    def summary(self) -> list:
        out = []
        for (strategy, budget), rows in sorted(self.cells().items(), key=lambda kv: (kv[0][1], kv[0][0])):
            norm = np.array([r["norm_score"] for r in rows])
            raw = np.array([r["raw_score"] for r in rows])
            out.append({"dataset": self.dataset, "strategy": strategy, "budget": budget, "chains": len(rows),
                        "mean": float(norm.mean()), "var": float(norm.var(ddof=1)) if len(rows) > 1 else 0.0,
                        "min": float(norm.min()), "max": float(norm.max()), "raw_mean": float(raw.mean())})
        return out

    def write_csv(self, path) -> None:
        cols = ["dataset", "strategy", "budget", "chain", "raw_score", "norm_score", "wall_secs", "assigns"]
        with open(path, "w", newline="") as f:
            w = csv.DictWriter(f, fieldnames=cols, extrasaction="ignore")
            w.writeheader()
            w.writerows(self.rows)

    def write_json(self, path) -> None:
        with open(path, "w") as f:
            json.dump({"dataset": self.dataset, "cells": self.summary()}, f, indent=2)


def _run_one(args):
    dataset, manifest, grid = args
    return run_manifest(dataset, manifest, grid)


def compare_strategies(dataset: Dataset, strategies=BENCH_STRATEGIES, budgets=(1.0,), chains: int = 16,
                       seed: int = 0, *, budget_kind: str = "secs", grid: HyperGrid | None = None,
                       name: str = "dataset", workers: int = 1) -> BenchResult:
    """Run ``chains`` independent crossvalidated chains per (strategy, budget) cell.

    Raw held-out scores are normalized jointly across every run on the dataset.
    """
    if budget_kind not in ("secs", "assigns"):
        raise ValueError("budget_kind must be 'secs' or 'assigns'")
    strategies = [Strategy.parse(s).value for s in strategies]
    n_train = math.ceil(7 * dataset.n_rows / 8)
    fingerprint = dataset.fingerprint()
    manifests = []
    for b, budget in enumerate(budgets):
        secs = float(budget) if budget_kind == "secs" else None
        assigns = int(budget) if budget_kind == "assigns" else None
        for s in strategies:
            schedule = resolve_schedule(s, n_train, secs, assigns)
            for c in range(chains):
                manifests.append(RunManifest(s, seed, b, c, secs, assigns, schedule, fingerprint,
                                             {"budget": budget}))
    jobs = [(dataset, m, grid) for m in manifests]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    norm = normalize_scores([r.raw_score for r in results])
    rows = []
    for r, z in zip(results, norm):
        m = r.manifest
        rows.append({"dataset": name, "strategy": m.strategy, "budget": budgets[m.budget_index],
                     "chain": m.chain, "raw_score": r.raw_score, "norm_score": float(z),
                     "wall_secs": r.wall_secs, "assigns": r.assigns, "manifest": m.to_json()})
    return BenchResult(name, rows)
