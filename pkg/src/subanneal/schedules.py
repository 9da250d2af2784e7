"""Remove/assign/hyper action streams for subsample-annealing strategies."""
from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from .mixture import PartitionState


class Action(enum.Enum):
    REMOVE = "remove"
    ASSIGN = "assign"
    HYPER = "hyper"


class Strategy(enum.Enum):
    PRIOR_GIBBS = "prior-gibbs"
    SEQUENTIAL_GIBBS = "seq-gibbs"
    ANNEAL = "anneal"
    CUSTOM = "custom"

    @classmethod
    def parse(cls, name) -> "Strategy":
        if isinstance(name, cls):
            return name
        aliases = {
            "priorgibbs": cls.PRIOR_GIBBS, "prior+gibbs": cls.PRIOR_GIBBS,
            "sequentialgibbs": cls.SEQUENTIAL_GIBBS, "sequential+gibbs": cls.SEQUENTIAL_GIBBS,
            "annealsubsample": cls.ANNEAL, "anneal-subsample": cls.ANNEAL,
        }
        key = str(name).lower()
        for s in cls:
            if key == s.value:
                return s
        if key in aliases:
            return aliases[key]
        raise ValueError(f"unknown strategy {name!r}")


@dataclass(frozen=True)
class AnnealSchedule:
    """An immutable, replayable action stream.

    ``churn`` is the number of (remove, assign) pairs per unit of work: the
    number of full-data passes for the Gibbs strategies and the churn pairs
    per added datapoint for annealing. A fractional churn for annealing spreads
    ``floor(n * churn)`` pairs evenly across the growth steps.
    """

    strategy: Strategy
    n: int
    churn: float
    prior_init: bool = False
    hyper: bool = True
    sizes_trace: tuple | None = field(default=None, repr=False)

    def actions(self) -> Iterator[Action]:
        s = self.strategy
        state = HyperCounter(self.hyper)
        if s is Strategy.PRIOR_GIBBS:
            for _ in range(int(self.churn) * self.n):
                yield Action.REMOVE
                yield Action.ASSIGN
                if state.pair(self.n):
                    yield Action.HYPER
        elif s is Strategy.SEQUENTIAL_GIBBS:
            for _ in range(self.n):
                yield Action.ASSIGN
            for _ in range((int(self.churn) - 1) * self.n):
                yield Action.REMOVE
                yield Action.ASSIGN
                if state.pair(self.n):
                    yield Action.HYPER
        elif s is Strategy.ANNEAL:
            done = 0
            for size in range(1, self.n + 1):
                yield Action.ASSIGN
                target = math.floor(size * self.churn + 1e-9)
                while done < target:
                    done += 1
                    yield Action.REMOVE
                    yield Action.ASSIGN
                    if state.pair(size):
                        yield Action.HYPER
        else:
            prev = self.sizes_trace[0]
            for size in self.sizes_trace[1:]:
                if size == prev + 1:
                    yield Action.ASSIGN
                elif size == prev - 1:
                    yield Action.REMOVE
                else:
                    yield Action.HYPER
                prev = size

    def initial_size(self) -> int:
        if self.strategy is Strategy.CUSTOM:
            return self.sizes_trace[0]
        return self.n if self.prior_init else 0

    def sizes(self) -> list[int]:
        """Subsample size after every action (the initial size first)."""
        size = self.initial_size()
        out = [size]
        for a in self.actions():
            if a is Action.ASSIGN:
                size += 1
            elif a is Action.REMOVE:
                size -= 1
            out.append(size)
        return out

    def num_assigns(self) -> int:
        return sum(1 for a in self.actions() if a is Action.ASSIGN)


class HyperCounter:
    """Fires once every ``#S`` churn pairs, re-reading ``#S`` after each firing."""

    def __init__(self, enabled: bool):
        self.enabled = enabled
        self.pairs = 0

    def pair(self, size: int) -> bool:
        if not self.enabled:
            return False
        self.pairs += 1
        if self.pairs >= size:
            self.pairs = 0
            return True
        return False


def build(strategy, n: int, t: float, hyper: bool = True) -> AnnealSchedule:
    strategy = Strategy.parse(strategy)
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if strategy is Strategy.CUSTOM:
        raise ValueError("custom schedules are built with from_sizes()")
    if strategy is Strategy.ANNEAL:
        if not t >= 0:
            raise ValueError(f"anneal churn must be nonnegative, got {t!r}")
    elif not (t >= 1 and float(t).is_integer()):
        raise ValueError(f"T must be a positive integer for {strategy.value}, got {t!r}")
    return AnnealSchedule(strategy, int(n), float(t), prior_init=strategy is Strategy.PRIOR_GIBBS,
                          hyper=hyper)


def from_sizes(sizes: Sequence[int], n: int) -> AnnealSchedule:
    """A custom schedule realizing an explicit subsample-size trace ``beta(t) N``.

    Repeated sizes are read as hyperparameter sweeps.
    """
    return AnnealSchedule(Strategy.CUSTOM, int(n), 0.0, sizes_trace=tuple(int(s) for s in sizes))


@dataclass
class Validation:
    ok: bool
    violations: list[str]

    def __bool__(self):
        return self.ok


def validate(schedule: AnnealSchedule) -> Validation:
    problems = []
    size = schedule.initial_size()
    if not 0 <= size <= schedule.n:
        problems.append(f"initial size {size} outside [0, {schedule.n}]")
    if schedule.strategy is Strategy.CUSTOM:
        trace = schedule.sizes_trace
        for step, (a, b) in enumerate(zip(trace, trace[1:]), 1):
            if abs(b - a) > 1:
                problems.append(f"step {step}: size jumps {a} -> {b}")
    for step, action in enumerate(schedule.actions(), 1):
        if action is Action.REMOVE:
            if size == 0:
                problems.append(f"step {step}: remove from empty subsample")
            size -= 1
        elif action is Action.ASSIGN:
            if size == schedule.n:
                problems.append(f"step {step}: assign from empty pool")
            size += 1
        if len(problems) > 20:
            break
    if size != schedule.n:
        problems.append(f"terminal size {size} != {schedule.n}")
    return Validation(not problems, problems)


@dataclass
class TraceRow:
    step: int
    size: int
    assigns: int
    elapsed: float
    log_prob: float


@dataclass
class RunResult:
    state: PartitionState
    trace: list[TraceRow]
    assigns: int
    elapsed: float
    exhausted: bool = False
    hyper_steps: int = 0
    # rows assigned sequentially after the budget ran out before full data
    completion_assigns: int = 0


def run(schedule: AnnealSchedule, state: PartitionState, rng: np.random.Generator, *,
        max_assigns: int | None = None, max_seconds: float | None = None,
        hyper_step: Callable[[PartitionState, np.random.Generator], None] | None = None,
        trace_every: int | None = None, clock=time.perf_counter) -> RunResult:
    """Execute ``schedule`` against ``state``.

    The state must start empty, or fully assigned-by-prior for ``prior_init``
    schedules (done here if needed). Budgets are checked after every assignment;
    when one runs out the remaining rows are assigned sequentially so the
    returned state always covers every row.
    """
    if state.n != schedule.n:
        raise ValueError(f"dataset has {state.n} rows but schedule expects {schedule.n}")
    start = clock()
    if schedule.prior_init and state.num_assigned == 0:
        state.init_from_prior(rng)
    trace: list[TraceRow] = []
    assigns = 0
    hypers = 0
    exhausted = False

    def record(step):
        trace.append(TraceRow(step, state.num_assigned, assigns, clock() - start, state.joint_log_prob()))

    step = 0
    for step, action in enumerate(schedule.actions(), 1):
        if action is Action.REMOVE:
            state.remove(state.random_assigned(rng))
        elif action is Action.ASSIGN:
            state.assign(state.random_unassigned(rng), rng)
            assigns += 1
            if (max_assigns is not None and assigns >= max_assigns) or (
                    max_seconds is not None and clock() - start >= max_seconds):
                exhausted = True
        elif hyper_step is not None:
            hyper_step(state, rng)
            hypers += 1
        if trace_every and step % trace_every == 0:
            record(step)
        if exhausted:
            break
    completion = 0
    while state.num_assigned < state.n:
        state.assign(state.random_unassigned(rng), rng)
        completion += 1
    assigns += completion
    if trace_every:
        record(step)
    elapsed = clock() - start
    return RunResult(state, trace, assigns, elapsed, exhausted, hypers, completion)
