"""Collapsed Pitman-Yor mixture state with decoupled remove/assign moves."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

NEW_CLUSTER = -1


class StateCorruptionError(RuntimeError):
    """Incrementally maintained statistics drifted from a full recomputation."""


@dataclass(frozen=True)
class PitmanYor:
    alpha: float = 1.0
    d: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.d < 1.0:
            raise ValueError(f"discount must lie in [0, 1), got {self.d}")
        if not self.alpha > -self.d or not self.alpha > 0:
            raise ValueError(f"concentration must be positive, got {self.alpha}")

    def log_partition_prob(self, sizes) -> float:
        """Log probability of a partition with the given cluster sizes (EPPF)."""
        sizes = np.asarray(sizes, dtype=float)
        k = sizes.size
        n = sizes.sum()
        if k == 0:
            return 0.0
        seats = np.log(self.alpha + self.d * np.arange(k)).sum()
        return float(
            seats
            - (gammaln(self.alpha + n) - gammaln(self.alpha))
            + (gammaln(sizes - self.d) - gammaln(1.0 - self.d)).sum()
        )


def sample_log_weights(rng: np.random.Generator, scores: np.ndarray) -> int:
    """Draw an index with probability proportional to ``exp(scores)``."""
    w = np.exp(scores - scores.max())
    c = np.cumsum(w)
    return int(np.searchsorted(c, rng.random() * c[-1], side="right"))


class PartitionState:
    """Assignment of a subsample of rows to clusters, with per-cluster statistics.

    Cluster ids are recycled slot indices into the statistics tables. Unassigned
    rows hold label ``-1``. ``columns`` is one array per feature and ``models``
    the matching component models.
    """

    def __init__(self, columns, models, py: PitmanYor | None = None, capacity: int = 8,
                 debug_every: int | None = None):
        if len(columns) != len(models) or not columns:
            raise ValueError("need one model per feature column and at least one feature")
        self.columns = [np.asarray(c) for c in columns]
        self.models = list(models)
        self.py = py if py is not None else PitmanYor()
        self.n = len(self.columns[0])
        if any(len(c) != self.n for c in self.columns):
            raise ValueError("feature columns differ in length")
        for col, model in zip(self.columns, self.models):
            for x in np.unique(col):
                model.check(x)

        self.labels = np.full(self.n, -1, dtype=np.int64)
        self.counts = np.zeros(capacity, dtype=np.int64)
        self.stats = [m.empty(capacity) for m in self.models]
        self._free = list(range(capacity - 1, -1, -1))
        self.num_clusters = 0
        # rows [0, num_assigned) of _pool are assigned ids, the rest unassigned
        self._pool = np.arange(self.n, dtype=np.int64)
        self._where = np.arange(self.n, dtype=np.int64)
        self.num_assigned = 0
        self.debug_every = debug_every
        self._ops = 0

    # ---- bookkeeping ----

    def _grow(self):
        old = self.counts.size
        new = 2 * old
        self.counts = np.concatenate([self.counts, np.zeros(old, dtype=np.int64)])
        self.stats = [np.concatenate([s, m.empty(old)]) for s, m in zip(self.stats, self.models)]
        self._free = list(range(new - 1, old - 1, -1)) + self._free

    def _next_slot(self) -> int:
        if not self._free:
            self._grow()
        return self._free[-1]

    def _swap(self, i: int, pos: int):
        j = self._pool[pos]
        pi = self._where[i]
        self._pool[pos], self._pool[pi] = i, j
        self._where[i], self._where[j] = pos, pi

    def row(self, i: int) -> tuple:
        return tuple(col[i] for col in self.columns)

    @property
    def assigned_ids(self) -> np.ndarray:
        return self._pool[: self.num_assigned]

    @property
    def unassigned_ids(self) -> np.ndarray:
        return self._pool[self.num_assigned:]

    def cluster_ids(self) -> np.ndarray:
        return np.flatnonzero(self.counts > 0)

    def sizes(self) -> np.ndarray:
        return self.counts[self.counts > 0]

    # ---- scoring ----

    def _slot_scores(self, row) -> tuple[np.ndarray, int]:
        new = self._next_slot()
        scores = np.full(self.counts.size, -np.inf)
        active = self.counts > 0
        scores[active] = np.log(self.counts[active] - self.py.d)
        scores[new] = math.log(self.py.alpha + self.py.d * self.num_clusters)
        # every assigned row contributes one observation per feature
        for model, stats, x in zip(self.models, self.stats, row):
            scores += model.log_predictive(stats, x, self.counts)
        return scores, new

    def assign_scores(self, row) -> tuple[np.ndarray, np.ndarray]:
        """Unnormalized log-weights for placing ``row`` in each cluster.

        Returns ``(ids, scores)``; the final entry has id ``NEW_CLUSTER`` and
        scores the prior predictive times ``alpha + d * K``.
        """
        row = tuple(m.check(x) for m, x in zip(self.models, row))
        scores, new = self._slot_scores(row)
        ids = self.cluster_ids()
        return np.append(ids, NEW_CLUSTER), np.append(scores[ids], scores[new])

    def log_predictive_row(self, row) -> float:
        """Log posterior-predictive probability of a fresh row."""
        _, scores = self.assign_scores(row)
        total = self.py.alpha + self.num_assigned
        return float(logsumexp(scores) - math.log(total))

    # ---- moves ----

    def assign_to(self, i: int, k: int) -> None:
        if self.labels[i] >= 0:
            raise ValueError(f"row {i} is already assigned")
        if k == NEW_CLUSTER:
            k = self._next_slot()
        if self.counts[k] == 0:
            if self._free and self._free[-1] == k:
                self._free.pop()
            else:
                self._free.remove(k)
            self.num_clusters += 1
        self.counts[k] += 1
        for model, stats, col in zip(self.models, self.stats, self.columns):
            model.add(stats[k], col[i], +1)
        self.labels[i] = k
        self._swap(i, self.num_assigned)
        self.num_assigned += 1
        self._tick()

    def remove(self, i: int) -> int:
        """Unassign row ``i``; returns the cluster it left (deleted if emptied)."""
        k = self.labels[i]
        if k < 0:
            raise ValueError(f"row {i} is not assigned")
        self.counts[k] -= 1
        for model, stats, col in zip(self.models, self.stats, self.columns):
            model.add(stats[k], col[i], -1)
        if self.counts[k] == 0:
            for stats in self.stats:
                stats[k] = 0
            self._free.append(int(k))
            self.num_clusters -= 1
        self.labels[i] = -1
        self.num_assigned -= 1
        self._swap(i, self.num_assigned)
        if self.counts.size > 64 and 8 * self.num_clusters < self.counts.size:
            self._compact()
        self._tick()
        return int(k)

    def _compact(self):
        # scoring cost is proportional to table capacity, so shrink after mass deletions
        ids = self.cluster_ids()
        capacity = max(8, 1 << (2 * max(ids.size, 1) - 1).bit_length())
        remap = np.full(self.counts.size, -1, dtype=np.int64)
        remap[ids] = np.arange(ids.size)
        mask = self.labels >= 0
        self.labels[mask] = remap[self.labels[mask]]
        counts = np.zeros(capacity, dtype=np.int64)
        counts[: ids.size] = self.counts[ids]
        self.counts = counts
        stats = []
        for s, m in zip(self.stats, self.models):
            fresh = m.empty(capacity)
            fresh[: ids.size] = s[ids]
            stats.append(fresh)
        self.stats = stats
        self._free = list(range(capacity - 1, ids.size - 1, -1))

    def assign(self, i: int, rng: np.random.Generator) -> int:
        """Sample a cluster for unassigned row ``i`` from its Gibbs conditional."""
        if self.labels[i] >= 0:
            raise ValueError(f"row {i} is already assigned")
        scores, _ = self._slot_scores(self.row(i))
        k = sample_log_weights(rng, scores)
        self.assign_to(i, k)
        return k

    def random_assigned(self, rng: np.random.Generator) -> int:
        if self.num_assigned == 0:
            raise ValueError("no assigned rows to remove")
        return int(self._pool[rng.integers(self.num_assigned)])

    def random_unassigned(self, rng: np.random.Generator) -> int:
        free = self.n - self.num_assigned
        if free == 0:
            raise ValueError("no unassigned rows to add")
        return int(self._pool[self.num_assigned + rng.integers(free)])

    def gibbs_sweep(self, rng: np.random.Generator) -> None:
        """``#S`` random-scan remove/reassign steps over the current subsample."""
        for _ in range(self.num_assigned):
            r = self.random_assigned(rng)
            self.remove(r)
            self.assign(self.random_unassigned(rng), rng)

    def init_from_prior(self, rng: np.random.Generator) -> None:
        """Assign every unassigned row by a draw from the partition prior alone."""
        alpha, d = self.py.alpha, self.py.d
        # existing cluster k is proposed with probability n_k / n by copying a
        # random seated row, then accepted with probability (n_k - d) / n_k
        seated = [int(self.labels[i]) for i in self.assigned_ids]
        for i in self.unassigned_ids.copy():
            n, k = len(seated), self.num_clusters
            if rng.random() * (n + alpha) < alpha + d * k:
                self.assign_to(int(i), NEW_CLUSTER)
            else:
                while True:
                    c = seated[int(rng.integers(n))]
                    size = self.counts[c]
                    if rng.random() * size < size - d:
                        break
                self.assign_to(int(i), c)
            seated.append(int(self.labels[i]))

    # ---- global quantities ----

    def joint_log_prob(self, py: PitmanYor | None = None, models=None) -> float:
        """log P(partition) + sum over clusters of log p(data in cluster)."""
        py = self.py if py is None else py
        models = self.models if models is None else models
        ids = self.cluster_ids()
        total = py.log_partition_prob(self.counts[ids])
        for model, stats in zip(models, self.stats):
            total += float(model.log_marginal(stats[ids]).sum())
        return total

    def recompute_stats(self) -> list[np.ndarray]:
        mask = self.labels >= 0
        labels = self.labels[mask]
        out = []
        for model, col in zip(self.models, self.columns):
            s = model.empty(self.counts.size)
            if labels.size:
                model.accumulate(s, labels, col[mask])
            out.append(s)
        return out

    def check_consistency(self) -> None:
        counts = np.bincount(self.labels[self.labels >= 0], minlength=self.counts.size)
        if not np.array_equal(counts, self.counts):
            raise StateCorruptionError("cluster counts disagree with labels")
        if counts.sum() != self.num_assigned or (counts > 0).sum() != self.num_clusters:
            raise StateCorruptionError("assigned/cluster totals disagree with labels")
        for fresh, stats in zip(self.recompute_stats(), self.stats):
            if not np.allclose(fresh, stats, rtol=1e-9, atol=1e-9):
                raise StateCorruptionError("incremental statistics drifted from recomputation")

    def _tick(self):
        if self.debug_every:
            self._ops += 1
            if self._ops % self.debug_every == 0:
                self.check_consistency()

    def copy(self) -> "PartitionState":
        other = object.__new__(PartitionState)
        other.__dict__.update(self.__dict__)
        other.labels = self.labels.copy()
        other.counts = self.counts.copy()
        other.stats = [s.copy() for s in self.stats]
        other.models = list(self.models)
        other._free = list(self._free)
        other._pool = self._pool.copy()
        other._where = self._where.copy()
        return other


def assign_scores(state: PartitionState, row, py: PitmanYor | None = None):
    if py is not None and py != state.py:
        state = state.copy()
        state.py = py
    return state.assign_scores(row)
