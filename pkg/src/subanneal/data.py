"""Tabular datasets: CSV ingestion, synthetic mixtures, and crossvalidation splits."""
from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .components import BOOL, CATEGORICAL, REAL, BetaBernoulli, DirichletCategorical, NormalInvChiSq


class DataError(ValueError):
    pass


@dataclass
class Column:
    name: str
    kind: str
    levels: list = field(default_factory=list)

    @property
    def cardinality(self) -> int | None:
        if self.kind == CATEGORICAL:
            return max(2, len(self.levels))
        if self.kind == BOOL:
            return 2
        return None


@dataclass
class Dataset:
    schema: list
    columns: list

    def __post_init__(self):
        if not self.schema:
            raise DataError("a dataset needs at least one column")
        if len(self.schema) != len(self.columns):
            raise DataError("schema and columns disagree in length")

    @property
    def n_rows(self) -> int:
        return len(self.columns[0])

    def take(self, ids) -> "Dataset":
        ids = np.asarray(ids)
        return Dataset(self.schema, [c[ids] for c in self.columns])

    def rows(self):
        return zip(*self.columns)

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        for col, values in zip(self.schema, self.columns):
            h.update(f"{col.name}:{col.kind}:{col.cardinality}".encode())
            h.update(np.ascontiguousarray(values).tobytes())
        return h.hexdigest()[:16]

    def raw_value(self, j: int, v):
        col = self.schema[j]
        if col.kind == CATEGORICAL:
            return col.levels[int(v)]
        if col.kind == BOOL:
            return int(v)
        return repr(float(v))


def _parse_real(text: str) -> float | None:
    try:
        v = float(text)
    except ValueError:
        return None
    return v if math.isfinite(v) else None


def ingest_csv(path, schema="infer") -> Dataset:
    """Read a rectangular CSV with a header row.

    With ``schema="infer"`` a column is real when every value parses as a finite
    number and categorical otherwise, with levels in first-appearance order.
    An explicit schema is a list of :class:`Column`; categorical values outside
    its levels are rejected.
    """
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        raw = []
        for lineno, row in enumerate(reader, 2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields, found {len(row)}")
            for j, v in enumerate(row):
                if v.strip() == "":
                    raise DataError(f"{path}:{lineno}: missing value in column {header[j]!r}")
            raw.append((lineno, row))
    if not raw:
        raise DataError(f"{path}: no data rows")
    if schema == "infer":
        schema = []
        for j, name in enumerate(header):
            if all(_parse_real(row[j]) is not None for _, row in raw):
                schema.append(Column(name, REAL))
            else:
                levels = list(dict.fromkeys(row[j].strip() for _, row in raw))
                schema.append(Column(name, CATEGORICAL, levels))
    elif len(schema) != len(header):
        raise DataError(f"{path}: schema has {len(schema)} columns, file has {len(header)}")

    columns = []
    for j, col in enumerate(schema):
        if col.kind == REAL:
            out = np.empty(len(raw))
            for i, (lineno, row) in enumerate(raw):
                v = _parse_real(row[j])
                if v is None:
                    raise DataError(f"{path}:{lineno}: column {col.name!r}: cannot parse {row[j]!r} as a finite real")
                out[i] = v
        elif col.kind in (CATEGORICAL, BOOL):
            levels = col.levels if col.kind == CATEGORICAL else ["0", "1"]
            index = {lvl: k for k, lvl in enumerate(levels)}
            out = np.empty(len(raw), dtype=np.int64)
            for i, (lineno, row) in enumerate(raw):
                key = row[j].strip()
                if key not in index:
                    raise DataError(
                        f"{path}:{lineno}: column {col.name!r}: level {key!r} not among its {len(levels)} declared levels")
                out[i] = index[key]
        else:
            raise DataError(f"unknown column kind {col.kind!r}")
        columns.append(out)
    return Dataset(list(schema), columns)


def write_csv(dataset: Dataset, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow([c.name for c in dataset.schema])
        for row in dataset.rows():
            w.writerow([dataset.raw_value(j, v) for j, v in enumerate(row)])


def default_models(dataset: Dataset) -> list:
    """Component models with weakly informative, data-scaled starting priors."""
    models = []
    for col, values in zip(dataset.schema, dataset.columns):
        if col.kind == REAL:
            var = float(np.var(values)) if values.size > 1 else 1.0
            models.append(NormalInvChiSq(float(np.mean(values)), 1.0, var if var > 0 else 1.0, 1.0))
        elif col.kind == BOOL:
            models.append(BetaBernoulli(1.0, 1.0))
        else:
            k = col.cardinality
            freq = np.bincount(values, minlength=k) + 1.0
            models.append(DirichletCategorical.scaled(float(k), freq))
    return models


@dataclass
class CvSplit:
    train: np.ndarray
    test: np.ndarray
    seed: object = None

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, seed=None) -> "CvSplit":
        perm = rng.permutation(n)
        cut = math.ceil(7 * n / 8)
        return cls(np.sort(perm[:cut]), np.sort(perm[cut:]), seed)


# ---------------------------------------------------------------- synthetic data

@dataclass
class SynthModel:
    """A finite mixture drawn from a truncated Pitman-Yor stick-breaking prior."""

    schema: list
    weights: np.ndarray
    params: list  # per feature: (K, L) level probabilities or (K, 2) mean/sd

    def log_prob_rows(self, dataset: Dataset) -> np.ndarray:
        """Log density of each row under the generating mixture."""
        logp = np.log(self.weights)[None, :].repeat(dataset.n_rows, axis=0)
        for col, theta, values in zip(self.schema, self.params, dataset.columns):
            if col.kind == REAL:
                mu, sd = theta[:, 0], theta[:, 1]
                z = (values[:, None] - mu[None, :]) / sd[None, :]
                logp += -0.5 * z ** 2 - np.log(sd)[None, :] - 0.5 * math.log(2 * math.pi)
            else:
                logp += np.log(theta[:, values].T)
        return logsumexp(logp, axis=1)


def synth_dataset(config: dict, seed) -> tuple[Dataset, np.ndarray, SynthModel]:
    """Sample rows from a random Pitman-Yor mixture.

    Config keys (defaults): ``rows`` (10000), ``features`` (8), ``real_features``
    (0), ``levels`` (4), ``clusters`` (truncation, 64), ``alpha`` (3.0), ``d``
    (0.2), ``separation`` (1.0; larger separates clusters more).
    Returns the dataset, the generating labels and the generating model.
    """
    rng = np.random.default_rng(seed)
    rows = int(config.get("rows", 10_000))
    features = int(config.get("features", 8))
    n_real = int(config.get("real_features", 0))
    levels = int(config.get("levels", 4))
    trunc = int(config.get("clusters", 64))
    alpha = float(config.get("alpha", 3.0))
    d = float(config.get("d", 0.2))
    sep = float(config.get("separation", 1.0))
    if features < 1 or not 0 <= n_real <= features or levels < 2 or rows < 1:
        raise ValueError("bad synthetic configuration")

    sticks = rng.beta(1 - d, alpha + d * np.arange(1, trunc + 1))
    sticks[-1] = 1.0
    weights = sticks * np.concatenate([[1.0], np.cumprod(1 - sticks[:-1])])
    weights = weights / weights.sum()
    labels = rng.choice(trunc, size=rows, p=weights)

    schema, columns, params = [], [], []
    for j in range(features):
        if j < features - n_real:
            probs = rng.dirichlet(np.full(levels, 1.0 / sep), size=trunc)
            probs = np.clip(probs, 1e-12, None)
            probs /= probs.sum(axis=1, keepdims=True)
            u = rng.random(rows)
            values = (probs[labels].cumsum(axis=1) < u[:, None]).sum(axis=1)
            values = np.minimum(values, levels - 1)
            schema.append(Column(f"c{j}", CATEGORICAL, [f"v{k}" for k in range(levels)]))
            params.append(probs)
        else:
            mu = rng.normal(0.0, 2.0 * sep, size=trunc)
            sd = np.full(trunc, 1.0)
            values = rng.normal(mu[labels], sd[labels])
            schema.append(Column(f"x{j}", REAL))
            params.append(np.stack([mu, sd], axis=1))
        columns.append(values)
    return Dataset(schema, columns), labels, SynthModel(schema, weights, params)
