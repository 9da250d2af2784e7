"""Conjugate component models with add/remove sufficient statistics.

Each model holds only its prior hyperparameters. Sufficient statistics live in
plain numpy arrays whose last axis is the statistic vector, so a whole table of
clusters (shape ``(K, stat_size)``) is scored in one call.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy.special import betaln, gammaln

BOOL = "bool"
CATEGORICAL = "categorical"
REAL = "real"


class KindMismatchError(ValueError):
    """A datum was scored against statistics of a different feature kind."""


class Datum(NamedTuple):
    kind: str
    value: float | int


class BetaBernoulli:
    kind = BOOL
    stat_size = 2
    stat_dtype = np.int64

    def __init__(self, a: float = 1.0, b: float = 1.0):
        if not (a > 0 and b > 0):
            raise ValueError(f"Beta pseudo-counts must be positive, got a={a}, b={b}")
        self.a = float(a)
        self.b = float(b)

    def hyper(self) -> dict:
        return {"a": self.a, "b": self.b}

    def with_hyper(self, **kw) -> "BetaBernoulli":
        h = self.hyper()
        h.update(kw)
        return BetaBernoulli(**h)

    def accumulate(self, stats: np.ndarray, labels: np.ndarray, values: np.ndarray) -> None:
        np.add.at(stats, (labels, 1 - values.astype(np.int64)), 1)

    def check(self, x) -> int:
        if x not in (0, 1, True, False):
            raise ValueError(f"boolean datum must be 0 or 1, got {x!r}")
        return int(x)

    def empty(self, n: int | None = None) -> np.ndarray:
        shape = (self.stat_size,) if n is None else (n, self.stat_size)
        return np.zeros(shape, dtype=self.stat_dtype)

    def add(self, stats: np.ndarray, x, sign: int = 1) -> None:
        stats[..., 0 if x else 1] += sign

    def log_predictive(self, stats: np.ndarray, x, total=None) -> np.ndarray:
        """``total`` optionally supplies the observation counts to skip summing ``stats``."""
        heads = stats[..., 0]
        tails = stats[..., 1]
        num = heads + self.a if x else tails + self.b
        total = heads + tails if total is None else total
        return np.log(num) - np.log(total + self.a + self.b)

    def log_marginal(self, stats: np.ndarray) -> np.ndarray:
        heads = stats[..., 0]
        tails = stats[..., 1]
        return betaln(heads + self.a, tails + self.b) - betaln(self.a, self.b)


class DirichletCategorical:
    """Categorical likelihood with a (possibly non-uniform) Dirichlet prior."""

    kind = CATEGORICAL
    stat_dtype = np.int64

    def __init__(self, alphas):
        alphas = np.asarray(alphas, dtype=float)
        if alphas.ndim != 1 or alphas.size < 2:
            raise ValueError("Dirichlet prior needs a vector of at least 2 pseudo-counts")
        if not np.all(alphas > 0):
            raise ValueError("Dirichlet pseudo-counts must be positive")
        self.alphas = alphas
        self.alpha_sum = float(alphas.sum())
        self._gammaln_alphas = float(gammaln(alphas).sum())

    @classmethod
    def scaled(cls, scale: float, base) -> "DirichletCategorical":
        base = np.asarray(base, dtype=float)
        return cls(scale * base / base.sum())

    @property
    def stat_size(self) -> int:
        return self.alphas.size

    def hyper(self) -> dict:
        return {"alphas": self.alphas.copy()}

    def with_hyper(self, alphas) -> "DirichletCategorical":
        return DirichletCategorical(alphas)

    def accumulate(self, stats: np.ndarray, labels: np.ndarray, values: np.ndarray) -> None:
        np.add.at(stats, (labels, values.astype(np.int64)), 1)

    def check(self, x) -> int:
        level = int(x)
        if level != x or not 0 <= level < self.stat_size:
            raise ValueError(f"categorical level {x!r} outside [0, {self.stat_size})")
        return level

    def empty(self, n: int | None = None) -> np.ndarray:
        shape = (self.stat_size,) if n is None else (n, self.stat_size)
        return np.zeros(shape, dtype=self.stat_dtype)

    def add(self, stats: np.ndarray, x, sign: int = 1) -> None:
        stats[..., x] += sign

    def log_predictive(self, stats: np.ndarray, x, total=None) -> np.ndarray:
        """``total`` optionally supplies the observation counts to skip summing ``stats``."""
        total = stats.sum(axis=-1) if total is None else total
        return np.log(stats[..., x] + self.alphas[x]) - np.log(total + self.alpha_sum)

    def log_marginal(self, stats: np.ndarray) -> np.ndarray:
        total = stats.sum(axis=-1)
        return (
            gammaln(self.alpha_sum)
            - gammaln(total + self.alpha_sum)
            + gammaln(stats + self.alphas).sum(axis=-1)
            - self._gammaln_alphas
        )


class NormalInvChiSq:
    """Gaussian likelihood with a normal-inverse-chi-squared prior.

    Prior: sigma^2 ~ Inv-chi^2(nu0, sigmasq0), mu | sigma^2 ~ N(mu0, sigma^2/kappa0).
    Statistics are ``[count, sum, sum of squares]``; the posterior predictive is
    a Student-t.
    """

    kind = REAL
    stat_size = 3
    stat_dtype = np.float64

    def __init__(self, mu0: float = 0.0, kappa0: float = 1.0, sigmasq0: float = 1.0, nu0: float = 1.0):
        if not (kappa0 > 0 and sigmasq0 > 0 and nu0 > 0):
            raise ValueError("kappa0, sigmasq0 and nu0 must be positive")
        if not math.isfinite(mu0):
            raise ValueError("mu0 must be finite")
        self.mu0 = float(mu0)
        self.kappa0 = float(kappa0)
        self.sigmasq0 = float(sigmasq0)
        self.nu0 = float(nu0)

    def hyper(self) -> dict:
        return {"mu0": self.mu0, "kappa0": self.kappa0, "sigmasq0": self.sigmasq0, "nu0": self.nu0}

    def with_hyper(self, **kw) -> "NormalInvChiSq":
        h = self.hyper()
        h.update(kw)
        return NormalInvChiSq(**h)

    def accumulate(self, stats: np.ndarray, labels: np.ndarray, values: np.ndarray) -> None:
        values = values.astype(float)
        np.add.at(stats[:, 0], labels, 1.0)
        np.add.at(stats[:, 1], labels, values)
        np.add.at(stats[:, 2], labels, values * values)

    def check(self, x) -> float:
        x = float(x)
        if not math.isfinite(x):
            raise ValueError(f"real datum must be finite, got {x!r}")
        return x

    def empty(self, n: int | None = None) -> np.ndarray:
        shape = (self.stat_size,) if n is None else (n, self.stat_size)
        return np.zeros(shape, dtype=self.stat_dtype)

    def add(self, stats: np.ndarray, x, sign: int = 1) -> None:
        stats[..., 0] += sign
        stats[..., 1] += sign * x
        stats[..., 2] += sign * x * x

    def posterior(self, stats: np.ndarray):
        """Return (mu_n, kappa_n, sigmasq_n, nu_n) for each statistics row."""
        n = stats[..., 0]
        total = stats[..., 1]
        sumsq = stats[..., 2]
        kappa_n = self.kappa0 + n
        nu_n = self.nu0 + n
        mu_n = (self.kappa0 * self.mu0 + total) / kappa_n
        safe_n = np.where(n > 0, n, 1.0)
        mean = np.where(n > 0, total / safe_n, self.mu0)
        scatter = np.maximum(sumsq - total * mean, 0.0)
        nu_sigmasq = (
            self.nu0 * self.sigmasq0 + scatter + self.kappa0 * n / kappa_n * (mean - self.mu0) ** 2
        )
        return mu_n, kappa_n, nu_sigmasq / nu_n, nu_n

    def log_predictive(self, stats: np.ndarray, x, total=None) -> np.ndarray:
        mu_n, kappa_n, sigmasq_n, nu_n = self.posterior(stats)
        scale_sq = sigmasq_n * (1.0 + 1.0 / kappa_n)
        z = (x - mu_n) ** 2 / (nu_n * scale_sq)
        return (
            gammaln(0.5 * (nu_n + 1.0))
            - gammaln(0.5 * nu_n)
            - 0.5 * np.log(np.pi * nu_n * scale_sq)
            - 0.5 * (nu_n + 1.0) * np.log1p(z)
        )

    def log_marginal(self, stats: np.ndarray) -> np.ndarray:
        n = stats[..., 0]
        _, kappa_n, sigmasq_n, nu_n = self.posterior(stats)
        return (
            gammaln(0.5 * nu_n)
            - gammaln(0.5 * self.nu0)
            + 0.5 * np.log(self.kappa0 / kappa_n)
            + 0.5 * self.nu0 * np.log(self.nu0 * self.sigmasq0)
            - 0.5 * nu_n * np.log(nu_n * sigmasq_n)
            - 0.5 * n * np.log(np.pi)
        )


class ComponentSuffStats:
    """Statistics of a single cluster bound to the model that interprets them."""

    def __init__(self, model, stats: np.ndarray | None = None):
        self.model = model
        self.stats = model.empty() if stats is None else np.array(stats, dtype=model.stat_dtype)

    @property
    def kind(self) -> str:
        return self.model.kind

    def _value(self, x):
        if isinstance(x, Datum):
            if x.kind != self.kind:
                raise KindMismatchError(f"{x.kind} datum scored against {self.kind} statistics")
            x = x.value
        return self.model.check(x)

    def add(self, x) -> None:
        self.model.add(self.stats, self._value(x), +1)

    def remove(self, x) -> None:
        self.model.add(self.stats, self._value(x), -1)

    def log_predictive(self, x) -> float:
        return float(self.model.log_predictive(self.stats, self._value(x)))

    def log_marginal(self) -> float:
        return float(self.model.log_marginal(self.stats))

    def copy(self) -> "ComponentSuffStats":
        return ComponentSuffStats(self.model, self.stats.copy())


def log_predictive(stats: ComponentSuffStats, x) -> float:
    """Log posterior-predictive of ``x`` given the data summarized in ``stats``."""
    return stats.log_predictive(x)
