"""Grid-Gibbs updates of partition and component hyperparameters."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .components import BetaBernoulli, DirichletCategorical, NormalInvChiSq
from .config import as_list, read_config
from .mixture import PartitionState, PitmanYor, sample_log_weights

POSITIVE_KEYS = ("alpha", "beta", "dirichlet_scale", "nix_kappa", "nix_sigmasq", "nix_nu")


class DegenerateGridError(ValueError):
    """Every grid candidate has zero posterior probability."""


@dataclass
class HyperGrid:
    """Candidate values and log-prior weights per hyperparameter.

    ``nix_sigmasq`` candidates are multiples of each real feature's empirical
    variance; every other value is used as is.
    """

    values: dict = field(default_factory=dict)
    log_prior: dict = field(default_factory=dict)

    def __post_init__(self):
        for key, vals in list(self.values.items()):
            vals = np.asarray(vals, dtype=float).ravel()
            if vals.size == 0:
                raise ValueError(f"grid for {key!r} is empty")
            if key == "d" and not np.all((vals >= 0) & (vals < 1)):
                raise ValueError("discount candidates must lie in [0, 1)")
            if key in POSITIVE_KEYS and not np.all(vals > 0):
                raise ValueError(f"{key} candidates must be positive")
            self.values[key] = vals
            lp = self.log_prior.get(key)
            lp = np.zeros(vals.size) if lp is None else np.asarray(lp, dtype=float)
            if lp.shape != vals.shape:
                raise ValueError(f"log-prior for {key!r} has the wrong length")
            self.log_prior[key] = lp

    def candidates(self, key):
        return self.values[key], self.log_prior[key]

    def __contains__(self, key):
        return key in self.values

    @classmethod
    def default(cls) -> "HyperGrid":
        wide = np.geomspace(1e-2, 1e2, 31)
        return cls({
            "alpha": wide, "d": np.linspace(0.0, 0.95, 20), "beta": wide,
            "dirichlet_scale": wide, "nix_kappa": wide, "nix_sigmasq": wide, "nix_nu": wide,
        })

    @classmethod
    def from_file(cls, path, base: "HyperGrid | None" = None) -> "HyperGrid":
        cfg = read_config(path)
        grid = cls.default() if base is None else base
        values = dict(grid.values)
        priors = {}
        for key, value in cfg.items():
            if key.endswith(".logprior"):
                priors[key[: -len(".logprior")]] = as_list(value)
            else:
                values[key] = as_list(value)
        for key in values:
            if key not in priors and key in grid.log_prior and len(grid.log_prior[key]) == len(values[key]):
                priors[key] = grid.log_prior[key]
        return cls(values, priors)


def _choose(rng, scores, key):
    if not np.any(np.isfinite(scores)):
        raise DegenerateGridError(f"every candidate for {key!r} has -inf log-probability")
    return sample_log_weights(rng, scores)


def _feature_candidates(model, column, grid: HyperGrid):
    """Yield (key, values, log_prior, factory) for each tunable parameter of ``model``."""
    if isinstance(model, BetaBernoulli) and "beta" in grid:
        vals, lp = grid.candidates("beta")
        yield "beta", vals, lp, lambda m, v: BetaBernoulli(v, v)
    elif isinstance(model, DirichletCategorical) and "dirichlet_scale" in grid:
        vals, lp = grid.candidates("dirichlet_scale")
        yield "dirichlet_scale", vals, lp, lambda m, v: DirichletCategorical(v * m.alphas / m.alpha_sum)
    elif isinstance(model, NormalInvChiSq):
        if "nix_kappa" in grid:
            vals, lp = grid.candidates("nix_kappa")
            yield "nix_kappa", vals, lp, lambda m, v: m.with_hyper(kappa0=v)
        if "nix_sigmasq" in grid:
            vals, lp = grid.candidates("nix_sigmasq")
            scale = float(np.var(column)) if len(column) > 1 and np.var(column) > 0 else 1.0
            yield "nix_sigmasq", vals * scale, lp, lambda m, v: m.with_hyper(sigmasq0=v)
        if "nix_nu" in grid:
            vals, lp = grid.candidates("nix_nu")
            yield "nix_nu", vals, lp, lambda m, v: m.with_hyper(nu0=v)


def gibbs_hyper_step(state: PartitionState, grid: HyperGrid, rng: np.random.Generator) -> dict:
    """Resample each hyperparameter in turn from its grid conditional.

    Only the hyperparameters are updated; assignments and statistics are left
    untouched. Returns the chosen values keyed by name (features as ``f{j}.name``).
    """
    chosen = {}
    sizes = state.sizes()
    py = state.py
    if "alpha" in grid:
        vals, lp = grid.candidates("alpha")
        scores = lp + np.array([PitmanYor(a, py.d).log_partition_prob(sizes) for a in vals])
        py = PitmanYor(float(vals[_choose(rng, scores, "alpha")]), py.d)
        chosen["alpha"] = py.alpha
    if "d" in grid:
        vals, lp = grid.candidates("d")
        scores = lp + np.array([PitmanYor(py.alpha, d).log_partition_prob(sizes) for d in vals])
        py = PitmanYor(py.alpha, float(vals[_choose(rng, scores, "d")]))
        chosen["d"] = py.d
    state.py = py

    ids = state.cluster_ids()
    for j, (model, stats, column) in enumerate(zip(state.models, state.stats, state.columns)):
        active = stats[ids]
        for key, vals, lp, make in _feature_candidates(model, column, grid):
            options = [make(model, v) for v in vals]
            scores = lp + np.array([m.log_marginal(active).sum() for m in options])
            pick = _choose(rng, scores, f"f{j}.{key}")
            model = options[pick]
            chosen[f"f{j}.{key}"] = float(vals[pick])
        state.models[j] = model
    return chosen


def sample_hyper_prior(state: PartitionState, grid: HyperGrid, rng: np.random.Generator) -> dict:
    """Set every gridded hyperparameter to a draw from its grid prior alone.

    This is the blind starting point of a chain, before any data are seen.
    """
    chosen = {}
    alpha, d = state.py.alpha, state.py.d
    if "alpha" in grid:
        vals, lp = grid.candidates("alpha")
        alpha = chosen["alpha"] = float(vals[_choose(rng, lp, "alpha")])
    if "d" in grid:
        vals, lp = grid.candidates("d")
        d = chosen["d"] = float(vals[_choose(rng, lp, "d")])
    state.py = PitmanYor(alpha, d)
    for j, (model, column) in enumerate(zip(state.models, state.columns)):
        for key, vals, lp, make in _feature_candidates(model, column, grid):
            pick = _choose(rng, lp, f"f{j}.{key}")
            model = make(model, vals[pick])
            chosen[f"f{j}.{key}"] = float(vals[pick])
        state.models[j] = model
    return chosen
