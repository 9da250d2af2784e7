import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from subanneal.components import BetaBernoulli, DirichletCategorical, NormalInvChiSq
from subanneal.hyper import DegenerateGridError, HyperGrid, gibbs_hyper_step, sample_hyper_prior
from subanneal.mixture import PartitionState, PitmanYor
from oracles import alpha_posterior


def bool_state(data, py=PitmanYor(1.0), rng=None):
    state = PartitionState([np.asarray(data)], [BetaBernoulli(1, 1)], py)
    rng = rng or np.random.default_rng(0)
    for i in range(len(data)):
        state.assign(i, rng)
    return state


def batch_se(x, batches=50):
    """Standard error of a correlated series' mean by batch means."""
    x = np.asarray(x, dtype=float)
    m = x[: x.size // batches * batches].reshape(batches, -1).mean(axis=1)
    return m.std(ddof=1) / math.sqrt(batches)


def test_single_cell_grid_is_fixed():
    state = bool_state([1, 0, 1])
    rng = np.random.default_rng(1)
    for _ in range(20):
        assert gibbs_hyper_step(state, HyperGrid({"alpha": [0.7]}), rng) == {"alpha": 0.7}


def test_two_equal_cells_split_evenly():
    # an empty partition carries no information about alpha
    state = PartitionState([np.array([1, 0])], [BetaBernoulli(1, 1)])
    grid = HyperGrid({"alpha": [0.5, 2.0]})
    rng = np.random.default_rng(2)
    draws = np.array([gibbs_hyper_step(state, grid, rng)["alpha"] == 0.5 for _ in range(100_000)])
    se = math.sqrt(0.25 / draws.size)
    assert abs(draws.mean() - 0.5) < 4 * se


def test_conditional_given_partition_is_exact():
    state = bool_state([1, 1, 0, 1, 0, 0], PitmanYor(1.0, 0.0))
    vals = np.array([0.1, 1.0, 10.0])
    grid = HyperGrid({"alpha": vals})
    sizes = state.sizes()
    logp = np.array([PitmanYor(a).log_partition_prob(sizes) for a in vals])
    p = np.exp(logp - logp.max())
    p /= p.sum()
    rng = np.random.default_rng(3)
    draws = np.array([gibbs_hyper_step(state, grid, rng)["alpha"] for _ in range(40_000)])
    freq = np.array([(draws == v).mean() for v in vals])
    assert np.all(np.abs(freq - p) < 4 * np.sqrt(p * (1 - p) / draws.size) + 1e-12)


def test_joint_chain_alpha_matches_enumeration():
    data = [1, 0, 1]
    vals = [0.1, 1.0, 10.0]
    grid = HyperGrid({"alpha": vals})
    rng = np.random.default_rng(4)
    state = bool_state(data, PitmanYor(1.0), rng)
    draws = []
    for _ in range(100_000):
        state.gibbs_sweep(rng)
        draws.append(gibbs_hyper_step(state, grid, rng)["alpha"])
    draws = np.array(draws)
    post = alpha_posterior(data, vals)
    for v, p in zip(vals, post):
        ind = draws == v
        assert abs(ind.mean() - p) < 4 * batch_se(ind)


def test_hyper_step_never_touches_partition():
    rng = np.random.default_rng(5)
    n = 50
    cols = [rng.integers(0, 3, n), rng.normal(size=n)]
    state = PartitionState(cols, [DirichletCategorical([1, 2, 3]), NormalInvChiSq(0, 1, 1, 1)])
    for i in range(n):
        state.assign(i, rng)
    labels, counts = state.labels.copy(), state.counts.copy()
    stats = [s.copy() for s in state.stats]
    chosen = gibbs_hyper_step(state, HyperGrid.default(), rng)
    assert_array_equal(state.labels, labels)
    assert_array_equal(state.counts, counts)
    for a, b in zip(stats, state.stats):
        assert_array_equal(a, b)
    assert {"alpha", "d", "f0.dirichlet_scale", "f1.nix_kappa", "f1.nix_sigmasq", "f1.nix_nu"} <= set(chosen)
    assert state.py == PitmanYor(chosen["alpha"], chosen["d"])


def test_dirichlet_scale_keeps_base_measure():
    rng = np.random.default_rng(6)
    state = PartitionState([rng.integers(0, 3, 30)], [DirichletCategorical([1.0, 2.0, 5.0])])
    for i in range(30):
        state.assign(i, rng)
    chosen = gibbs_hyper_step(state, HyperGrid({"dirichlet_scale": [3.0, 40.0]}), rng)
    m = state.models[0]
    assert m.alpha_sum == pytest.approx(chosen["f0.dirichlet_scale"])
    assert_allclose(m.alphas / m.alpha_sum, [1 / 8, 2 / 8, 5 / 8])


def test_all_minus_infinity_is_degenerate():
    state = bool_state([1, 0])
    grid = HyperGrid({"alpha": [1.0, 2.0]}, {"alpha": [-np.inf, -np.inf]})
    with pytest.raises(DegenerateGridError):
        gibbs_hyper_step(state, grid, np.random.default_rng(0))


def test_grid_validation():
    with pytest.raises(ValueError):
        HyperGrid({"d": [0.0, 1.0]})
    with pytest.raises(ValueError):
        HyperGrid({"alpha": [-1.0, 1.0]})
    with pytest.raises(ValueError):
        HyperGrid({"alpha": []})
    with pytest.raises(ValueError):
        HyperGrid({"alpha": [1.0, 2.0]}, {"alpha": [0.0]})


def test_default_grid_shape():
    g = HyperGrid.default()
    vals, lp = g.candidates("alpha")
    assert vals.size == 31 and vals[0] == pytest.approx(1e-2) and vals[-1] == pytest.approx(1e2)
    assert_allclose(lp, 0.0)
    d, _ = g.candidates("d")
    assert d.size == 20 and d[-1] == pytest.approx(0.95)


def test_grid_from_file(tmp_path):
    path = tmp_path / "grid.cfg"
    path.write_text("# grid\nalpha = geom 0.1 10 3\nd = 0, 0.5\nd.logprior = 0, -1\n")
    g = HyperGrid.from_file(path)
    assert_allclose(g.values["alpha"], [0.1, 1.0, 10.0])
    assert_allclose(g.log_prior["d"], [0.0, -1.0])
    assert g.values["beta"].size == 31


def test_prior_draw_uses_grid_values():
    rng = np.random.default_rng(7)
    state = PartitionState([np.array([1, 0, 1]), np.array([0.1, 0.2, 0.3])],
                           [BetaBernoulli(1, 1), NormalInvChiSq(0, 1, 1, 1)])
    grid = HyperGrid.default()
    chosen = sample_hyper_prior(state, grid, rng)
    assert chosen["alpha"] in grid.values["alpha"]
    assert state.models[0].a == chosen["f0.beta"]
    assert state.models[1].nu0 == chosen["f1.nix_nu"]
