import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subanneal.components import BetaBernoulli, DirichletCategorical
from subanneal.mixture import PartitionState, PitmanYor
from subanneal.schedules import Action, Strategy, build, from_sizes, run, validate

A, R, H = Action.ASSIGN, Action.REMOVE, Action.HYPER


def test_anneal_small_unrolling():
    sched = build("anneal", 2, 1)
    acts = list(sched.actions())
    assert [a for a in acts if a is not H] == [A, R, A, A, R, A]
    assert [s for s, a in zip(sched.sizes()[1:], acts) if a is not H] == [1, 0, 1, 2, 1, 2]


def test_prior_gibbs_small_unrolling():
    sched = build("prior-gibbs", 3, 2, hyper=False)
    acts = list(sched.actions())
    assert acts == [R, A] * 6
    sizes = sched.sizes()
    assert sizes[0] == 3 and sizes[-1] == 3
    assert set(sizes[::2]) == {3} and set(sizes[1::2]) == {2}


def test_sequential_gibbs_unrolling():
    acts = list(build("seq-gibbs", 3, 2, hyper=False).actions())
    assert acts == [A, A, A] + [R, A] * 3


def test_hyper_sweep_once_per_cycle():
    acts = list(build("prior-gibbs", 4, 3).actions())
    pairs = 0
    for a in acts:
        if a is A:
            pairs += 1
        if a is H:
            assert pairs == 4
            pairs = 0
    assert acts.count(H) == 3


def test_anneal_hyper_sweeps_are_denser_early():
    acts = list(build("anneal", 40, 4).actions())
    assigns = np.cumsum([a is A for a in acts])
    at = assigns[[i for i, a in enumerate(acts) if a is H]]
    assert len(at) > 5
    first, last = at[: len(at) // 2], at[len(at) // 2:]
    assert np.mean(np.diff(first)) < np.mean(np.diff(last))


def test_build_rejects_bad_arguments():
    with pytest.raises(ValueError):
        build("anneal", 0, 1)
    with pytest.raises(ValueError):
        build("prior-gibbs", 4, 0)
    with pytest.raises(ValueError):
        build("seq-gibbs", 4, 1.5)
    with pytest.raises(ValueError):
        build("anneal", 4, -1)
    with pytest.raises(ValueError):
        build("bogus", 4, 1)


def test_fractional_churn_spreads_pairs():
    sched = build("anneal", 10, 0.5, hyper=False)
    assert sched.num_assigns() == 10 + 5
    assert validate(sched).ok


def test_custom_schedule_validation():
    assert validate(from_sizes([0, 1, 2, 1, 2, 2, 3], 3)).ok
    bad = validate(from_sizes([0, 2, 3], 3))
    assert not bad.ok and any("jumps" in v for v in bad.violations)
    assert not validate(from_sizes([0, 1, 2], 3)).ok


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 50), st.integers(1, 20),
       st.sampled_from([Strategy.PRIOR_GIBBS, Strategy.SEQUENTIAL_GIBBS, Strategy.ANNEAL]))
def test_built_schedules_are_valid(n, t, strategy):
    sched = build(strategy, n, t)
    assert validate(sched).ok
    sizes = sched.sizes()
    assert sizes[-1] == n
    steps = np.diff(sizes)
    assert set(np.unique(steps)) <= {-1, 0, 1}
    if strategy is Strategy.PRIOR_GIBBS:
        settled = [s for s, a in zip(sizes[1:], sched.actions()) if a is not R]
        assert set(settled) == {n}
    if strategy is Strategy.ANNEAL:
        assert sched.num_assigns() == n * (t + 1)
        # nondecreasing between churn pairs
        settled = [s for s, a in zip(sizes[1:], sched.actions()) if a is A]
        assert all(b >= a for a, b in zip(settled, settled[1:]))


def _state(n, seed=0):
    rng = np.random.default_rng(seed)
    return PartitionState([rng.integers(0, 3, n)], [DirichletCategorical([1.0, 1.0, 1.0])], PitmanYor(1.0))


def test_prior_gibbs_reassigns_the_removed_row():
    state = _state(12)
    rng = np.random.default_rng(1)
    state.init_from_prior(rng)
    for _ in range(50):
        r = state.random_assigned(rng)
        state.remove(r)
        assert state.random_unassigned(rng) == r
        state.assign(r, rng)


@pytest.mark.parametrize("strategy,t", [("prior-gibbs", 3), ("seq-gibbs", 3), ("anneal", 2)])
def test_run_completes_and_is_deterministic(strategy, t):
    def go():
        state = _state(30)
        res = run(build(strategy, 30, t), state, np.random.default_rng(7),
                  hyper_step=lambda s, r: None, trace_every=10)
        return res

    a, b = go(), go()
    assert a.state.num_assigned == 30
    np.testing.assert_array_equal(a.state.labels, b.state.labels)
    assert [r.size for r in a.trace] == [r.size for r in b.trace]
    a.state.check_consistency()
    assert not a.exhausted


def test_run_budget_exhaustion_completes_state():
    state = _state(40)
    res = run(build("anneal", 40, 5), state, np.random.default_rng(0), max_assigns=25)
    assert res.exhausted
    assert state.num_assigned == 40
    assert res.completion_assigns > 0
    assert res.assigns == 25 + res.completion_assigns


def test_run_wall_clock_budget_checked_per_assignment():
    ticks = iter(range(10 ** 6))
    state = _state(20)
    res = run(build("seq-gibbs", 20, 100), state, np.random.default_rng(0), max_seconds=30,
              clock=lambda: float(next(ticks)))
    assert res.exhausted
    assert state.num_assigned == 20


def test_run_trace_records_joint_log_prob():
    state = _state(10)
    res = run(build("anneal", 10, 1), state, np.random.default_rng(3), trace_every=5)
    assert res.trace[-1].size == 10
    assert res.trace[-1].log_prob == pytest.approx(state.joint_log_prob())
    assert all(np.isfinite(r.log_prob) for r in res.trace)


def test_run_rejects_size_mismatch():
    with pytest.raises(ValueError):
        run(build("anneal", 5, 1), _state(6), np.random.default_rng(0))


def test_hyper_steps_counted():
    calls = []
    state = PartitionState([np.array([0, 1, 1, 0, 1, 1])], [BetaBernoulli(1, 1)])
    res = run(build("prior-gibbs", 6, 4), state, np.random.default_rng(0),
              hyper_step=lambda s, r: calls.append(s.num_assigned))
    assert res.hyper_steps == 4 == len(calls)
    assert set(calls) == {6}
