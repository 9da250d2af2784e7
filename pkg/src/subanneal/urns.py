"""Two-urn balls-in-urns clustering model.

Balls are generated from the left urn with known probability ``p`` and from the
right urn otherwise; each urn has an unknown red probability with a symmetric
``Beta(alpha_beta, alpha_beta)`` prior. Integrating those out and projecting
labeled assignments onto counts leaves the latent state ``(r1, b1)``: the red
and blue counts in the left urn.

Chains are simulated in bulk: :class:`UrnChains` holds one count vector per
independent chain and every move acts on all chains at once.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import betaln, gammaln, logsumexp

STRATEGIES = (
    "prior+gibbs", "sequential", "sequential+gibbs",
    "anneal-subsample", "anneal-energy", "anneal-stepsize",
)


@dataclass(frozen=True)
class UrnModelParams:
    red: int
    blue: int
    p: float = 0.45
    alpha_beta: float = 0.5

    def __post_init__(self):
        if self.red < 0 or self.blue < 0 or self.red + self.blue < 1:
            raise ValueError("need nonnegative red/blue counts with at least one ball")
        if not 0 < self.p < 1:
            raise ValueError(f"p must lie in (0, 1), got {self.p}")
        if not self.alpha_beta > 0:
            raise ValueError("alpha_beta must be positive")

    @property
    def n(self) -> int:
        return self.red + self.blue

    @property
    def shape(self) -> tuple[int, int]:
        return self.red + 1, self.blue + 1


@dataclass(frozen=True)
class UrnCounts:
    r1: int
    b1: int

    def validate(self, params: UrnModelParams) -> None:
        if not (0 <= self.r1 <= params.red and 0 <= self.b1 <= params.blue):
            raise ValueError(f"{self} outside the grid for {params}")


def urn_joint_log_prob(r1, b1, params: UrnModelParams):
    """Log probability of ``r1`` red and ``b1`` blue balls in the left urn.

    Vectorized over array-valued ``r1``/``b1``. Includes the binomial
    multiplicities of which balls of each color sit on the left.
    """
    a = params.alpha_beta
    r1 = np.asarray(r1, dtype=float)
    b1 = np.asarray(b1, dtype=float)
    r2 = params.red - r1
    b2 = params.blue - b1
    n1 = r1 + b1
    n2 = r2 + b2
    multiplicity = (
        gammaln(params.red + 1.0) - gammaln(r1 + 1.0) - gammaln(r2 + 1.0)
        + gammaln(params.blue + 1.0) - gammaln(b1 + 1.0) - gammaln(b2 + 1.0)
    )
    placement = n1 * math.log(params.p) + n2 * math.log1p(-params.p)
    colors = betaln(r1 + a, b1 + a) + betaln(r2 + a, b2 + a) - 2.0 * betaln(a, a)
    return multiplicity + placement + colors


def exact_posterior(params: UrnModelParams) -> np.ndarray:
    """``(R+1, B+1)`` table of posterior probabilities over ``(r1, b1)``."""
    r1, b1 = np.meshgrid(np.arange(params.red + 1), np.arange(params.blue + 1), indexing="ij")
    logp = urn_joint_log_prob(r1, b1, params)
    return np.exp(logp - logsumexp(logp))


def prior_table(params: UrnModelParams) -> np.ndarray:
    """Distribution of ``(r1, b1)`` when every ball picks its urn by ``p`` alone."""
    from scipy.stats import binom

    pr = binom.pmf(np.arange(params.red + 1), params.red, params.p)
    pb = binom.pmf(np.arange(params.blue + 1), params.blue, params.p)
    return np.outer(pr, pb)


# ---------------------------------------------------------------- kernels

def left_probability(same1, n1, same2, n2, params: UrnModelParams, beta=1.0):
    """Probability that an added ball joins the left urn.

    ``same1``/``same2`` count balls of the added color already in each urn and
    ``n1``/``n2`` the urn totals. ``beta`` tempers the likelihood factor only.
    """
    a = params.alpha_beta
    like1 = (same1 + a) / (n1 + 2 * a)
    like2 = (same2 + a) / (n2 + 2 * a)
    if beta != 1.0:
        like1 = like1 ** beta
        like2 = like2 ** beta
    w1 = params.p * like1
    w2 = (1 - params.p) * like2
    return w1 / (w1 + w2)


def gibbs_transition_probs(counts: UrnCounts, params: UrnModelParams, beta=1.0) -> dict:
    """Exact one-step distribution of the full-data Gibbs move from ``counts``."""
    R, B = params.red, params.blue
    r1, b1 = counts.r1, counts.b1
    r2, b2 = R - r1, B - b1
    n = params.n
    out: dict = {}

    def put(state, prob):
        if prob > 0:
            out[state] = out.get(state, 0.0) + prob

    # (color is red, source is left, count in source)
    for red, left, count in ((True, True, r1), (False, True, b1), (True, False, r2), (False, False, b2)):
        if count == 0:
            continue
        p_rem = count / n
        rr1, bb1, rr2, bb2 = r1, b1, r2, b2
        if red and left:
            rr1 -= 1
        elif red:
            rr2 -= 1
        elif left:
            bb1 -= 1
        else:
            bb2 -= 1
        same1, same2 = (rr1, rr2) if red else (bb1, bb2)
        pl = left_probability(same1, rr1 + bb1, same2, rr2 + bb2, params, beta)
        if red:
            put(UrnCounts(rr1 + 1, bb1), p_rem * pl)
            put(UrnCounts(rr1, bb1), p_rem * (1 - pl))
        else:
            put(UrnCounts(rr1, bb1 + 1), p_rem * pl)
            put(UrnCounts(rr1, bb1), p_rem * (1 - pl))
    return out


def _index(counts: UrnCounts, params: UrnModelParams) -> int:
    return counts.r1 * (params.blue + 1) + counts.b1


def _all_counts(params: UrnModelParams):
    for r1 in range(params.red + 1):
        for b1 in range(params.blue + 1):
            yield UrnCounts(r1, b1)


def gibbs_transition_matrix(params: UrnModelParams, beta=1.0) -> np.ndarray:
    size = (params.red + 1) * (params.blue + 1)
    P = np.zeros((size, size))
    for c in _all_counts(params):
        for nxt, prob in gibbs_transition_probs(c, params, beta).items():
            P[_index(c, params), _index(nxt, params)] += prob
    return P


def _block_move(r1, b1, params, red, from_left, block):
    """Apply ``min(block, available)`` same-colored moves; return new counts and moved count."""
    if red:
        avail = r1 if from_left else params.red - r1
    else:
        avail = b1 if from_left else params.blue - b1
    k = min(block, avail)
    delta = -k if from_left else k
    if red:
        return r1 + delta, b1, k
    return r1, b1 + delta, k


def stepsize_transition_probs(counts: UrnCounts, params: UrnModelParams, block: int) -> dict:
    """Exact one-step distribution of the block Metropolis-Hastings move."""
    out: dict = {}
    stay = 0.0
    cur = urn_joint_log_prob(counts.r1, counts.b1, params)
    for red in (True, False):
        for from_left in (True, False):
            r1, b1, k = _block_move(counts.r1, counts.b1, params, red, from_left, block)
            back_r1, back_b1, _ = _block_move(r1, b1, params, red, not from_left, block)
            if k == 0 or (back_r1, back_b1) != (counts.r1, counts.b1):
                stay += 0.25
                continue
            acc = min(1.0, math.exp(urn_joint_log_prob(r1, b1, params) - cur))
            nxt = UrnCounts(r1, b1)
            out[nxt] = out.get(nxt, 0.0) + 0.25 * acc
            stay += 0.25 * (1 - acc)
    out[counts] = out.get(counts, 0.0) + stay
    return out


def stepsize_transition_matrix(params: UrnModelParams, block: int) -> np.ndarray:
    size = (params.red + 1) * (params.blue + 1)
    P = np.zeros((size, size))
    for c in _all_counts(params):
        for nxt, prob in stepsize_transition_probs(c, params, block).items():
            P[_index(c, params), _index(nxt, params)] += prob
    return P


def _sample_dict(rng, probs: dict):
    states = list(probs)
    w = np.array([probs[s] for s in states])
    return states[int(np.searchsorted(np.cumsum(w), rng.random() * w.sum(), side="right"))]


def urn_gibbs_step(counts: UrnCounts, params: UrnModelParams, beta_energy: float,
                   rng: np.random.Generator) -> UrnCounts:
    """One full-data Gibbs move of a single chain with likelihood tempered by ``beta_energy``."""
    if not 0 < beta_energy <= 1:
        raise ValueError("beta_energy must lie in (0, 1]")
    counts.validate(params)
    return _sample_dict(rng, gibbs_transition_probs(counts, params, beta_energy))


def anneal_stepsize_step(counts: UrnCounts, params: UrnModelParams, block: int,
                         rng: np.random.Generator) -> UrnCounts:
    """One block move of ``min(block, available)`` same-colored balls, MH-corrected."""
    if block < 1:
        raise ValueError("block must be at least 1")
    counts.validate(params)
    return _sample_dict(rng, stepsize_transition_probs(counts, params, int(block)))


class UrnChains:
    """Many independent chains over a possibly partial assignment of balls.

    ``r1, b1, r2, b2`` count assigned balls per urn; the remaining
    ``red - r1 - r2`` red and ``blue - b1 - b2`` blue balls are unassigned.
    """

    def __init__(self, params: UrnModelParams, r1, b1, r2, b2):
        self.params = params
        self.r1 = np.asarray(r1, dtype=np.int64).copy()
        self.b1 = np.asarray(b1, dtype=np.int64).copy()
        self.r2 = np.asarray(r2, dtype=np.int64).copy()
        self.b2 = np.asarray(b2, dtype=np.int64).copy()
        self.assigns = 0

    @classmethod
    def empty(cls, params, chains: int) -> "UrnChains":
        z = np.zeros(chains, dtype=np.int64)
        return cls(params, z, z, z, z)

    @classmethod
    def from_prior(cls, params, chains: int, rng) -> "UrnChains":
        r1 = rng.binomial(params.red, params.p, size=chains)
        b1 = rng.binomial(params.blue, params.p, size=chains)
        return cls(params, r1, b1, params.red - r1, params.blue - b1)

    @classmethod
    def full(cls, params, r1, b1) -> "UrnChains":
        r1 = np.asarray(r1)
        b1 = np.asarray(b1)
        return cls(params, r1, b1, params.red - r1, params.blue - b1)

    @property
    def chains(self) -> int:
        return self.r1.size

    def assigned(self) -> np.ndarray:
        return self.r1 + self.b1 + self.r2 + self.b2

    def remove_random(self, rng) -> np.ndarray:
        """Remove one uniformly random assigned ball per chain; returns its color (True = red)."""
        n = self.assigned()
        if np.any(n == 0):
            raise ValueError("cannot remove from an empty subsample")
        u = (rng.random(self.chains) * n).astype(np.int64)
        c1 = self.r1
        c2 = c1 + self.b1
        c3 = c2 + self.r2
        red_left = u < c1
        blue_left = (u >= c1) & (u < c2)
        red_right = (u >= c2) & (u < c3)
        blue_right = u >= c3
        self.r1 -= red_left
        self.b1 -= blue_left
        self.r2 -= red_right
        self.b2 -= blue_right
        return red_left | red_right

    def add(self, rng, red: np.ndarray, beta=1.0) -> None:
        """Add one ball of the given color per chain by its Gibbs conditional."""
        same1 = np.where(red, self.r1, self.b1)
        same2 = np.where(red, self.r2, self.b2)
        pl = left_probability(same1, self.r1 + self.b1, same2, self.r2 + self.b2, self.params, beta)
        left = rng.random(self.chains) < pl
        self.r1 += red & left
        self.b1 += ~red & left
        self.r2 += red & ~left
        self.b2 += ~red & ~left
        self.assigns += 1

    def assign_random(self, rng, beta=1.0) -> None:
        """Pick a uniformly random unassigned ball per chain and assign it."""
        ur = self.params.red - self.r1 - self.r2
        ub = self.params.blue - self.b1 - self.b2
        if np.any(ur + ub == 0):
            raise ValueError("cannot assign from an empty pool")
        red = rng.random(self.chains) * (ur + ub) < ur
        self.add(rng, red, beta)

    def gibbs_step(self, rng, beta=1.0) -> None:
        self.add(rng, self.remove_random(rng), beta)

    def stepsize_step(self, rng, block: int) -> None:
        """Vectorized block MH move; requires every ball to be assigned."""
        P = self.params
        red = rng.random(self.chains) < 0.5
        from_left = rng.random(self.chains) < 0.5
        src = np.where(red, np.where(from_left, self.r1, self.r2), np.where(from_left, self.b1, self.b2))
        dst = np.where(red, np.where(from_left, self.r2, self.r1), np.where(from_left, self.b2, self.b1))
        k = np.minimum(block, src)
        reversible = (k == block) | (dst == 0)
        delta = np.where(from_left, -k, k)
        new_r1 = self.r1 + np.where(red, delta, 0)
        new_b1 = self.b1 + np.where(red, 0, delta)
        log_ratio = urn_joint_log_prob(new_r1, new_b1, P) - urn_joint_log_prob(self.r1, self.b1, P)
        accept = reversible & (k > 0) & (np.log(rng.random(self.chains)) < log_ratio)
        self.r1 = np.where(accept, new_r1, self.r1)
        self.b1 = np.where(accept, new_b1, self.b1)
        self.r2 = P.red - self.r1
        self.b2 = P.blue - self.b1
        self.assigns += 1


# ---------------------------------------------------------------- strategies

def run_strategy(strategy: str, params: UrnModelParams, budget: int | None = None,
                 chains: int = 1, rng: np.random.Generator | None = None) -> UrnChains:
    """Run ``chains`` independent chains of a strategy with ``budget`` Gibbs assignments.

    The default budget is ``10 N``. Prior-initialized strategies spend the whole
    budget on full-data moves; sequential ones spend ``N`` on the initial pass.
    Annealed subsampling spreads ``budget - N`` churn pairs over the growth.
    """
    rng = np.random.default_rng() if rng is None else rng
    n = params.n
    budget = 10 * n if budget is None else int(budget)
    strategy = strategy.lower()
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown urn strategy {strategy!r}; expected one of {STRATEGIES}")
    if strategy.startswith("sequential") or strategy == "anneal-subsample":
        if budget < n:
            raise ValueError(f"{strategy} needs a budget of at least N={n}")

    if strategy == "prior+gibbs":
        state = UrnChains.from_prior(params, chains, rng)
        for _ in range(budget):
            state.gibbs_step(rng)
    elif strategy in ("sequential", "sequential+gibbs"):
        state = UrnChains.empty(params, chains)
        for _ in range(n):
            state.assign_random(rng)
        if strategy == "sequential+gibbs":
            for _ in range(budget - n):
                state.gibbs_step(rng)
    elif strategy == "anneal-subsample":
        state = UrnChains.empty(params, chains)
        churn = (budget - n) / n
        done = 0
        for size in range(1, n + 1):
            state.assign_random(rng)
            target = math.floor(size * churn + 1e-9)
            while done < target:
                done += 1
                state.remove_random(rng)
                state.assign_random(rng)
    elif strategy == "anneal-energy":
        state = UrnChains.from_prior(params, chains, rng)
        for t in range(budget):
            state.gibbs_step(rng, beta=(t + 1) / budget)
    else:
        state = UrnChains.from_prior(params, chains, rng)
        for t in range(budget):
            state.stepsize_step(rng, block=math.ceil(budget / (t + 1)))
    return state


# ---------------------------------------------------------------- distances

def histogram(r1, b1, params: UrnModelParams, bins: int | None = None) -> np.ndarray:
    """Normalized histogram of final states on the exact grid or on ``bins x bins`` cells."""
    r1 = np.asarray(r1, dtype=np.int64)
    b1 = np.asarray(b1, dtype=np.int64)
    if bins is None:
        rows, cols = params.shape
        ri, bi = r1, b1
    else:
        rows = cols = bins
        ri = r1 * bins // (params.red + 1)
        bi = b1 * bins // (params.blue + 1)
    h = np.bincount(ri * cols + bi, minlength=rows * cols).reshape(rows, cols).astype(float)
    return h / h.sum()


def coarsen(table: np.ndarray, bins: int | None) -> np.ndarray:
    """Sum an exact ``(R+1, B+1)`` table into the cells used by :func:`histogram`."""
    if bins is None:
        return table
    rows, cols = table.shape
    ri = np.arange(rows) * bins // rows
    bi = np.arange(cols) * bins // cols
    out = np.zeros((bins, bins))
    np.add.at(out, (ri[:, None], bi[None, :]), table)
    return out


def tvd(a, b) -> float:
    """Total variation distance between two distributions on the same grid."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(0.5 * np.abs(a / a.sum() - b / b.sum()).sum())


def tvd_with_error(r1, b1, target: np.ndarray, params, bins=None, boot: int = 200, rng=None):
    """TVD of the chains' empirical histogram to ``target`` and a bootstrap standard error."""
    rng = np.random.default_rng(0) if rng is None else rng
    r1 = np.asarray(r1)
    b1 = np.asarray(b1)
    target = coarsen(target, bins)
    value = tvd(histogram(r1, b1, params, bins), target)
    reps = np.empty(boot)
    for i in range(boot):
        idx = rng.integers(0, r1.size, r1.size)
        reps[i] = tvd(histogram(r1[idx], b1[idx], params, bins), target)
    return value, float(reps.std(ddof=1))


# ---------------------------------------------------------------- moments

MOMENT_NAMES = ("E_dx_rem", "V_dx_rem", "E_dx_add", "V_dx_add",
                "E_dy_rem", "V_dy_rem", "E_dy_add", "V_dy_add")


def _moves(counts: UrnCounts, params: UrnModelParams):
    """All (probability, dx_rem, dx_add, dy_rem, dy_add) outcomes of one Gibbs move.

    Removal takes a uniformly random ball; addition puts the same ball back by
    its conditional given the remaining balls. Increments are in the intrinsic
    coordinates ``x = r1 / R`` and ``y = b1 / B``.
    """
    R, B = params.red, params.blue
    r1, b1 = counts.r1, counts.b1
    r2, b2 = R - r1, B - b1
    n = params.n
    out = []
    for red, left, count in ((True, True, r1), (False, True, b1), (True, False, r2), (False, False, b2)):
        if count == 0:
            continue
        rr1, bb1, rr2, bb2 = r1 - (red and left), b1 - (not red and left), r2 - (red and not left), b2 - (not red and not left)
        same1, same2 = (rr1, rr2) if red else (bb1, bb2)
        pl = left_probability(same1, rr1 + bb1, same2, rr2 + bb2, params)
        rem = -1.0 if left else 0.0
        for to_left, prob in ((True, pl), (False, 1 - pl)):
            add = 1.0 if to_left else 0.0
            if red:
                out.append((count / n * prob, rem / R, add / R, 0.0, 0.0))
            else:
                out.append((count / n * prob, 0.0, 0.0, rem / B, add / B))
    return out


def single_step_moments_exact(counts: UrnCounts, params: UrnModelParams) -> dict:
    """Exact means and variances of the removal/addition increments, plus totals."""
    if params.red == 0 or params.blue == 0:
        raise ValueError("moments need at least one ball of each color")
    counts.validate(params)
    moves = np.array(_moves(counts, params))
    w = moves[:, 0]
    out = {}
    for name, col in (("dx_rem", 1), ("dx_add", 2), ("dy_rem", 3), ("dy_add", 4)):
        mean = float(w @ moves[:, col])
        out["E_" + name] = mean
        out["V_" + name] = float(w @ (moves[:, col] - mean) ** 2)
    for name, cols in (("dx", (1, 2)), ("dy", (3, 4))):
        tot = moves[:, cols[0]] + moves[:, cols[1]]
        mean = float(w @ tot)
        out["E_" + name] = mean
        out["V_" + name] = float(w @ (tot - mean) ** 2)
    return out


@dataclass
class MonteCarloMoments:
    values: dict
    stderr: dict
    trials: int
    low_trials: bool


def single_step_moments_mc(counts: UrnCounts, params: UrnModelParams, trials: int,
                           rng: np.random.Generator) -> MonteCarloMoments:
    """Monte-Carlo estimates of the eight increment moments with standard errors."""
    counts.validate(params)
    low = trials < 1000
    if low:
        warnings.warn(f"only {trials} trials; moment standard errors will be unreliable")
    chains = UrnChains.full(params, np.full(trials, counts.r1), np.full(trials, counts.b1))
    r1_0, b1_0 = chains.r1.copy(), chains.b1.copy()
    red = chains.remove_random(rng)
    r1_mid, b1_mid = chains.r1.copy(), chains.b1.copy()
    chains.add(rng, red)
    incs = {
        "dx_rem": (r1_mid - r1_0) / params.red,
        "dx_add": (chains.r1 - r1_mid) / params.red,
        "dy_rem": (b1_mid - b1_0) / params.blue,
        "dy_add": (chains.b1 - b1_mid) / params.blue,
    }
    values, stderr = {}, {}
    for name, v in incs.items():
        mean = v.mean()
        dev = v - mean
        m2 = (dev ** 2).mean()
        m4 = (dev ** 4).mean()
        values["E_" + name] = float(mean)
        stderr["E_" + name] = float(math.sqrt(m2 / trials))
        values["V_" + name] = float(m2 * trials / (trials - 1))
        stderr["V_" + name] = float(math.sqrt(max(m4 - m2 ** 2, 0.0) / trials))
    return MonteCarloMoments(values, stderr, trials, low)


def fokker_planck_coeffs(counts: UrnCounts, params: UrnModelParams):
    """Drift vector ``f`` and diagonal diffusion matrix ``D`` at ``counts``."""
    m = single_step_moments_exact(counts, params)
    n = params.n
    f = n * np.array([m["E_dx"], m["E_dy"]])
    D = n ** 2 * np.diag([m["V_dx"], m["V_dy"]])
    return f, D


# ---------------------------------------------------------------- mixing time

@dataclass
class MixingResult:
    sizes: list
    budgets: list
    tvds: list
    slope: float
    intercept: float


def _scaled_params(n, ratio, p, alpha_beta):
    red = round(n * ratio[0] / (ratio[0] + ratio[1]))
    return UrnModelParams(red, n - red, p, alpha_beta)


def _crossing(budgets, tvds, eps):
    """First budget where the TVD curve falls below ``eps``, log-linearly interpolated."""
    for i, t in enumerate(tvds):
        if t < eps:
            if i == 0:
                return budgets[0]
            b0, b1 = math.log(budgets[i - 1]), math.log(budgets[i])
            t0, t1 = tvds[i - 1], t
            return math.exp(b0 + (b1 - b0) * (t0 - eps) / (t0 - t1))
    return None


def prior_gibbs_budget(params, eps, chains, rng, bins, growth=1.05, max_budget=None):
    """Budget for prior-initialized Gibbs to reach TVD ``eps``.

    The chain is time-homogeneous, so one long run checked at geometrically
    spaced budgets brackets the crossing; the final value interpolates between
    the bracketing checkpoints.
    """
    target = coarsen(exact_posterior(params), bins)
    max_budget = 50 * params.n ** 2 if max_budget is None else max_budget
    state = UrnChains.from_prior(params, chains, rng)
    budgets, tvds = [], []
    done = 0
    check = params.n
    while done < max_budget:
        while done < check:
            state.gibbs_step(rng)
            done += 1
        budgets.append(done)
        tvds.append(tvd(histogram(state.r1, state.b1, params, bins), target))
        if tvds[-1] < eps:
            break
        check = max(done + 1, int(done * growth))
    return _crossing(budgets, tvds, eps), budgets, tvds


def anneal_budget(params, eps, chains, seed, bins, iters: int = 8):
    """Budget for annealed subsampling to reach TVD ``eps``, by bisection in log-budget.

    Every trial reuses the same seed, so nearby budgets see common random numbers.
    """
    target = coarsen(exact_posterior(params), bins)
    n = params.n

    def trial(budget):
        state = run_strategy("anneal-subsample", params, budget, chains, np.random.default_rng(seed))
        return tvd(histogram(state.r1, state.b1, params, bins), target)

    lo, hi = n, 2 * n
    t_lo = trial(lo)
    if t_lo < eps:
        return lo, [lo], [t_lo]
    budgets, tvds = [lo], [t_lo]
    t_hi = trial(hi)
    budgets.append(hi)
    tvds.append(t_hi)
    while t_hi >= eps:
        lo, hi = hi, 2 * hi
        t_hi = trial(hi)
        budgets.append(hi)
        tvds.append(t_hi)
        if hi > 1000 * n:
            return None, budgets, tvds
    for _ in range(iters):
        mid = int(round(math.sqrt(lo * hi)))
        if mid in (lo, hi):
            break
        t_mid = trial(mid)
        budgets.append(mid)
        tvds.append(t_mid)
        if t_mid < eps:
            hi = mid
        else:
            lo = mid
    return math.sqrt(lo * hi), budgets, tvds


def mixing_time_experiment(sizes, strategy: str, eps_target: float, *, chains: int = 10_000,
                           ratio=(2, 3), p: float = 0.45, alpha_beta: float = 0.5,
                           bins: int | None = 16, seed: int = 0) -> MixingResult:
    """Budget needed per data size to bring TVD below ``eps_target``; log-log slope fit."""
    strategy = strategy.lower()
    budgets, curves = [], []
    for i, n in enumerate(sizes):
        params = _scaled_params(n, ratio, p, alpha_beta)
        if strategy == "prior+gibbs":
            b, bs, ts = prior_gibbs_budget(params, eps_target, chains, np.random.default_rng([seed, i]), bins)
        elif strategy == "anneal-subsample":
            b, bs, ts = anneal_budget(params, eps_target, chains, [seed, i], bins)
        else:
            raise ValueError(f"mixing experiment supports prior+gibbs and anneal-subsample, not {strategy!r}")
        if b is None:
            raise RuntimeError(f"{strategy} did not reach TVD {eps_target} at N={n}")
        budgets.append(b)
        curves.append(list(zip(bs, ts)))
    slope, intercept = np.polyfit(np.log(sizes), np.log(budgets), 1)
    return MixingResult(list(sizes), budgets, curves, float(slope), float(intercept))
