"""Independent brute-force references used by the tests.

Nothing here imports the package under test, and each reference takes a
different computational route (enumeration, sequential products, quadrature,
fixed-step integration) from the production code.
"""
from __future__ import annotations

import itertools
import math

import numpy as np


def set_partitions(n: int):
    """All set partitions of ``range(n)`` as restricted-growth label tuples."""
    def grow(prefix, top):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for k in range(top + 2):
            yield from grow(prefix + [k], max(top, k))
    if n == 0:
        yield ()
        return
    yield from grow([0], 0)


def canonical(labels) -> tuple:
    """Relabel so clusters are numbered in order of first appearance."""
    seen = {}
    return tuple(seen.setdefault(int(l), len(seen)) for l in labels)


def py_log_eppf(sizes, alpha: float, d: float) -> float:
    """Pitman-Yor partition probability by the sequential seating product."""
    total = 0.0
    seated = 0
    tables = 0
    # seat customers table by table; order does not matter for the EPPF
    for size in sizes:
        for j in range(size):
            if j == 0:
                total += math.log(alpha + d * tables) - math.log(alpha + seated)
                tables += 1
            else:
                total += math.log(j - d) - math.log(alpha + seated)
            seated += 1
    return total


def beta_bernoulli_log_marginal(values, a: float, b: float) -> float:
    """Sequential predictive product for a run of booleans."""
    heads = tails = 0
    total = 0.0
    for v in values:
        if v:
            total += math.log((heads + a) / (heads + tails + a + b))
            heads += 1
        else:
            total += math.log((tails + b) / (heads + tails + a + b))
            tails += 1
    return total


def mixture_log_joint(labels, data, alpha: float, d: float, a: float = 1.0, b: float = 1.0) -> float:
    clusters = {}
    for lab, x in zip(labels, data):
        clusters.setdefault(lab, []).append(x)
    sizes = [len(v) for v in clusters.values()]
    return py_log_eppf(sizes, alpha, d) + sum(beta_bernoulli_log_marginal(v, a, b) for v in clusters.values())


def partition_posterior(data, alpha: float, d: float = 0.0, a: float = 1.0, b: float = 1.0) -> dict:
    """Exact posterior over set partitions of boolean ``data``."""
    logs = {p: mixture_log_joint(p, data, alpha, d, a, b) for p in set_partitions(len(data))}
    m = max(logs.values())
    z = sum(math.exp(v - m) for v in logs.values())
    return {p: math.exp(v - m) / z for p, v in logs.items()}


def alpha_posterior(data, alphas, d: float = 0.0, a: float = 1.0, b: float = 1.0) -> np.ndarray:
    """Posterior over a grid of concentrations (uniform prior), partitions summed out."""
    ev = []
    for alpha in alphas:
        logs = [mixture_log_joint(p, data, alpha, d, a, b) for p in set_partitions(len(data))]
        m = max(logs)
        ev.append(m + math.log(sum(math.exp(v - m) for v in logs)))
    ev = np.array(ev)
    w = np.exp(ev - ev.max())
    return w / w.sum()


def urn_labeled_table(red: int, blue: int, p: float, alpha_beta: float) -> np.ndarray:
    """Posterior over (r1, b1) by summing over every labeled ball-to-urn assignment."""
    def log_beta(x, y):
        return math.lgamma(x) + math.lgamma(y) - math.lgamma(x + y)

    colors = [1] * red + [0] * blue
    table = np.zeros((red + 1, blue + 1))
    logs = []
    for left in itertools.product((True, False), repeat=len(colors)):
        r1 = sum(c for c, l in zip(colors, left) if l and c)
        b1 = sum(1 for c, l in zip(colors, left) if l and not c)
        n1 = r1 + b1
        n2 = len(colors) - n1
        r2, b2 = red - r1, blue - b1
        lp = (n1 * math.log(p) + n2 * math.log(1 - p)
              + log_beta(r1 + alpha_beta, b1 + alpha_beta) - log_beta(alpha_beta, alpha_beta)
              + log_beta(r2 + alpha_beta, b2 + alpha_beta) - log_beta(alpha_beta, alpha_beta))
        logs.append((r1, b1, lp))
    m = max(lp for _, _, lp in logs)
    for r1, b1, lp in logs:
        table[r1, b1] += math.exp(lp - m)
    return table / table.sum()


def rk4(f, x0: float, t0: float, t1: float, steps: int) -> float:
    """Classic fixed-step fourth-order Runge-Kutta for a scalar ODE."""
    h = (t1 - t0) / steps
    x, t = x0, t0
    for _ in range(steps):
        k1 = f(t, x)
        k2 = f(t + h / 2, x + h * k1 / 2)
        k3 = f(t + h / 2, x + h * k2 / 2)
        k4 = f(t + h, x + h * k3)
        x += h * (k1 + 2 * k2 + 2 * k3 + k4) / 6
        t += h
    return x


def bimodal_rhs(gamma: float, delta: float, n: float, schedule):
    def f(t, x):
        beta = schedule(t)
        return math.exp(-beta * delta * n) * (1.0 / (1.0 + math.exp(-beta * gamma * n)) - x)
    return f


def student_t_predictive_quadrature(x: float, data, mu0, kappa0, sigmasq0, nu0) -> float:
    """Posterior predictive of a normal with unknown mean and variance by 1-D quadrature.

    For fixed variance the mean integrates out in closed form (a Gaussian
    convolution), leaving a one-dimensional integral over the variance of the
    scaled-inverse-chi-squared prior times the data's marginal likelihood.
    """
    from scipy import integrate, stats

    data = np.asarray(data, dtype=float)
    n = data.size

    def weight(s2):
        # prior density of s2 times p(data | s2) with the mean integrated out
        w = stats.invgamma.pdf(s2, nu0 / 2, scale=nu0 * sigmasq0 / 2)
        if n:
            cov = s2 * (np.eye(n) + np.ones((n, n)) / kappa0)
            w *= stats.multivariate_normal.pdf(data, np.full(n, mu0), cov)
        return w

    def predictive(s2):
        kappa_n = kappa0 + n
        mu_n = (kappa0 * mu0 + data.sum()) / kappa_n
        return stats.norm.pdf(x, mu_n, math.sqrt(s2 * (1 + 1 / kappa_n)))

    opts = dict(epsabs=0, epsrel=1e-11, limit=400)
    breaks = [1e-3, 1e-2, 1e-1, 1, 10, 100]
    num = den = 0.0
    for lo, hi in zip([0.0] + breaks, breaks + [np.inf]):
        num += integrate.quad(lambda s2: weight(s2) * predictive(s2), lo, hi, **opts)[0]
        den += integrate.quad(weight, lo, hi, **opts)[0]
    return math.log(num / den)
