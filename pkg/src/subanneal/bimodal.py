"""Two-mode energy-barrier model under inverse-temperature schedules.

The state is the mass ``x`` in the first mode. At inverse temperature ``beta``
it relaxes toward ``sigmoid(beta * gamma * N)`` at rate
``exp(-beta * delta * N)``::

    dx/dt = exp(-beta delta N) * (sigmoid(beta gamma N) - x)

The equation is scalar and linear in ``x``, so constant pieces are solved in
closed form and the linear ramp ``beta = t / T`` reduces to a one-dimensional
quadrature after changing to the relaxation-time coordinate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.special import expit


class IntegrationError(RuntimeError):
    pass


class HypothesisError(ValueError):
    """Parameters violate the large-data condition the annealing bound needs."""


@dataclass(frozen=True)
class BimodalParams:
    gamma: float
    delta: float
    n: float

    def __post_init__(self):
        if not (self.gamma > 0 and self.delta > 0 and self.n > 0):
            raise ValueError(f"gamma, delta and n must be positive, got {self}")

    @property
    def gap(self) -> float:
        return self.gamma * self.n

    @property
    def barrier(self) -> float:
        return self.delta * self.n


def sigmoid(t):
    return expit(t)


def dynamics_rhs(x, beta, params: BimodalParams):
    return np.exp(-beta * params.barrier) * (sigmoid(beta * params.gap) - x)


def target(params: BimodalParams, beta: float = 1.0) -> float:
    return float(sigmoid(beta * params.gap))


@dataclass(frozen=True)
class Constant:
    beta: float


@dataclass(frozen=True)
class PiecewiseConstant:
    """``values[i]`` holds on ``[breaks[i], breaks[i+1])``; ``breaks[0]`` must be 0."""

    breaks: tuple
    values: tuple

    def __post_init__(self):
        if len(self.breaks) != len(self.values) or not self.breaks or self.breaks[0] != 0:
            raise ValueError("need matching breaks/values with breaks[0] == 0")
        if any(b >= c for b, c in zip(self.breaks, self.breaks[1:])):
            raise ValueError("breaks must increase")


@dataclass(frozen=True)
class Linear:
    """The ramp ``beta(t) = t / T`` over the integration horizon."""


def _relax(x, beta, dt, params):
    s = target(params, beta)
    rate = math.exp(-beta * params.barrier)
    return x + (s - x) * -math.expm1(-rate * dt)


def _integrate_linear(params: BimodalParams, x0: float, T: float) -> float:
    k = params.barrier
    # elapsed relaxation time A(T) = int_0^T exp(-k t / T) dt
    total = T / k * -math.expm1(-k)

    def source(v):
        # v = A(T) - A(t) runs backwards from the end of the schedule
        inner = math.exp(-k) + k * v / T
        beta = -math.log(inner) / k if inner > 0 else 1.0
        return sigmoid(beta * params.gap) * math.exp(-v)

    upper = min(total, 80.0)
    val, err = quad(source, 0.0, upper, epsabs=1e-15, epsrel=1e-12, limit=500)
    if err > 1e-10 * max(abs(val), 1e-300) and err > 1e-14:
        raise IntegrationError(f"quadrature error estimate {err:.3g} exceeds tolerance")
    return x0 * math.exp(-total) + val


def integrate(params: BimodalParams, schedule, x0: float, T: float, rtol: float = 1e-10) -> float:
    """Mass in the first mode at time ``T`` starting from ``x0``.

    ``schedule`` is a :class:`Constant`, :class:`PiecewiseConstant`,
    :class:`Linear`, a bare number, or any callable ``beta(t)`` (solved by
    adaptive Runge-Kutta at relative tolerance ``rtol``).
    """
    if not T > 0:
        raise ValueError("T must be positive")
    if not 0 <= x0 <= 1:
        raise ValueError("x0 must lie in [0, 1]")
    if isinstance(schedule, (int, float)):
        schedule = Constant(float(schedule))
    if isinstance(schedule, Constant):
        x = _relax(x0, schedule.beta, T, params)
    elif isinstance(schedule, PiecewiseConstant):
        x = x0
        ends = list(schedule.breaks[1:]) + [math.inf]
        for start, end, beta in zip(schedule.breaks, ends, schedule.values):
            if start >= T:
                break
            x = _relax(x, beta, min(end, T) - start, params)
    elif isinstance(schedule, Linear):
        x = _integrate_linear(params, x0, T)
    elif callable(schedule):
        sol = solve_ivp(lambda t, y: dynamics_rhs(y, schedule(t), params), (0.0, T), [x0],
                        method="DOP853", rtol=rtol, atol=rtol * 1e-3)
        if not sol.success:
            raise IntegrationError(sol.message)
        x = float(sol.y[0, -1])
    else:
        raise TypeError(f"unsupported schedule {schedule!r}")
    return min(max(x, 0.0), 1.0)


def tvd_final(x, params: BimodalParams):
    return np.abs(x - sigmoid(params.gap))


@dataclass(frozen=True)
class ColdTime:
    value: float
    log_value: float


def cold_time_to_eps(params: BimodalParams, eps: float, x0: float = 0.0) -> ColdTime:
    """Time for the constant ``beta = 1`` dynamics to bring the TVD below ``eps``.

    ``value`` overflows to ``inf`` for large barriers; ``log_value`` stays finite.
    """
    gap = abs(x0 - target(params))
    if gap <= eps:
        return ColdTime(0.0, -math.inf)
    log_value = params.barrier + math.log(math.log(gap / eps))
    value = math.exp(log_value) if log_value < 700 else math.inf
    return ColdTime(value, log_value)


def hypothesis_holds(params: BimodalParams, eps: float, margin: float = 1.0) -> bool:
    """Both large-data conditions: a positive bound denominator and ``gamma N >= margin log(2/eps)``."""
    denom = (eps / 2) ** (params.delta / params.gamma) - math.exp(-params.barrier)
    return denom > 0 and params.gap >= margin * math.log(2 / eps)


def anneal_bound(params: BimodalParams, eps: float) -> float:
    """Schedule length sufficient for the linear ramp to reach TVD ``eps`` from ``x0 = 0``."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    denom = (eps / 2) ** (params.delta / params.gamma) - math.exp(-params.barrier)
    if denom <= 0:
        raise HypothesisError(
            f"(eps/2)^(delta/gamma) = {(eps / 2) ** (params.delta / params.gamma):.3g} does not exceed "
            f"exp(-N delta) = {math.exp(-params.barrier):.3g}; N is too small for this eps"
        )
    return params.barrier * math.log(2 / eps) / denom


def log_natural_coordinate(t, params: BimodalParams, T: float):
    """``log tau``: minus the relaxation time remaining between ``t`` and ``T``."""
    k = params.barrier
    s = np.asarray(t, dtype=float) / T
    return -(T / k) * math.exp(-k) * np.expm1(k * (1.0 - s))


def natural_coordinate(t, params: BimodalParams, T: float):
    return np.exp(log_natural_coordinate(t, params, T))


def beta_of_natural(log_tau, params: BimodalParams, T: float):
    """Inverse-temperature schedule expressed in the natural coordinate (from ``log tau``)."""
    k = params.barrier
    return 1.0 - np.log1p(-(k / T) * np.asarray(log_tau) * math.exp(k)) / k
