"""Exact discrete update rules whose continuous-time models we analyze.

Steps are pure state -> state functions over an immutable value type, so
runs are deterministic and trivially replayable.  The step index times the
learning rate is the continuous time of the matching trajectory sample.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .geometry import Metric


@dataclass(frozen=True)
class OptimizerState:
    """Parameter vector plus the optimizer's memory.

    momentum_buffer is the heavy-ball velocity; accumulator is the scalar
    squared-gradient-norm memory of the adaptive rule (must stay positive).
    """

    q: np.ndarray
    momentum_buffer: np.ndarray
    accumulator: float = 1.0
    step_index: int = 0

    @classmethod
    def initial(cls, q0, accumulator: float = 1.0):
        q0 = np.asarray(q0, dtype=float)
        return cls(q=q0.copy(), momentum_buffer=np.zeros_like(q0),
                   accumulator=float(accumulator), step_index=0)


def step_gd_momentum_wd(state: OptimizerState, loss, eta: float, beta: float = 0.0,
                        weight_decay: float = 0.0) -> OptimizerState:
    """Heavy-ball update with the learning rate inside the buffer:

        buffer <- beta * buffer - eta * (grad f(q) + weight_decay * q)
        q      <- q + buffer

    With beta = 0 and no decay this is plain gradient descent.  This
    parameterization has effective mass eta (1 + beta) / 2 and friction
    1 - beta in its second-order continuous model.
    """
    if eta <= 0:
        raise ValueError("learning rate must be positive")
    if not 0.0 <= beta < 1.0:
        raise ValueError("momentum must lie in [0, 1)")
    if weight_decay < 0:
        raise ValueError("weight decay must be non-negative")
    g = loss.grad(state.q)
    if weight_decay != 0.0:
        g = g + weight_decay * state.q
    buffer = beta * state.momentum_buffer - eta * g
    return replace(state, q=state.q + buffer, momentum_buffer=buffer,
                   step_index=state.step_index + 1)


def step_nesterov(state: OptimizerState, loss, eta: float) -> OptimizerState:
    """Accelerated gradient step with momentum factor (k-1)/(k+2).

    The lookahead point is y = q + ((k-1)/(k+2)) (q - q_prev) where k is the
    number of completed steps; the first step is plain gradient descent.
    The buffer stores q - q_prev.
    """
    if eta <= 0:
        raise ValueError("learning rate must be positive")
    k = state.step_index
    factor = (k - 1.0) / (k + 2.0) if k >= 1 else 0.0
    y = state.q + factor * state.momentum_buffer
    q_new = y - eta * loss.grad(y)
    return replace(state, q=q_new, momentum_buffer=q_new - state.q,
                   step_index=state.step_index + 1)


def step_rmsprop(state: OptimizerState, loss, eta: float, rho: float) -> OptimizerState:
    """Adaptive step scaled by the root of a gradient-norm memory:

        q <- q - (eta / sqrt(G)) * g,   G <- rho * G + (1 - rho) * |g|^2

    The q-update uses the pre-update G.  There is no epsilon guard: a
    positive accumulator at initialization already rules out division by
    zero, and the accumulator stays positive thereafter.
    """
    if eta <= 0:
        raise ValueError("learning rate must be positive")
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must lie in (0, 1)")
    if state.accumulator <= 0.0:
        raise ValueError(f"corrupted accumulator G={state.accumulator:g} (must be positive)")
    g = loss.grad(state.q)
    q_new = state.q - (eta / math.sqrt(state.accumulator)) * g
    g_new = rho * state.accumulator + (1.0 - rho) * float(g @ g)
    return replace(state, q=q_new, accumulator=g_new, step_index=state.step_index + 1)


def step_mirror(state: OptimizerState, loss, eta: float, metric: Metric) -> OptimizerState:
    """Mirror step solving grad h(q_new) = grad h(q) - eta grad f(q).

    Uses the metric's inverse gradient map: multiplicative update under
    negative entropy, preconditioned descent under a quadratic form, plain
    gradient descent under the Euclidean metric.  Leaving the metric domain
    is an error, never a projection.
    """
    if eta <= 0:
        raise ValueError("learning rate must be positive")
    q = metric.check_domain(state.q)
    q_new = metric.grad_inverse(metric.grad(q) - eta * loss.grad(q))
    q_new = metric.check_domain(q_new)
    return replace(state, q=q_new, step_index=state.step_index + 1)


def centered_velocities(qs: np.ndarray, eta: float) -> np.ndarray:
    """Second-order velocity export (q[n+1] - q[n-1]) / (2 eta) for interior
    samples of a discrete run; matches the accuracy of the modified
    equation the velocities are compared against."""
    qs = np.asarray(qs, dtype=float)
    if qs.shape[0] < 3:
        raise ValueError("need at least 3 samples for centered velocities")
    return (qs[2:] - qs[:-2]) / (2.0 * eta)
