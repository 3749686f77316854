"""Simultaneous perturbation stochastic approximation, ascent form.

Step k perturbs every parameter at once along a Rademacher direction,
estimates the gradient from two objective values and moves uphill with
the usual decaying gains ``a_k = a / (A + k + 1)**alpha`` and
``c_k = c / (k + 1)**gamma``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

Objective = Callable[[np.ndarray], float]


class NonFiniteObjective(FloatingPointError):
    pass


@dataclass(frozen=True)
class SPSAState:
    a: float
    c: float = 0.1
    A: float = 0.0
    alpha: float = 0.602
    gamma: float = 0.101
    k: int = 0
    seed: int = 0
    evaluations: int = 0

    def __post_init__(self):
        if self.a < 0 or self.c <= 0 or self.k < 0:
            raise ValueError(f"invalid SPSA state: a={self.a}, c={self.c}, k={self.k}")

    def gains(self) -> tuple[float, float]:
        return (
            self.a / (self.A + self.k + 1) ** self.alpha,
            self.c / (self.k + 1) ** self.gamma,
        )

    def direction(self, size: int) -> np.ndarray:
        # depends only on (seed, k): reproducible after checkpoint/resume
        rng = np.random.default_rng([self.seed, self.k])
        return rng.choice([-1.0, 1.0], size=size)


def pseudo_gradient(objective: Objective, params, state: SPSAState) -> tuple[np.ndarray, float, float]:
    """Two-point estimate at ``params``; also returns the two objective values."""
    params = np.asarray(params, dtype=float)
    _, ck = state.gains()
    delta = state.direction(params.size)
    f_plus = float(objective(params + ck * delta))
    f_minus = float(objective(params - ck * delta))
    if not (math.isfinite(f_plus) and math.isfinite(f_minus)):
        raise NonFiniteObjective(f"objective returned {f_plus}, {f_minus} at SPSA step {state.k}")
    return (f_plus - f_minus) / (2.0 * ck) * delta, f_plus, f_minus


def spsa_step(objective: Objective, params, state: SPSAState) -> tuple[np.ndarray, SPSAState, float]:
    """One ascent step; exactly two objective evaluations.

    Returns the new parameters, the advanced state and the midpoint
    ``(f(theta + c_k delta) + f(theta - c_k delta)) / 2`` as an estimate of f(theta).
    """
    ghat, f_plus, f_minus = pseudo_gradient(objective, params, state)
    ak, _ = state.gains()
    new = np.asarray(params, dtype=float) + ak * ghat
    return new, replace(state, k=state.k + 1, evaluations=state.evaluations + 2), 0.5 * (f_plus + f_minus)


def calibrate_gain(g0: float, A: float, alpha: float = 0.602, first_step: float = 0.1) -> float:
    """Scale ``a`` so that the first update moves each parameter by ``first_step``.

    Every component of an SPSA estimate has the same magnitude ``g0``.
    """
    if g0 <= 0:
        raise ValueError(f"initial pseudo-gradient magnitude must be positive, got {g0}")
    return first_step * (A + 1) ** alpha / g0


def maximize(objective: Objective, x0, steps: int, c: float = 0.1, A_fraction: float = 0.1,
             first_step: float = 0.1, seed: int = 0) -> tuple[np.ndarray, SPSAState]:
    """Run ``steps`` SPSA iterations with the gain calibrated from the first estimate."""
    x = np.asarray(x0, dtype=float)
    state = SPSAState(a=1.0, c=c, A=A_fraction * steps, seed=seed)
    g0, _, _ = pseudo_gradient(objective, x, state)
    state = replace(state, a=calibrate_gain(np.abs(g0).max(), state.A, state.alpha, first_step),
                    evaluations=2)
    for _ in range(steps):
        x, state, _ = spsa_step(objective, x, state)
    return x, state
