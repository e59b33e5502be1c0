"""Expected leader cost, social-cost identity, and Monte Carlo estimation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import Trajectory, propagate_moments, sample_initial_state, simulate
from .model import GameInstance, IncentiveMatrix, build_closed_loop


@dataclass(frozen=True)
class CostBreakdown:
    """Leader objective split into tracking and expected payment parts."""

    total: float
    tracking: float
    payment: float
    per_stage: np.ndarray


def expected_cost(instance: GameInstance, theta: IncentiveMatrix) -> CostBreakdown:
    """J(Theta) = sum_k Tr(S Sigma_k) + mu_k' S mu_k.

    The tracking component uses Q in place of S; the payment component
    is the remainder (S - Q = (1/2) Theta R^{-1} Theta' is the expected
    per-stage incentive payment weight).
    """
    cl = build_closed_loop(instance, theta)
    moments = propagate_moments(instance, theta)
    per_stage = np.array([
        np.trace(cl.S @ Sg) + m @ cl.S @ m
        for m, Sg in zip(moments.mu, moments.sigma)
    ])
    tracking = sum(
        np.trace(instance.Q @ Sg) + m @ instance.Q @ m
        for m, Sg in zip(moments.mu, moments.sigma)
    )
    total = float(np.sum(per_stage))
    return CostBreakdown(total=total, tracking=float(tracking),
                         payment=total - float(tracking), per_stage=per_stage)


def social_cost(traj: Trajectory, instance: GameInstance) -> float:
    """Sum of leader and follower stage objectives; payments cancel."""
    return float(np.sum(traj.leader_stage_cost) + np.sum(traj.follower_stage_cost))


def monte_carlo_cost(instance: GameInstance, theta: IncentiveMatrix,
                     samples: int, seed: int) -> tuple[float, float]:
    """Mean and standard error of the realized leader cost over sampled x0."""
    if samples < 2:
        raise ValueError("need at least 2 samples")
    costs = np.empty(samples)
    for i in range(samples):
        x0 = sample_initial_state(instance, seed, i)
        traj = simulate(instance, theta, x0)
        costs[i] = np.sum(traj.leader_stage_cost) + np.sum(traj.payment)
    est = float(np.mean(costs))
    se = float(np.std(costs, ddof=1) / np.sqrt(samples))
    return est, se
