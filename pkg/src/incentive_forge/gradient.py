"""Analytic gradient of the expected leader cost via adjoint recursions.

The backward recursions accumulate the sensitivity of the mean and
covariance trajectories to the closed-loop matrix; collecting terms gives
a per-stage gradient contribution

    G_k = [(Sigma_k + mu_k mu_k') Theta
           + ((1/2) mu_k lambda_{k+1}' + Sigma_k A_Theta' Lambda_{k+1}) B] R^{-1}.

The placement of the transposes in the rank-one and covariance terms is
the one validated against central finite differences (see tests).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cost import expected_cost
from .dynamics import MomentTrajectory, propagate_moments
from .model import GameInstance, IncentiveMatrix, build_closed_loop

DEFAULT_FD_STEP = 1e-5


@dataclass(frozen=True)
class AdjointState:
    """Backward adjoints lambda_1..lambda_N and Lambda_1..Lambda_N.

    Index k of the arrays holds lambda_{k+1} (terminal entries are zero).
    """

    lam: np.ndarray   # (N, n)
    Lam: np.ndarray   # (N, n, n)


def adjoints(instance: GameInstance, theta: IncentiveMatrix,
             moments: MomentTrajectory) -> AdjointState:
    """Run the backward recursions from zero terminal conditions.

    lambda_k = (2Q + Theta R^{-1} Theta') mu_k + A_Theta' lambda_{k+1}
    Lambda_k = Q + (1/2) Theta R^{-1} Theta' + A_Theta' Lambda_{k+1} A_Theta
    """
    cl = build_closed_loop(instance, theta)
    N, n = instance.N, instance.n
    Th = theta.Theta
    Rinv_Tt = np.linalg.solve(instance.R, Th.T)
    two_S = 2.0 * instance.Q + Th @ Rinv_Tt
    # Entry k holds lambda_{k+1}; lambda_N and Lambda_N are zero, so the
    # terminal slot keeps its initialization.
    lam = np.zeros((N, n))
    Lam = np.zeros((N, n, n))
    for k in range(N - 1, 0, -1):
        lam[k - 1] = two_S @ moments.mu[k] + cl.A_Theta.T @ lam[k]
        Lam[k - 1] = cl.S + cl.A_Theta.T @ Lam[k] @ cl.A_Theta
    return AdjointState(lam=lam, Lam=Lam)


def analytic_gradient(instance: GameInstance, theta: IncentiveMatrix) -> np.ndarray:
    """Gradient of J with respect to Theta (n x m)."""
    cl = build_closed_loop(instance, theta)
    moments = propagate_moments(instance, theta)
    adj = adjoints(instance, theta, moments)
    Th = theta.Theta
    Rinv = np.linalg.inv(instance.R)
    G = np.zeros_like(Th)
    for k in range(instance.N):
        mu_k = moments.mu[k]
        Sg_k = moments.sigma[k]
        lam_next = adj.lam[k]
        Lam_next = adj.Lam[k]
        G += ((Sg_k + np.outer(mu_k, mu_k)) @ Th
              + (0.5 * np.outer(mu_k, lam_next)
                 + Sg_k @ cl.A_Theta.T @ Lam_next) @ instance.B) @ Rinv
    return G


def finite_difference_gradient(instance: GameInstance, theta: IncentiveMatrix,
                               step: float = DEFAULT_FD_STEP) -> np.ndarray:
    """Central-difference gradient of expected_cost, entry by entry."""
    if step <= 0:
        raise ValueError("step must be positive")
    Th = theta.Theta
    G = np.zeros_like(Th)
    for i in range(Th.shape[0]):
        for j in range(Th.shape[1]):
            E = np.zeros_like(Th)
            E[i, j] = step
            Jp = expected_cost(instance, IncentiveMatrix(Th + E)).total
            Jm = expected_cost(instance, IncentiveMatrix(Th - E)).total
            G[i, j] = (Jp - Jm) / (2.0 * step)
    return G
