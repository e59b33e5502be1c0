"""Follower best response, moment propagation, roll-outs, steady state."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonFinite, Unstable
from .model import ClosedLoop, GameInstance, IncentiveMatrix, build_closed_loop

# Abort a roll-out once any state component exceeds this magnitude.
OVERFLOW_GUARD = 1e12


@dataclass(frozen=True)
class MomentTrajectory:
    """Mean and covariance of the tracking error over stages 0..N-1."""

    mu: np.ndarray      # (N, n)
    sigma: np.ndarray   # (N, n, n)


@dataclass(frozen=True)
class Trajectory:
    """One realized closed-loop roll-out."""

    x: np.ndarray                    # (N, n)
    u: np.ndarray                    # (N, m)
    payment: np.ndarray              # (N,)  (x_k - xref)' Theta u_k
    leader_stage_cost: np.ndarray    # (N,)  e' Q e
    follower_stage_cost: np.ndarray  # (N,)  u' R u


def follower_response(cl: ClosedLoop, error: np.ndarray) -> np.ndarray:
    """Myopic best response u = (1/2) R^{-1} Theta' e.

    Unique global minimizer of v' R v - e' Theta v.
    """
    return 0.5 * np.linalg.solve(cl.R, cl.Theta.T @ np.asarray(error, dtype=float))


def propagate_moments(instance: GameInstance, theta: IncentiveMatrix) -> MomentTrajectory:
    """Propagate mu_{k+1} = A_Theta mu_k + g, Sigma_{k+1} = A_Theta Sigma_k A_Theta'."""
    cl = build_closed_loop(instance, theta)
    N, n = instance.N, instance.n
    mu = np.empty((N, n))
    sigma = np.empty((N, n, n))
    mu[0] = instance.mu0
    sigma[0] = instance.Sigma0
    for k in range(N - 1):
        mu[k + 1] = cl.A_Theta @ mu[k] + cl.g
        sigma[k + 1] = cl.A_Theta @ sigma[k] @ cl.A_Theta.T
    return MomentTrajectory(mu=mu, sigma=sigma)


def simulate(instance: GameInstance, theta: IncentiveMatrix, x0: np.ndarray) -> Trajectory:
    """Roll the closed loop for N stages from x0 under the best response."""
    cl = build_closed_loop(instance, theta)
    N, n, m = instance.N, instance.n, instance.m
    x = np.empty((N, n))
    u = np.empty((N, m))
    payment = np.empty(N)
    leader = np.empty(N)
    follower = np.empty(N)
    xk = np.asarray(x0, dtype=float).reshape(n).copy()
    for k in range(N):
        if not np.all(np.isfinite(xk)) or np.max(np.abs(xk)) > OVERFLOW_GUARD:
            raise NonFinite(f"state escaped numeric range at stage {k}", stage=k)
        e = xk - instance.xref
        uk = follower_response(cl, e)
        x[k] = xk
        u[k] = uk
        payment[k] = e @ cl.Theta @ uk
        leader[k] = e @ instance.Q @ e
        follower[k] = uk @ instance.R @ uk
        xk = instance.A @ xk + instance.B @ uk
    return Trajectory(x=x, u=u, payment=payment,
                      leader_stage_cost=leader, follower_stage_cost=follower)


def steady_state_error(instance: GameInstance, theta: IncentiveMatrix) -> np.ndarray:
    """Fixed point (I - A_Theta)^{-1} (A - I) xref of the error dynamics."""
    cl = build_closed_loop(instance, theta)
    if not cl.is_schur:
        raise Unstable(
            f"no steady state: spectral radius {cl.spectral_radius:.6g} >= 1")
    n = instance.n
    return np.linalg.solve(np.eye(n) - cl.A_Theta, cl.g)


def covariance_sqrt(Sigma: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition."""
    w, V = np.linalg.eigh(Sigma)
    w = np.clip(w, 0.0, None)
    return (V * np.sqrt(w)) @ V.T


def sample_initial_state(instance: GameInstance, base_seed: int, index: int) -> np.ndarray:
    """Draw x0 = xref + mu0 + L z, z standard normal, seed = base_seed XOR index.

    Per-sample seeding keeps results independent of how samples are
    partitioned across workers.
    """
    rng = np.random.default_rng(int(base_seed) ^ int(index))
    L = covariance_sqrt(instance.Sigma0)
    z = rng.standard_normal(instance.n)
    return instance.xref + instance.mu0 + L @ z
