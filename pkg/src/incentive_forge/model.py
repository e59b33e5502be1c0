"""Domain types for the LQ-bilinear incentive game.

A leader fixes an incentive matrix Theta paying the follower
(x - xref)' Theta u per stage; the myopic follower's best response turns
the system x_{k+1} = A x + B u into the autonomous error dynamics
e_{k+1} = A_Theta e + g with A_Theta = A + (1/2) B R^{-1} Theta'.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BadHorizon, DimensionMismatch, NotPositiveDefinite, NotPSD

SYM_TOL = 1e-10


def _as_matrix(M, name: str) -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.ndim != 2:
        raise DimensionMismatch(f"{name} must be a 2-D array, got ndim={M.ndim}")
    return M


def _as_vector(v, name: str) -> np.ndarray:
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.ndim != 1:
        raise DimensionMismatch(f"{name} must be a 1-D array, got ndim={v.ndim}")
    return v


def _symmetrize(M: np.ndarray, name: str) -> np.ndarray:
    if np.max(np.abs(M - M.T)) > SYM_TOL:
        raise NotPositiveDefinite(f"{name} is not symmetric (tol {SYM_TOL})")
    return 0.5 * (M + M.T)


def _check_pd(M: np.ndarray, name: str) -> None:
    try:
        np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite(f"{name} is not positive definite") from None


@dataclass(frozen=True)
class GameInstance:
    """One LQ-bilinear incentive game.

    A, B are the open-loop dynamics, Q and R the leader tracking and
    follower input weights, xref the reference state, N the horizon,
    and (mu0, Sigma0) the mean and covariance of the initial tracking
    error x0 - xref.
    """

    A: np.ndarray
    B: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    xref: np.ndarray
    N: int
    mu0: np.ndarray
    Sigma0: np.ndarray

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]


@dataclass(frozen=True)
class IncentiveMatrix:
    """The leader's decision variable Theta (n x m)."""

    Theta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "Theta", _as_matrix(self.Theta, "Theta"))

    @property
    def shape(self):
        return self.Theta.shape


@dataclass(frozen=True)
class ClosedLoop:
    """Closed loop induced by the follower's best response to Theta."""

    A_Theta: np.ndarray
    g: np.ndarray
    S: np.ndarray
    spectral_radius: float
    is_schur: bool
    R: np.ndarray = field(repr=False)
    Theta: np.ndarray = field(repr=False)


def validate(instance: GameInstance) -> GameInstance:
    """Check all invariants and return a canonicalized copy.

    Symmetric matrices are projected to (M + M')/2 after passing the
    symmetry tolerance, so downstream code can rely on exact symmetry.
    """
    A = _as_matrix(instance.A, "A")
    B = _as_matrix(instance.B, "B")
    Q = _as_matrix(instance.Q, "Q")
    R = _as_matrix(instance.R, "R")
    xref = _as_vector(instance.xref, "xref")
    mu0 = _as_vector(instance.mu0, "mu0")
    Sigma0 = _as_matrix(instance.Sigma0, "Sigma0")

    n = A.shape[0]
    if A.shape != (n, n):
        raise DimensionMismatch(f"A must be square, got {A.shape}")
    if B.shape[0] != n:
        raise DimensionMismatch(f"B has {B.shape[0]} rows, expected {n}")
    m = B.shape[1]
    if Q.shape != (n, n):
        raise DimensionMismatch(f"Q must be {n}x{n}, got {Q.shape}")
    if R.shape != (m, m):
        raise DimensionMismatch(f"R must be {m}x{m}, got {R.shape}")
    if xref.shape != (n,):
        raise DimensionMismatch(f"xref must have length {n}, got {xref.shape}")
    if mu0.shape != (n,):
        raise DimensionMismatch(f"mu0 must have length {n}, got {mu0.shape}")
    if Sigma0.shape != (n, n):
        raise DimensionMismatch(f"Sigma0 must be {n}x{n}, got {Sigma0.shape}")

    N = instance.N
    if not isinstance(N, (int, np.integer)) or isinstance(N, bool) or N < 1:
        raise BadHorizon(f"N must be a positive integer, got {N!r}")

    Q = _symmetrize(Q, "Q")
    R = _symmetrize(R, "R")
    _check_pd(Q, "Q")
    _check_pd(R, "R")

    if np.max(np.abs(Sigma0 - Sigma0.T)) > SYM_TOL:
        raise NotPSD(f"Sigma0 is not symmetric (tol {SYM_TOL})")
    Sigma0 = 0.5 * (Sigma0 + Sigma0.T)
    if np.min(np.linalg.eigvalsh(Sigma0)) < -SYM_TOL:
        raise NotPSD("Sigma0 has a negative eigenvalue")

    return GameInstance(A=A, B=B, Q=Q, R=R, xref=xref, N=int(N),
                        mu0=mu0, Sigma0=Sigma0)


def build_closed_loop(instance: GameInstance, theta: IncentiveMatrix) -> ClosedLoop:
    """Assemble A_Theta, the drift g, and the stage-cost matrix S."""
    Theta = theta.Theta
    n, m = instance.n, instance.m
    if Theta.shape != (n, m):
        raise DimensionMismatch(
            f"Theta must be {n}x{m}, got {Theta.shape}")

    Rinv_Tt = np.linalg.solve(instance.R, Theta.T)
    A_Theta = instance.A + 0.5 * instance.B @ Rinv_Tt
    g = (instance.A - np.eye(n)) @ instance.xref
    S = instance.Q + 0.5 * Theta @ Rinv_Tt
    S = 0.5 * (S + S.T)
    rho = float(np.max(np.abs(np.linalg.eigvals(A_Theta))))
    return ClosedLoop(A_Theta=A_Theta, g=g, S=S, spectral_radius=rho,
                      is_schur=rho < 1.0, R=instance.R, Theta=Theta)
