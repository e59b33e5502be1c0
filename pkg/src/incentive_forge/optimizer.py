"""Gradient descent on the expected leader cost with Armijo backtracking."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cost import expected_cost
from .dynamics import steady_state_error
from .errors import NonFinite
from .gradient import analytic_gradient
from .model import ClosedLoop, GameInstance, IncentiveMatrix, build_closed_loop

STEP_UNDERFLOW = 1e-14


@dataclass(frozen=True)
class OptimizerConfig:
    max_iters: int = 10_000
    grad_tol: float = 1e-8
    initial_step: float = 1.0
    backtrack_factor: float = 0.5
    armijo_c: float = 1e-4
    theta_init: IncentiveMatrix | None = None

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")
        if self.grad_tol <= 0 or self.initial_step <= 0:
            raise ValueError("grad_tol and initial_step must be positive")
        if not 0 < self.backtrack_factor < 1:
            raise ValueError("backtrack_factor must be in (0, 1)")
        if not 0 < self.armijo_c < 1:
            raise ValueError("armijo_c must be in (0, 1)")


@dataclass(frozen=True)
class DesignReport:
    theta_final: IncentiveMatrix
    cost_trace: np.ndarray
    grad_norm_trace: np.ndarray
    theta_trace: np.ndarray
    converged: bool
    final_stability: ClosedLoop
    steady_state_error_norm: float | None = field(default=None)


def optimize(instance: GameInstance, config: OptimizerConfig | None = None) -> DesignReport:
    """Minimize J(Theta) locally from theta_init (default: zero matrix).

    Accepts a step only when it satisfies the Armijo decrease condition;
    stops on small gradient, iteration cap, or step underflow.
    """
    config = config or OptimizerConfig()
    n, m = instance.n, instance.m
    if config.theta_init is not None:
        Th = config.theta_init.Theta.copy()
        if Th.shape != (n, m):
            raise ValueError(f"theta_init must be {n}x{m}, got {Th.shape}")
    else:
        Th = np.zeros((n, m))

    costs, gnorms, thetas = [], [], []
    J = expected_cost(instance, IncentiveMatrix(Th)).total
    if not np.isfinite(J):
        raise NonFinite("initial cost is not finite")
    converged = False
    for _ in range(config.max_iters):
        G = analytic_gradient(instance, IncentiveMatrix(Th))
        gnorm = float(np.linalg.norm(G))
        costs.append(J)
        gnorms.append(gnorm)
        thetas.append(Th.copy())
        if gnorm <= config.grad_tol:
            converged = True
            break
        alpha = config.initial_step
        accepted = False
        while alpha >= STEP_UNDERFLOW:
            Th_new = Th - alpha * G
            J_new = expected_cost(instance, IncentiveMatrix(Th_new)).total
            if not np.isfinite(J_new):
                raise NonFinite(f"cost overflow at Theta={Th_new!r}")
            if J_new <= J - config.armijo_c * alpha * gnorm**2:
                Th, J = Th_new, J_new
                accepted = True
                break
            alpha *= config.backtrack_factor
        if not accepted:
            break  # step underflow: no further progress possible

    if not thetas or not np.array_equal(thetas[-1], Th):
        # max_iters exhausted right after an accepted step: record the endpoint.
        costs.append(J)
        gnorms.append(float(np.linalg.norm(
            analytic_gradient(instance, IncentiveMatrix(Th)))))
        thetas.append(Th.copy())

    theta_final = IncentiveMatrix(Th)
    cl = build_closed_loop(instance, theta_final)
    ss_norm = None
    if cl.is_schur:
        ss_norm = float(np.linalg.norm(steady_state_error(instance, theta_final)))
    return DesignReport(theta_final=theta_final,
                        cost_trace=np.asarray(costs),
                        grad_norm_trace=np.asarray(gnorms),
                        theta_trace=np.asarray(thetas),
                        converged=converged,
                        final_stability=cl,
                        steady_state_error_norm=ss_norm)


def sweep_cost(instance: GameInstance, theta_grid) -> list[tuple[np.ndarray, float]]:
    """Evaluate expected_cost over a grid of Theta values, order-preserving."""
    theta_grid = list(theta_grid)
    if not theta_grid:
        raise ValueError("theta_grid must be nonempty")
    out = []
    for th in theta_grid:
        Th = np.asarray(th, dtype=float)
        if Th.ndim == 0:
            Th = Th.reshape(1, 1)
        cb = expected_cost(instance, IncentiveMatrix(Th))
        out.append((Th, cb.total))
    return out
