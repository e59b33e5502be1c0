"""Closed-form scalar analysis: cost, geometric sums, asymptotic optima.

Everything here is for n = m = 1 with B > 0. The closed-form cost and
its two asymptotic regimes (long horizon, expensive follower) admit
explicit formulas; near-singular closed-loop gains fall back to direct
summation to avoid catastrophic cancellation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGamma, DegenerateReference, Unstable

# Closed-form geometric sums switch to direct summation below this.
GEOM_SINGULAR_TOL = 1e-6
# The fully assembled closed-form cost needs more slack: its bracket
# combinations cancel to O((1 - A_Theta)^2), so the crossover is wider.
COST_SINGULAR_TOL = 1e-2


@dataclass(frozen=True)
class GeometricSums:
    """Partial power sums of a base a over k = 0..N-1, with derivatives.

    alpha1 = sum a^k, alpha2 = sum a^{2k}; d_alpha1/d_alpha2 are their
    derivatives in a.
    """

    alpha1: float
    alpha2: float
    d_alpha1: float
    d_alpha2: float


@dataclass(frozen=True)
class ScalarInstance:
    A: float
    B: float
    Q: float
    R: float
    xref: float
    N: int
    mu0: float
    var0: float

    def __post_init__(self):
        if self.Q <= 0 or self.R <= 0:
            raise ValueError("Q and R must be positive")
        if self.B <= 0:
            raise ValueError("B must be positive")
        if self.var0 < 0:
            raise ValueError("var0 must be nonnegative")
        if self.N < 1:
            raise ValueError("N must be a positive integer")

    def closed_loop_gain(self, theta: float) -> float:
        return self.A + self.B * theta / (2.0 * self.R)


def geometric_sums(a: float, N: int) -> GeometricSums:
    """Compute alpha1, alpha2 and their derivatives in a.

    Uses the closed forms (1 - a^N)/(1 - a) etc. away from the poles and
    direct summation when a denominator is nearly singular.
    """
    if N < 1:
        raise ValueError("N must be a positive integer")
    ks = np.arange(N)
    if abs(1.0 - a) < GEOM_SINGULAR_TOL:
        alpha1 = float(np.sum(a**ks))
        d_alpha1 = float(np.sum(ks * a**np.maximum(ks - 1, 0) * (ks > 0)))
    else:
        alpha1 = (1.0 - a**N) / (1.0 - a)
        d_alpha1 = ((1.0 - a**N) - N * a**(N - 1) * (1.0 - a)) / (1.0 - a)**2
    if abs(1.0 - a * a) < GEOM_SINGULAR_TOL:
        alpha2 = float(np.sum(a**(2 * ks)))
        d_alpha2 = float(np.sum(2 * ks * a**np.maximum(2 * ks - 1, 0) * (ks > 0)))
    else:
        alpha2 = (1.0 - a**(2 * N)) / (1.0 - a * a)
        d_alpha2 = (2 * a * (1.0 - a**(2 * N))
                    - 2 * N * a**(2 * N - 1) * (1.0 - a * a)) / (1.0 - a * a)**2
    return GeometricSums(alpha1=float(alpha1), alpha2=float(alpha2),
                         d_alpha1=float(d_alpha1), d_alpha2=float(d_alpha2))


def _cost_by_summation(s: ScalarInstance, theta: float) -> float:
    """Sum (Q + Theta^2/2R) E[e_k^2] by rolling the moment recursions."""
    a = s.closed_loop_gain(theta)
    g = (s.A - 1.0) * s.xref
    weight = s.Q + theta * theta / (2.0 * s.R)
    mu, var = s.mu0, s.var0
    total = 0.0
    for _ in range(s.N):
        total += weight * (var + mu * mu)
        mu = a * mu + g
        var = a * a * var
    return total


def closed_form_cost(s: ScalarInstance, theta: float) -> float:
    """Closed-form expected leader cost J(theta) for the scalar case."""
    a = s.closed_loop_gain(theta)
    if min(abs(1.0 - a), abs(1.0 + a)) < COST_SINGULAR_TOL:
        return _cost_by_summation(s, theta)
    gs = geometric_sums(a, s.N)
    g_over = (s.A - 1.0) * s.xref / (1.0 - a)
    weight = s.Q + theta * theta / (2.0 * s.R)
    bracket = ((s.var0 + s.mu0**2) * gs.alpha2
               + 2.0 * g_over * s.mu0 * (gs.alpha1 - gs.alpha2)
               + g_over**2 * (s.N - 2.0 * gs.alpha1 + gs.alpha2))
    return weight * bracket


def steady_state_avg_cost(s: ScalarInstance, theta: float) -> float:
    """Average cost per stage in steady state, (Q + Theta^2/2R) e_ss^2."""
    a = s.closed_loop_gain(theta)
    if abs(a) >= 1.0:
        raise Unstable(f"|A_Theta| = {abs(a):.6g} >= 1: no steady state")
    e_ss = (s.A - 1.0) * s.xref / (1.0 - a)
    return (s.Q + theta * theta / (2.0 * s.R)) * e_ss * e_ss


def stability_interval(s: ScalarInstance) -> tuple[float, float]:
    """Open interval of theta for which |A_Theta| < 1 (requires B > 0)."""
    return (-2.0 * s.R * (1.0 + s.A) / s.B, 2.0 * s.R * (1.0 - s.A) / s.B)


@dataclass(frozen=True)
class AsymptoticResult:
    theta_star: float
    regime: str  # interior | boundary | A_equals_one | R_limit
    stability_interval: tuple[float, float]


def theta_opt_infinite_horizon(s: ScalarInstance) -> AsymptoticResult:
    """Optimal incentive in the long-horizon limit.

    For A != 1, minimizes the steady-state average cost: the unique
    critical point is B*Q/(A - 1); if the resulting loop gain leaves the
    unit interval the minimum sits on the left stability boundary. For
    A = 1 the transient cost converges and the minimizer is the negative
    root of theta^2 - B*Q*theta - 2*Q*R = 0.
    """
    interval = stability_interval(s)
    if s.A == 1.0:
        theta = s.B * s.Q / 2.0 - np.sqrt(s.B**2 * s.Q**2 / 4.0 + 2.0 * s.Q * s.R)
        return AsymptoticResult(theta_star=float(theta), regime="A_equals_one",
                                stability_interval=interval)
    if s.xref == 0.0:
        raise DegenerateReference(
            "steady-state cost is identically zero for xref = 0, A != 1")
    theta_crit = s.B * s.Q / (s.A - 1.0)
    if abs(s.closed_loop_gain(theta_crit)) < 1.0:
        return AsymptoticResult(theta_star=float(theta_crit), regime="interior",
                                stability_interval=interval)
    return AsymptoticResult(theta_star=interval[0], regime="boundary",
                            stability_interval=interval)


def gamma_diagnostics(s: ScalarInstance) -> tuple[float, float]:
    """Horizon-cost aggregate Gamma(A) and its derivative Gamma'(A).

    Gamma collects the theta-independent part of J in the expensive-
    follower limit; x0 denotes the mean initial state mu0 + xref.
    """
    x0 = s.mu0 + s.xref
    gs = geometric_sums(s.A, s.N)
    gamma = ((s.var0 + x0 * x0) * gs.alpha2
             - 2.0 * s.xref * x0 * gs.alpha1 + s.N * s.xref * s.xref)
    if abs(1.0 - s.A) < GEOM_SINGULAR_TOL:
        # The bracket has a removable singularity at A = 1:
        # (N - alpha1)/(1 - A) = sum_k sum_{j<k} A^j and
        # (alpha1 - alpha2)/(1 - A) = sum_k A^k sum_{j<k} A^j.
        t1 = sum(np.sum(s.A**np.arange(k)) for k in range(s.N))
        t2 = sum(s.A**k * np.sum(s.A**np.arange(k)) for k in range(s.N))
        correction = 2.0 * s.xref * (s.xref * t1 - x0 * t2)
    else:
        correction = (2.0 * s.xref / (1.0 - s.A)
                      * (s.xref * (s.N - gs.alpha1) - x0 * (gs.alpha1 - gs.alpha2)))
    gamma_prime = ((s.var0 + x0 * x0) * gs.d_alpha2
                   - 2.0 * s.xref * x0 * gs.d_alpha1 + correction)
    return float(gamma), float(gamma_prime)


def theta_opt_R_infinity(s: ScalarInstance) -> AsymptoticResult:
    """Limiting minimizer of J as the follower cost weight R grows."""
    gamma, gamma_prime = gamma_diagnostics(s)
    if gamma <= 1e-14:
        raise DegenerateGamma(f"Gamma(A) = {gamma:.3g} is not positive")
    theta = -(s.Q * s.B / 2.0) * gamma_prime / gamma
    return AsymptoticResult(theta_star=float(theta), regime="R_limit",
                            stability_interval=stability_interval(s))
