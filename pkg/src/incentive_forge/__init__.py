"""Design of fixed bilinear incentive mechanisms for LQ systems.

A leader picks an incentive matrix Theta once; a myopic follower then
controls the linear system through its per-stage best response. This
package evaluates the leader's expected cost, computes its analytic
gradient, optimizes Theta, and provides the scalar closed forms and
asymptotic characterizations, all cross-checked by Monte Carlo and
brute-force oracles in the test suite.
"""

from .cost import CostBreakdown, expected_cost, monte_carlo_cost, social_cost
from .dynamics import (MomentTrajectory, Trajectory, follower_response,
                       propagate_moments, sample_initial_state, simulate,
                       steady_state_error)
from .errors import (BadHorizon, DegenerateGamma, DegenerateReference,
                     DimensionMismatch, IncentiveForgeError, NonFinite,
                     NotPSD, NotPositiveDefinite, Unstable)
from .gradient import (AdjointState, adjoints, analytic_gradient,
                       finite_difference_gradient)
from .model import (ClosedLoop, GameInstance, IncentiveMatrix,
                    build_closed_loop, validate)
from .optimizer import DesignReport, OptimizerConfig, optimize, sweep_cost
from .scalar import (AsymptoticResult, GeometricSums, ScalarInstance,
                     closed_form_cost, gamma_diagnostics, geometric_sums,
                     stability_interval, steady_state_avg_cost,
                     theta_opt_R_infinity, theta_opt_infinite_horizon)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
