"""Exception hierarchy shared by all modules."""


class IncentiveForgeError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(IncentiveForgeError):
    """Matrix/vector shapes are mutually inconsistent."""


class NotPositiveDefinite(IncentiveForgeError):
    """A weight matrix that must be symmetric positive definite is not."""


class NotPSD(IncentiveForgeError):
    """A covariance matrix has a significantly negative eigenvalue."""


class BadHorizon(IncentiveForgeError):
    """Horizon length is not a positive integer."""


class NonFinite(IncentiveForgeError):
    """A roll-out escaped the finite numeric range (unstable loop)."""

    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage


class Unstable(IncentiveForgeError):
    """An operation requiring a Schur-stable closed loop was called without one."""


class DegenerateReference(IncentiveForgeError):
    """Steady-state cost is identically zero; no unique minimizer exists."""


class DegenerateGamma(IncentiveForgeError):
    """The horizon-cost aggregate vanishes; the limiting objective is flat."""
