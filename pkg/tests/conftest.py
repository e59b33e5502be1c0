import numpy as np
import pytest

from incentive_forge import GameInstance, IncentiveMatrix, ScalarInstance, validate


@pytest.fixture
def scalar_game():
    """Scalar benchmark instance (variance 0.09 = std dev 0.3 squared)."""
    return validate(GameInstance(
        A=[[0.4]], B=[[1.0]], Q=[[1.0]], R=[[1.0]],
        xref=[1.0], N=10, mu0=[-1.0], Sigma0=[[0.09]]))


@pytest.fixture
def scalar_inst():
    return ScalarInstance(A=0.4, B=1.0, Q=1.0, R=1.0, xref=1.0, N=10,
                          mu0=-1.0, var0=0.09)


@pytest.fixture
def twodim_game():
    """2-D design benchmark: double-integrator-like dynamics, deterministic x0."""
    return validate(GameInstance(
        A=[[1.0, 0.3], [0.0, 1.0]], B=[[0.5], [1.0]],
        Q=np.eye(2), R=[[2.0]], xref=[1.0, 0.0], N=20,
        mu0=[-1.0, 0.0], Sigma0=np.zeros((2, 2))))


@pytest.fixture
def zero_cost_game():
    """mu0 = 0, Sigma0 = 0, (A - I) xref = 0: J is identically zero."""
    return validate(GameInstance(
        A=[[1.0, 0.0], [0.0, 1.0]], B=[[1.0], [0.5]],
        Q=np.eye(2), R=[[1.0]], xref=[1.0, 2.0], N=8,
        mu0=[0.0, 0.0], Sigma0=np.zeros((2, 2))))


def random_instance(rng, n_max=4, m_max=4, n_horizon=30):
    """Random validated instance with entries at unit-ball scale."""
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    A = rng.uniform(-1, 1, size=(n, n))
    B = rng.uniform(-1, 1, size=(n, m))
    M = rng.uniform(-1, 1, size=(n, n))
    Q = M @ M.T + 0.1 * np.eye(n)
    M = rng.uniform(-1, 1, size=(m, m))
    R = M @ M.T + 0.1 * np.eye(m)
    L = rng.uniform(-1, 1, size=(n, n))
    return validate(GameInstance(
        A=A, B=B, Q=Q, R=R,
        xref=rng.uniform(-1, 1, size=n),
        N=int(rng.integers(1, n_horizon + 1)),
        mu0=rng.uniform(-1, 1, size=n),
        Sigma0=L @ L.T))


def random_theta(rng, instance, scale=0.5):
    return IncentiveMatrix(scale * rng.uniform(-1, 1, size=(instance.n, instance.m)))
