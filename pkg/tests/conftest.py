import numpy as np
import pytest

from irs import EpochData, PredictedState


def random_spd(rng, p, base=0.5):
    """Well-conditioned random symmetric positive-definite matrix."""
    A = rng.standard_normal((p, p))
    return A @ A.T / p + base * np.eye(p)


def random_instance(rng, n, p, w2=1.0, noise_sd=0.5):
    """Random epoch plus a consistent predicted state for estimator tests."""
    X = rng.standard_normal((n, p))
    theta_true = rng.standard_normal(p)
    y = X @ theta_true + noise_sd * rng.standard_normal(n)
    data = EpochData(X, y, 0)
    pred = PredictedState(rng.standard_normal(p), random_spd(rng, p))
    return data, pred, theta_true


def orthonormal_design(rng, n, p):
    """n x p matrix with exactly orthonormal columns (n >= p)."""
    Q, _ = np.linalg.qr(rng.standard_normal((n, p)))
    return Q[:, :p]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
