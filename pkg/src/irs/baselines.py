"""Comparison estimators: standard and information-form Kalman updates, and a
per-epoch local adaptive Lasso that ignores all prior state."""

from __future__ import annotations

from typing import Optional

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .core import (
    DataError,
    EpochData,
    Hyperparams,
    ModelState,
    NoiseSpec,
    NumericalError,
    PredictedState,
    StateTransition,
    symmetrize,
)
from .estimator import (
    DescentConfig,
    _prox_loop,
    _smooth_pieces,
    _spd_inverse,
    _spd_solve,
    covariance_estimate,
    predict_state,
)


def kalman_gain(
    pred: PredictedState, X: np.ndarray, W: np.ndarray, tau_star: float
) -> np.ndarray:
    """Gain K = Sigma_pred X^T (W + (1/tau*) X Sigma_pred X^T)^-1 (p x n).

    Deliberately solves the n x n innovation system; the information-form
    update below exists precisely to avoid it.
    """
    X = np.asarray(X, dtype=float)
    W = np.asarray(W, dtype=float)
    if tau_star <= 0:
        raise DataError(f"tau_star must be positive, got {tau_star}")
    S = W + (X @ pred.sigma_pred @ X.T) / tau_star
    try:
        c = cho_factor(symmetrize(S), lower=True)
    except (LinAlgError, ValueError):
        raise NumericalError("singular innovation covariance") from None
    # K = Sigma X^T S^-1, computed via the symmetric solve S^-1 (X Sigma).
    return cho_solve(c, X @ pred.sigma_pred).T


def kalman_step(
    prev: ModelState,
    data: EpochData,
    trans: StateTransition,
    noise: NoiseSpec,
    tau_star: float = 1.0,
) -> ModelState:
    """Gain-form filter update.

    theta = theta_pred + (1/tau*) K (y - X theta_pred). At tau* = 1 the
    covariance follows the textbook (I - K X) Sigma_pred identity; for any
    other weight no covariance recursion is stated, so the sandwich-form
    covariance with lam = 0 is substituted.
    """
    if prev.p != data.p:
        raise DataError(f"state dimension {prev.p} != epoch column count {data.p}")
    pred = predict_state(prev, trans)
    W = noise.matrix(data.n)
    K = kalman_gain(pred, data.X, W, tau_star)
    innov = data.y - data.X @ pred.theta_pred
    theta = pred.theta_pred + (K @ innov) / tau_star
    if tau_star == 1.0:
        sigma = symmetrize((np.eye(data.p) - K @ data.X) @ pred.sigma_pred)
    else:
        sigma = covariance_estimate(
            theta,
            theta,
            data,
            pred,
            noise,
            Hyperparams(0.0, tau_star * data.p / data.n),
        )
    w2 = noise.w2 if noise.is_iid else float(np.trace(W)) / data.n
    return ModelState(theta, sigma, w2, prev.t + 1)


def kalman_step_fast(
    prev: ModelState,
    data: EpochData,
    trans: StateTransition,
    noise: NoiseSpec,
) -> ModelState:
    """Information-form filter update, algebraically equal to the gain form at
    tau* = 1 but solving p x p systems only:

        theta = (X^T W^-1 X + Sigma_pred^-1)^-1 (X^T W^-1 y + Sigma_pred^-1 theta_pred)
        Sigma = (X^T W^-1 X + Sigma_pred^-1)^-1
    """
    if prev.p != data.p:
        raise DataError(f"state dimension {prev.p} != epoch column count {data.p}")
    pred = predict_state(prev, trans)
    XtWiX, XtWiy, _ = _smooth_pieces(data, noise)
    sigma_inv = _spd_inverse(pred.sigma_pred, "singular predicted covariance")
    A = XtWiX + sigma_inv
    theta = _spd_solve(A, XtWiy + sigma_inv @ pred.theta_pred, "singular information matrix")
    sigma = _spd_inverse(A, "singular information matrix")
    w2 = noise.w2 if noise.is_iid else float(np.trace(noise.W)) / data.n
    return ModelState(theta, sigma, w2, prev.t + 1)


def local_adaptive_lasso(
    data: EpochData, lam: float, cfg: Optional[DescentConfig] = None
) -> np.ndarray:
    """Epoch-local adaptive Lasso with no prior-state terms.

    Anchors at a ridge-stabilized OLS estimate, then runs proximal descent on
        (1/2n) ||y - X theta||^2 + (lam/p) sum_i |theta_i| / |theta0_i|.
    """
    if data.n < 2:
        raise DataError("local lasso requires at least 2 rows")
    if lam < 0:
        raise DataError(f"lambda must be >= 0, got {lam}")
    cfg = cfg or DescentConfig()
    n, p = data.n, data.p
    XtX = data.X.T @ data.X
    Xty = data.X.T @ data.y
    try:
        theta0 = cho_solve(cho_factor(XtX, lower=True), Xty)
    except (LinAlgError, ValueError):
        theta0 = _spd_solve(XtX + 1e-6 * np.eye(p), Xty, "singular local OLS anchor")

    X, y = data.X, data.y

    def smooth_val(th: np.ndarray) -> float:
        r = y - X @ th
        return float(r @ r) / (2.0 * n)

    def smooth_grad(th: np.ndarray) -> np.ndarray:
        return -(X.T @ (y - X @ th)) / n

    result = _prox_loop(smooth_val, smooth_grad, theta0, lam, p, cfg)
    return result.theta
