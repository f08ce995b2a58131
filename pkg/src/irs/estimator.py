"""Inertia-regularized sparse estimation.

Implements the sequential objective

    (1/2n) (y - X theta)^T W^-1 (y - X theta)
  + (tau/2p) (theta - theta_pred)^T Sigma_pred^-1 (theta - theta_pred)
  + (lam/p) sum_i |theta_i| / |theta_star_i|

together with its gradient, the data-augmented Lasso form, a proximal
gradient solver warm-started at the inertia-regularized OLS anchor
theta_star, the closed-form solution under orthonormal designs, an
approximate post-selection covariance, and the full per-epoch update.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .core import (
    DataError,
    ConfigError,
    EpochData,
    Hyperparams,
    ModelState,
    NoiseSpec,
    NumericalError,
    PredictedState,
    StateTransition,
    symmetrize,
)

# Residual sums of squares below this are treated as exact fits; keeps the
# estimated noise scale strictly positive so W^-1 stays defined.
W2_FLOOR = 1e-12


@dataclass(frozen=True)
class DescentConfig:
    """Proximal-descent controls.

    step_rule "halving-on-increase" retries each update with a halved step
    until the objective stops increasing, which keeps the trace monotone
    without a Lipschitz estimate. Coordinates whose anchor magnitude falls
    below adapt_floor carry a diverging adaptive penalty and are pinned to 0.
    """

    max_iters: int = 500
    step0: float = 1.0
    step_rule: str = "halving-on-increase"
    tol: float = 1e-8
    adapt_floor: float = 1e-10

    def __post_init__(self):
        if self.max_iters < 1:
            raise ConfigError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.step0 <= 0:
            raise ConfigError(f"step0 must be > 0, got {self.step0}")
        if self.step_rule not in ("constant", "halving-on-increase"):
            raise ConfigError(f"unknown step_rule {self.step_rule!r}")
        if self.tol <= 0:
            raise ConfigError(f"tol must be > 0, got {self.tol}")
        if self.adapt_floor <= 0:
            raise ConfigError(f"adapt_floor must be > 0, got {self.adapt_floor}")


class DescentResult(NamedTuple):
    theta: np.ndarray
    iters: int
    trace: np.ndarray


@dataclass(frozen=True)
class AugmentedData:
    """Stacked design/response whose plain RSS equals the smooth loss part."""

    X_tilde: np.ndarray
    y_tilde: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X_tilde, dtype=float)
        y = np.asarray(self.y_tilde, dtype=float)
        if X.shape[0] != y.shape[0]:
            raise DataError("augmented design and response row counts differ")
        object.__setattr__(self, "X_tilde", X)
        object.__setattr__(self, "y_tilde", y)


def tau_star(tau: float, n: int, p: int) -> float:
    """Epoch-scaled inertia weight tau * n / p, recomputed from each epoch's n."""
    return tau * n / p


# ---------------------------------------------------------------------------
# linear-algebra plumbing: SPD solves with a one-shot jitter fallback
# ---------------------------------------------------------------------------


def _spd_solve(A: np.ndarray, b: np.ndarray, context: str) -> np.ndarray:
    """Solve A x = b for symmetric positive-definite A via Cholesky.

    Falls back once to a jittered system before raising, which absorbs the
    mild indefiniteness that accumulates over long streams. The jitter is
    relative to the matrix scale so the retry also works for the huge-norm
    systems produced by near-interpolating epochs (noise scale at its floor).
    """
    try:
        return cho_solve(cho_factor(A, lower=True), b)
    except (LinAlgError, ValueError):
        pass
    scale = max(1.0, float(np.max(np.abs(np.diag(A))))) if A.size else 1.0
    jitter = 1e-10 * scale * np.eye(A.shape[0])
    try:
        return cho_solve(cho_factor(A + jitter, lower=True), b)
    except (LinAlgError, ValueError):
        raise NumericalError(context) from None


def _spd_inverse(A: np.ndarray, context: str) -> np.ndarray:
    return symmetrize(_spd_solve(A, np.eye(A.shape[0]), context))


def _whiten_apply(noise: NoiseSpec, M: np.ndarray) -> np.ndarray:
    """Return W^-1 M without materializing W in the iid case."""
    if noise.is_iid:
        return M / noise.w2
    if noise.W.shape[0] != M.shape[0]:
        raise DataError(
            f"noise covariance has dimension {noise.W.shape[0]}, expected {M.shape[0]}"
        )
    return _spd_solve(noise.W, M, "singular noise covariance")


def _smooth_pieces(data: EpochData, noise: NoiseSpec):
    """Precompute X^T W^-1 X, X^T W^-1 y and a residual-whitening closure."""
    WiX = _whiten_apply(noise, data.X)
    XtWiX = data.X.T @ WiX
    XtWiy = WiX.T @ data.y
    if noise.is_iid:
        w2 = noise.w2

        def quad(r: np.ndarray) -> float:
            return float(r @ r) / w2

    else:
        W = noise.W

        def quad(r: np.ndarray) -> float:
            return float(r @ _spd_solve(W, r, "singular noise covariance"))

    return XtWiX, XtWiy, quad


# ---------------------------------------------------------------------------
# state prediction and the OLS anchor
# ---------------------------------------------------------------------------


def predict_state(prev: ModelState, trans: StateTransition) -> PredictedState:
    """One-step prediction: theta F-propagated, covariance F Sigma F^T + Q."""
    if trans.p != prev.p:
        raise DataError(f"transition dimension {trans.p} != state dimension {prev.p}")
    theta_pred = trans.F @ prev.theta
    sigma_pred = symmetrize(trans.F @ prev.sigma @ trans.F.T + trans.Q)
    return PredictedState(theta_pred, sigma_pred)


def innovation_noise_scale(data: EpochData, pred: PredictedState) -> float:
    """Noise-scale estimate from one-step prediction residuals, floor-guarded.

    w2 = ||y - X theta_pred||^2 / (n - 1), clamped below at 1e-12 so exact
    fits (common on synthetic fixed points) do not make W^-1 undefined.
    """
    if data.n < 2:
        raise DataError("noise-scale estimate requires at least 2 rows")
    r = data.y - data.X @ pred.theta_pred
    rss = float(r @ r)
    if not np.isfinite(rss):
        raise NumericalError("non-finite prediction residuals")
    return max(rss / (data.n - 1), W2_FLOOR)


def inertial_ols(
    data: EpochData, pred: PredictedState, noise: NoiseSpec, tau: float
) -> np.ndarray:
    """Inertia-regularized OLS anchor theta_star.

    Solves (X^T W^-1 X + tau* Sigma_pred^-1) theta =
           X^T W^-1 y + tau* Sigma_pred^-1 theta_pred
    with tau* = tau n/p, via an SPD factorization (never an explicit inverse).
    """
    if data.p != pred.p:
        raise DataError(f"data has {data.p} columns, predicted state has {pred.p}")
    XtWiX, XtWiy, _ = _smooth_pieces(data, noise)
    ts = tau_star(tau, data.n, data.p)
    if ts > 0:
        sigma_inv = _spd_inverse(pred.sigma_pred, "singular predicted covariance")
        A = XtWiX + ts * sigma_inv
        b = XtWiy + ts * (sigma_inv @ pred.theta_pred)
    else:
        A = XtWiX
        b = XtWiy
    return _spd_solve(A, b, "inertial OLS singular")


def soft_threshold(x, nu):
    """Shrink toward zero with dead zone nu: the proximal map of nu * |.|."""
    x = np.asarray(x, dtype=float)
    out = np.sign(x) * np.maximum(np.abs(x) - nu, 0.0)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# objective and gradient
# ---------------------------------------------------------------------------


def loss_gradient(
    theta, data: EpochData, pred: PredictedState, noise: NoiseSpec, tau: float
) -> np.ndarray:
    """Gradient of the smooth loss part:

    -(1/n) X^T W^-1 (y - X theta) + (tau/p) Sigma_pred^-1 (theta - theta_pred)
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape[0] != data.p or data.p != pred.p:
        raise DataError("theta, data, and predicted state dimensions disagree")
    r = data.y - data.X @ theta
    g = -(data.X.T @ _whiten_apply(noise, r)) / data.n
    if tau > 0:
        sigma_inv = _spd_inverse(pred.sigma_pred, "singular predicted covariance")
        g = g + (tau / data.p) * (sigma_inv @ (theta - pred.theta_pred))
    return g


def objective(
    theta,
    data: EpochData,
    pred: PredictedState,
    noise: NoiseSpec,
    hp: Hyperparams,
    theta_star,
    adapt_floor: float = 1e-10,
) -> float:
    """Full sequential objective at theta, with adaptive L1 weights from theta_star.

    Anchor magnitudes are clamped below at adapt_floor before dividing.
    """
    theta = np.asarray(theta, dtype=float)
    theta_star = np.asarray(theta_star, dtype=float)
    r = data.y - data.X @ theta
    _, _, quad = _smooth_pieces(data, noise)
    val = quad(r) / (2.0 * data.n)
    if hp.tau > 0:
        d = theta - pred.theta_pred
        sigma_inv = _spd_inverse(pred.sigma_pred, "singular predicted covariance")
        val += (hp.tau / (2.0 * data.p)) * float(d @ sigma_inv @ d)
    if hp.lam > 0:
        w = 1.0 / np.clip(np.abs(theta_star), adapt_floor, None)
        val += (hp.lam / data.p) * float(np.abs(theta) @ w)
    return float(val)


def augment_data(
    data: EpochData, pred: PredictedState, noise: NoiseSpec, tau: float
) -> AugmentedData:
    """Stack whitened data over the whitened prior so that
    (y~ - X~ theta)^T (y~ - X~ theta) equals the smooth loss part for all theta.

    Upper block: (1/sqrt(2n)) W^-1/2 [X | y]; lower block:
    sqrt(tau/2p) Sigma_pred^-1/2 [I | theta_pred]. tau = 0 yields a zero
    lower block.
    """
    n, p = data.n, data.p
    if p != pred.p:
        raise DataError(f"data has {p} columns, predicted state has {pred.p}")
    cu = 1.0 / np.sqrt(2.0 * n)
    if noise.is_iid:
        Xw = data.X / np.sqrt(noise.w2)
        yw = data.y / np.sqrt(noise.w2)
    else:
        Wm = noise.matrix(n)
        Wm_inv_half = _inv_sqrt_psd(Wm, "noise covariance")
        Xw = Wm_inv_half @ data.X
        yw = Wm_inv_half @ data.y
    if tau > 0:
        cl = np.sqrt(tau / (2.0 * p))
        S_inv_half = _inv_sqrt_psd(pred.sigma_pred, "predicted covariance")
        lower_X = cl * S_inv_half
        lower_y = cl * (S_inv_half @ pred.theta_pred)
    else:
        lower_X = np.zeros((p, p))
        lower_y = np.zeros(p)
    X_tilde = np.vstack([cu * Xw, lower_X])
    y_tilde = np.concatenate([cu * yw, lower_y])
    return AugmentedData(X_tilde, y_tilde)


def _inv_sqrt_psd(M: np.ndarray, name: str) -> np.ndarray:
    vals, vecs = np.linalg.eigh(M)
    if vals.min() <= 1e-14 * max(vals.max(), 1.0):
        raise NumericalError(f"{name} is not positive definite")
    return vecs @ np.diag(1.0 / np.sqrt(vals)) @ vecs.T


# ---------------------------------------------------------------------------
# proximal descent
# ---------------------------------------------------------------------------


def _prox_loop(
    smooth_val: Callable[[np.ndarray], float],
    smooth_grad: Callable[[np.ndarray], np.ndarray],
    theta_star: np.ndarray,
    lam: float,
    p: int,
    cfg: DescentConfig,
) -> DescentResult:
    """Adaptive-weighted proximal gradient loop shared by the solvers.

    Starts at theta_star (the minimizer of the smooth part), applies the
    per-coordinate shrinkage nu_i = lam * s / (p |theta_star_i|), and stops
    when the relative objective change drops below cfg.tol.
    """
    abs_star = np.abs(theta_star)
    active = abs_star >= cfg.adapt_floor
    weights = 1.0 / np.clip(abs_star, cfg.adapt_floor, None)

    def total(th: np.ndarray) -> float:
        return smooth_val(th) + (lam / p) * float(np.abs(th) @ weights)

    theta = np.where(active, theta_star, 0.0)
    trace = [total(theta)]
    s = cfg.step0
    iters = 0
    for _ in range(cfg.max_iters):
        g = smooth_grad(theta)
        accepted = None
        for _ in range(100):
            cand = soft_threshold(theta - s * g, (lam * s / p) * weights)
            cand[~active] = 0.0
            f_cand = total(cand)
            if cfg.step_rule == "constant" or f_cand <= trace[-1]:
                accepted = (cand, f_cand)
                break
            s *= 0.5
        if accepted is None:
            break  # no decrease at any step size: already converged
        theta, f_new = accepted
        prev = trace[-1]
        trace.append(f_new)
        iters += 1
        if abs(prev - f_new) <= cfg.tol * max(abs(prev), W2_FLOOR):
            break
    return DescentResult(theta, iters, np.asarray(trace))


def _descent(
    data: EpochData,
    pred: PredictedState,
    noise: NoiseSpec,
    hp: Hyperparams,
    cfg: DescentConfig,
):
    """Run the full solve; returns (result, theta_star) for reuse upstream."""
    XtWiX, XtWiy, quad = _smooth_pieces(data, noise)
    n, p = data.n, data.p
    ts = tau_star(hp.tau, n, p)
    if ts > 0:
        # Sigma_pred is inverted once per epoch and reused across iterations.
        sigma_inv = _spd_inverse(pred.sigma_pred, "singular predicted covariance")
        A = XtWiX + ts * sigma_inv
        b = XtWiy + ts * (sigma_inv @ pred.theta_pred)
    else:
        sigma_inv = None
        A = XtWiX
        b = XtWiy
    theta_star = _spd_solve(A, b, "inertial OLS singular")

    X, y, tp = data.X, data.y, pred.theta_pred

    def smooth_val(th: np.ndarray) -> float:
        r = y - X @ th
        val = quad(r) / (2.0 * n)
        if sigma_inv is not None:
            d = th - tp
            val += (hp.tau / (2.0 * p)) * float(d @ sigma_inv @ d)
        return val

    def smooth_grad(th: np.ndarray) -> np.ndarray:
        r = y - X @ th
        g = -(X.T @ _whiten_apply(noise, r)) / n
        if sigma_inv is not None:
            g = g + (hp.tau / p) * (sigma_inv @ (th - tp))
        return g

    result = _prox_loop(smooth_val, smooth_grad, theta_star, hp.lam, p, cfg)
    return result, theta_star


def proximal_descent(
    data: EpochData,
    pred: PredictedState,
    noise: NoiseSpec,
    hp: Hyperparams,
    cfg: Optional[DescentConfig] = None,
) -> DescentResult:
    """Minimize the sequential objective by proximal gradient descent.

    Initializes at the inertial OLS anchor; under the halving-on-increase
    step rule the returned objective trace is non-increasing.
    """
    result, _ = _descent(data, pred, noise, hp, cfg or DescentConfig())
    return result


def closed_form_orthogonal(
    data: EpochData,
    theta_pred,
    rho,
    w2: float,
    hp: Hyperparams,
    adapt_floor: float = 1e-10,
) -> np.ndarray:
    """Exact per-coordinate solution for orthonormal designs.

    Requires X^T X = I (checked to 1e-8), iid noise w2, and a diagonal
    predicted covariance given as the vector rho. With
    1/rho*_i = 1/w2 + tau*/rho_i the solution is

        sgn(theta_star_i) * (|theta_star_i| - (lam n/p) rho*_i / |theta_star_i|)^+
    """
    theta_pred = np.asarray(theta_pred, dtype=float)
    rho = np.asarray(rho, dtype=float)
    n, p = data.n, data.p
    if np.max(np.abs(data.X.T @ data.X - np.eye(p))) > 1e-8:
        raise DataError("orthogonality violated")
    if np.any(rho <= 0):
        raise DataError("rho entries must be positive")
    if w2 <= 0:
        raise DataError(f"w2 must be positive, got {w2}")
    ts = tau_star(hp.tau, n, p)
    rho_star = 1.0 / (1.0 / w2 + ts / rho)
    theta_star = rho_star * (data.X.T @ data.y / w2 + ts * theta_pred / rho)
    abs_star = np.abs(theta_star)
    shrink = (hp.lam * n / p) * rho_star / np.clip(abs_star, adapt_floor, None)
    out = np.sign(theta_star) * np.maximum(abs_star - shrink, 0.0)
    out[abs_star < adapt_floor] = 0.0
    return out


def covariance_estimate(
    theta_hat,
    theta_star,
    data: EpochData,
    pred: PredictedState,
    noise: NoiseSpec,
    hp: Hyperparams,
    adapt_floor: float = 1e-10,
) -> np.ndarray:
    """Approximate covariance of the selected estimate:

        Sigma = A^-1 (X^T W^-1 X + tau*^2 Sigma_pred^-1) A^-1,
        A = X^T W^-1 X + lam D^-1 + tau* Sigma_pred^-1,

    with D_ii = |theta_hat_i||theta_star_i| on selected coordinates and
    |theta_star_i|^2 on zeroed ones, so every coordinate keeps a positive
    variance for the next epoch's inertia weighting.
    """
    theta_hat = np.asarray(theta_hat, dtype=float)
    theta_star = np.asarray(theta_star, dtype=float)
    XtWiX, _, _ = _smooth_pieces(data, noise)
    ts = tau_star(hp.tau, data.n, data.p)
    sigma_inv = _spd_inverse(pred.sigma_pred, "singular predicted covariance")
    A = XtWiX + ts * sigma_inv
    inner = XtWiX + (ts ** 2) * sigma_inv
    # Coordinates with a vanishing anchor carry a diverging penalty weight;
    # in the D -> 0 limit their variance is exactly zero, so they are removed
    # from the solve instead of injecting ~1/D^2 entries into it.
    free = np.ones(data.p, dtype=bool)
    if hp.lam > 0:
        abs_star = np.abs(theta_star)
        free = abs_star >= adapt_floor
        selected = theta_hat != 0.0
        D = np.where(selected, np.abs(theta_hat) * abs_star, abs_star ** 2)
        D = np.clip(D, adapt_floor ** 2, None)
        A = A + hp.lam * np.diag(1.0 / D)
    if np.all(free):
        A_ff, inner_ff = symmetrize(A), symmetrize(inner)
    else:
        idx = np.flatnonzero(free)
        A_ff = symmetrize(A[np.ix_(idx, idx)])
        inner_ff = symmetrize(inner[np.ix_(idx, idx)])
    try:
        c = cho_factor(A_ff, lower=True)
    except (LinAlgError, ValueError):
        raise NumericalError("singular covariance system") from None
    # Sandwich computed as Z Z^T with Z = A^-1 inner^(1/2): positive
    # semidefinite by construction even when A spans many orders of magnitude
    # (near-interpolating epochs push the data block to ~1/w2_floor).
    vals, vecs = np.linalg.eigh(inner_ff)
    root = vecs * np.sqrt(np.clip(vals, 0.0, None))
    Z = cho_solve(c, root)
    sigma_ff = Z @ Z.T
    if np.all(free):
        sigma = sigma_ff
    else:
        sigma = np.zeros((data.p, data.p))
        sigma[np.ix_(idx, idx)] = sigma_ff
    return symmetrize(sigma)


def irs_step(
    prev: ModelState,
    data: EpochData,
    trans: StateTransition,
    hp: Hyperparams,
    cfg: Optional[DescentConfig] = None,
) -> ModelState:
    """One full sequential update on a new epoch.

    Predict the state, estimate the noise scale from prediction residuals,
    solve for the sparse estimate, and refresh the covariance.
    """
    if prev.p != data.p:
        raise DataError(
            f"state dimension {prev.p} != epoch column count {data.p}; "
            "expand the model first"
        )
    cfg = cfg or DescentConfig()
    pred = predict_state(prev, trans)
    w2 = innovation_noise_scale(data, pred)
    noise = NoiseSpec.iid(w2)
    result, theta_star = _descent(data, pred, noise, hp, cfg)
    sigma = covariance_estimate(
        result.theta, theta_star, data, pred, noise, hp, cfg.adapt_floor
    )
    return ModelState(result.theta, sigma, w2, prev.t + 1)


def initial_state(data: EpochData) -> ModelState:
    """Plain-OLS initialization from the first epoch: identity covariance,
    noise scale from the OLS residuals (floor-guarded)."""
    if data.n < 2:
        raise DataError("initial state requires at least 2 rows")
    if not (np.all(np.isfinite(data.X)) and np.all(np.isfinite(data.y))):
        raise NumericalError("non-finite entries in the initial epoch")
    try:
        theta0, *_ = np.linalg.lstsq(data.X, data.y, rcond=None)
    except np.linalg.LinAlgError:
        raise NumericalError("initial least-squares fit failed") from None
    r = data.y - data.X @ theta0
    w2 = max(float(r @ r) / (data.n - 1), W2_FLOOR)
    return ModelState(theta0, np.eye(data.p), w2, 0)


def expand_model(state: ModelState, n_new: int, prior_variance: float) -> ModelState:
    """Grow the state for newly observed predictors: zero means, uncorrelated
    large-variance prior blocks, existing entries untouched."""
    if n_new < 1:
        raise DataError(f"n_new must be >= 1, got {n_new}")
    if prior_variance <= 0:
        raise DataError(f"prior_variance must be > 0, got {prior_variance}")
    p = state.p
    theta = np.concatenate([state.theta, np.zeros(n_new)])
    sigma = np.zeros((p + n_new, p + n_new))
    sigma[:p, :p] = state.sigma
    sigma[p:, p:] = prior_variance * np.eye(n_new)
    return ModelState(theta, sigma, state.w2, state.t)
