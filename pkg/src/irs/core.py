"""Shared domain types, input validation, and per-epoch standardization.

All types are immutable value objects: arrays are copied on construction and
marked read-only, so instances can be shared freely across threads. Every
operation in this package is a pure function over these types.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

SYMMETRY_TOL = 1e-10


class DataError(ValueError):
    """Raised when input data violates an operation's preconditions."""


class ConfigError(ValueError):
    """Raised when a configuration object is inconsistent or incomplete."""


class NumericalError(RuntimeError):
    """Raised when a linear system cannot be solved reliably."""


def _as_matrix(a, name: str) -> np.ndarray:
    m = np.array(a, dtype=float)
    if m.ndim != 2:
        raise DataError(f"{name} must be a 2-D matrix, got ndim={m.ndim}")
    m.setflags(write=False)
    return m


def _as_vector(a, name: str) -> np.ndarray:
    v = np.array(a, dtype=float)
    if v.ndim != 1:
        raise DataError(f"{name} must be a 1-D vector, got ndim={v.ndim}")
    v.setflags(write=False)
    return v


def symmetrize(m: np.ndarray) -> np.ndarray:
    """Return (M + M^T)/2, guarding covariance matrices against FP drift."""
    return (m + m.T) / 2.0


def _check_symmetric(m: np.ndarray, name: str, tol: float = SYMMETRY_TOL) -> np.ndarray:
    if m.shape[0] != m.shape[1]:
        raise DataError(f"{name} must be square, got shape {m.shape}")
    if m.size and np.max(np.abs(m - m.T)) > tol:
        raise DataError(f"{name} is not symmetric within {tol:g}")
    out = symmetrize(np.asarray(m, dtype=float))
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class EpochData:
    """One epoch's design matrix and response.

    Deliberately a light container: malformed content (shape mismatch,
    non-finite entries) is reported by :func:`validate_epoch` rather than
    rejected at construction, so callers can inspect bad inputs.
    """

    X: np.ndarray
    y: np.ndarray
    t: int = 0

    def __post_init__(self):
        object.__setattr__(self, "X", _as_matrix(self.X, "X"))
        object.__setattr__(self, "y", _as_vector(self.y, "y"))
        if int(self.t) < 0:
            raise DataError(f"epoch index must be non-negative, got {self.t}")
        object.__setattr__(self, "t", int(self.t))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class StateTransition:
    """Per-epoch evolution spec: transition matrix F and process noise Q."""

    F: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        f = _as_matrix(self.F, "F")
        if f.shape[0] != f.shape[1]:
            raise DataError(f"F must be square, got shape {f.shape}")
        q = _check_symmetric(_as_matrix(self.Q, "Q"), "Q")
        if q.shape[0] != f.shape[0]:
            raise DataError(
                f"F and Q dimensions differ: {f.shape[0]} vs {q.shape[0]}"
            )
        # Eigenvalue p.s.d. check is affordable only at moderate dimension.
        if q.shape[0] <= 200 and q.size:
            if np.linalg.eigvalsh(q).min() < -1e-8:
                raise DataError("Q must be positive semi-definite")
        object.__setattr__(self, "F", f)
        object.__setattr__(self, "Q", q)

    @property
    def p(self) -> int:
        return self.F.shape[0]

    @staticmethod
    def identity(p: int, q: float = 0.01) -> "StateTransition":
        """Common default: F = I and Q = q^2 I with a small positive q."""
        return StateTransition(np.eye(p), (q ** 2) * np.eye(p))


@dataclass(frozen=True)
class NoiseSpec:
    """Response-noise model: iid with scale w2, or a full covariance W."""

    w2: Optional[float] = None
    W: Optional[np.ndarray] = None

    def __post_init__(self):
        if (self.w2 is None) == (self.W is None):
            raise DataError("NoiseSpec requires exactly one of w2 or W")
        if self.w2 is not None:
            if not np.isfinite(self.w2) or self.w2 <= 0:
                raise DataError(f"w2 must be a positive real, got {self.w2}")
            object.__setattr__(self, "w2", float(self.w2))
        else:
            object.__setattr__(self, "W", _check_symmetric(_as_matrix(self.W, "W"), "W"))

    @classmethod
    def iid(cls, w2: float) -> "NoiseSpec":
        return cls(w2=w2)

    @classmethod
    def full(cls, W) -> "NoiseSpec":
        return cls(W=W)

    @property
    def is_iid(self) -> bool:
        return self.w2 is not None

    def matrix(self, n: int) -> np.ndarray:
        """Materialize the n x n covariance (only the Kalman gain path needs it)."""
        if self.is_iid:
            return self.w2 * np.eye(n)
        if self.W.shape[0] != n:
            raise DataError(f"W has dimension {self.W.shape[0]}, expected {n}")
        return self.W


@dataclass(frozen=True)
class ModelState:
    """Parameter estimate and covariance after an epoch, plus noise scale."""

    theta: np.ndarray
    sigma: np.ndarray
    w2: float
    t: int = 0

    def __post_init__(self):
        theta = _as_vector(self.theta, "theta")
        sigma = _check_symmetric(_as_matrix(self.sigma, "sigma"), "sigma")
        if sigma.shape[0] != theta.shape[0]:
            raise DataError(
                f"theta length {theta.shape[0]} != sigma dimension {sigma.shape[0]}"
            )
        if sigma.size and np.diag(sigma).min() < -SYMMETRY_TOL:
            raise DataError("sigma has a negative diagonal entry")
        if not np.isfinite(self.w2) or self.w2 <= 0:
            raise DataError(f"w2 must be a positive real, got {self.w2}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "w2", float(self.w2))
        object.__setattr__(self, "t", int(self.t))

    @property
    def p(self) -> int:
        return self.theta.shape[0]


@dataclass(frozen=True)
class PredictedState:
    """One-step-ahead state: mean F theta_prev and covariance F Sigma F^T + Q."""

    theta_pred: np.ndarray
    sigma_pred: np.ndarray

    def __post_init__(self):
        theta = _as_vector(self.theta_pred, "theta_pred")
        sigma = _check_symmetric(_as_matrix(self.sigma_pred, "sigma_pred"), "sigma_pred")
        if sigma.shape[0] != theta.shape[0]:
            raise DataError(
                f"theta_pred length {theta.shape[0]} != sigma_pred dimension {sigma.shape[0]}"
            )
        object.__setattr__(self, "theta_pred", theta)
        object.__setattr__(self, "sigma_pred", sigma)

    @property
    def p(self) -> int:
        return self.theta_pred.shape[0]


@dataclass(frozen=True)
class Hyperparams:
    """Regularization pair: lam weights the L1 term, tau the inertia term."""

    lam: float = 0.0
    tau: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.lam) or self.lam < 0:
            raise ConfigError(f"lambda must be >= 0, got {self.lam}")
        if not np.isfinite(self.tau) or self.tau < 0:
            raise ConfigError(f"tau must be >= 0, got {self.tau}")
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "tau", float(self.tau))


@dataclass(frozen=True)
class Scaler:
    """Column statistics from one epoch, reusable on held-out rows."""

    col_means: np.ndarray
    col_stds: np.ndarray
    y_mean: float
    constant_mask: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "col_means", _as_vector(self.col_means, "col_means"))
        object.__setattr__(self, "col_stds", _as_vector(self.col_stds, "col_stds"))
        mask = np.array(self.constant_mask, dtype=bool)
        mask.setflags(write=False)
        object.__setattr__(self, "constant_mask", mask)
        object.__setattr__(self, "y_mean", float(self.y_mean))
        if np.any(self.col_stds < 0):
            raise DataError("col_stds entries must be >= 0")

    def transform(self, X) -> np.ndarray:
        """Standardize new rows with this scaler; constant columns map to 0."""
        X = np.asarray(X, dtype=float)
        denom = np.where(self.constant_mask, 1.0, self.col_stds)
        out = (X - self.col_means) / denom
        out[:, self.constant_mask] = 0.0
        return out


@dataclass(frozen=True)
class ValidationReport:
    """List of human-readable issues; empty iff the epoch is well formed."""

    issues: tuple = ()

    @property
    def ok(self) -> bool:
        return len(self.issues) == 0

    def __bool__(self) -> bool:  # truthy when there ARE issues, like a findings list
        return len(self.issues) > 0


def validate_epoch(data: EpochData, expected_p: Optional[int] = None) -> ValidationReport:
    """Report-style validation of one epoch; callers decide how to react."""
    issues = []
    if data.n < 1:
        issues.append("X has no rows")
    if data.p < 1:
        issues.append("X has no columns")
    if data.X.shape[0] != data.y.shape[0]:
        issues.append(
            f"row/response mismatch: X has {data.X.shape[0]} rows, y has {data.y.shape[0]}"
        )
    bad = np.argwhere(~np.isfinite(data.X))
    for i, j in bad:
        issues.append(f"non-finite entry at ({i},{j})")
    bad_y = np.flatnonzero(~np.isfinite(data.y))
    for i in bad_y:
        issues.append(f"non-finite response entry at ({i})")
    if expected_p is not None and data.p != expected_p:
        issues.append(f"column count {data.p} != expected {expected_p}")
    return ValidationReport(tuple(issues))


def standardize(data: EpochData) -> tuple[EpochData, Scaler]:
    """Standardize one epoch: columns to mean 0 / sample variance 1, y centered.

    Constant (zero-variance) columns become all-zero and are flagged in the
    scaler, so scantily observed predictors pass through without blowing up.
    Uses the n-1 variance denominator throughout.
    """
    if data.n < 2:
        raise DataError("insufficient rows to standardize")
    means = data.X.mean(axis=0)
    stds = data.X.std(axis=0, ddof=1)
    constant = stds == 0.0
    denom = np.where(constant, 1.0, stds)
    Xs = (data.X - means) / denom
    Xs[:, constant] = 0.0
    y_mean = float(data.y.mean())
    ys = data.y - y_mean
    scaler = Scaler(means, np.where(constant, 0.0, stds), y_mean, constant)
    return EpochData(Xs, ys, data.t), scaler


def predict_response(theta, X) -> np.ndarray:
    """Noiseless mean response X theta."""
    theta = np.asarray(theta, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or theta.ndim != 1 or X.shape[1] != theta.shape[0]:
        raise DataError(
            f"dimension mismatch: X is {X.shape}, theta has length {theta.shape}"
        )
    return X @ theta
