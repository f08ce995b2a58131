"""k-fold cross-validated grid search for the regularization pair (lam, tau).

The loss keeps a constant expectation across epochs under the adaptive
weighting, so a pair chosen on the first few epochs stays valid for the rest
of the stream; the default protocol is 10 folds on a 3-epoch prefix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import ConfigError, DataError, EpochData, Hyperparams, NumericalError, standardize
from .estimator import DescentConfig, StateTransition, initial_state, irs_step
from .simgen import DataStream

DEFAULT_LAMBDAS = (0.001, 0.01, 0.1, 1.0, 10.0)
DEFAULT_TAUS = (0.01, 0.1, 1.0, 10.0, 100.0)


@dataclass(frozen=True)
class GridSpec:
    lambdas: tuple = DEFAULT_LAMBDAS
    taus: tuple = DEFAULT_TAUS
    k: int = 10
    n_epochs: int = 3
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "lambdas", tuple(float(v) for v in self.lambdas))
        object.__setattr__(self, "taus", tuple(float(v) for v in self.taus))
        if not self.lambdas or not self.taus:
            raise ConfigError("lambda and tau grids must be non-empty")
        if any(v < 0 for v in self.lambdas) or any(v < 0 for v in self.taus):
            raise ConfigError("grid values must be non-negative")
        if self.k < 2:
            raise ConfigError(f"k must be >= 2, got {self.k}")
        if self.n_epochs < 1:
            raise ConfigError(f"n_epochs must be >= 1, got {self.n_epochs}")


def kfold_split(n: int, k: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Disjoint test folds covering 0..n-1 once, sizes differing by at most 1."""
    if k > n:
        raise DataError(f"cannot split {n} rows into {k} folds")
    if k < 2:
        raise DataError(f"k must be >= 2, got {k}")
    perm = np.random.default_rng(seed).permutation(n)
    folds = np.array_split(perm, k)
    splits = []
    for j in range(k):
        test = np.sort(folds[j])
        train = np.sort(np.concatenate([folds[i] for i in range(k) if i != j]))
        splits.append((train, test))
    return splits


def _fold_seed(seed: int, t: int) -> int:
    return (int(seed) * 1_000_003 + t * 7_919) % (2 ** 32)


def cv_score(
    stream_prefix: DataStream,
    hp: Hyperparams,
    k: int,
    seed: int,
    cfg: Optional[DescentConfig] = None,
    q: float = 0.01,
) -> float:
    """Pooled held-out rMSE of the sequential fit over the prefix epochs.

    Folds are drawn per epoch independently; each fold re-runs the whole
    sequential loop from epoch 1 on its training rows, predicting that
    epoch's held-out rows. An estimation failure scores +inf rather than
    raising, so one bad grid point cannot abort a search.
    """
    cfg = cfg or DescentConfig()
    epochs = stream_prefix.epochs
    splits = [kfold_split(ep.n, k, _fold_seed(seed, t)) for t, ep in enumerate(epochs)]
    sse = 0.0
    count = 0
    try:
        for j in range(k):
            state = None
            for t, ep in enumerate(epochs):
                train_idx, test_idx = splits[t][j]
                ep_std, scaler = standardize(EpochData(ep.X[train_idx], ep.y[train_idx], t))
                trans = StateTransition.identity(ep.p, q)
                if state is None:
                    state = initial_state(ep_std)
                state = irs_step(state, ep_std, trans, hp, cfg)
                yhat = scaler.transform(ep.X[test_idx]) @ state.theta + scaler.y_mean
                resid = ep.y[test_idx] - yhat
                sse += float(resid @ resid)
                count += test_idx.shape[0]
    except NumericalError:
        return math.inf
    return math.sqrt(sse / count)


def grid_search(
    stream_prefix: DataStream,
    grid: GridSpec,
    cfg: Optional[DescentConfig] = None,
    q: float = 0.01,
) -> tuple[Hyperparams, list[tuple[float, float, float]]]:
    """Evaluate every (lam, tau) grid point; ties prefer larger lam, then
    larger tau (the sparser, more regularized model). Returns the winner and
    the full (lam, tau, rmse) table in grid order."""
    min_n = min(ep.n for ep in stream_prefix.epochs)
    if grid.k > min_n:
        raise ConfigError(f"k={grid.k} exceeds the smallest epoch size {min_n}")
    table: list[tuple[float, float, float]] = []
    best: Optional[tuple[float, float, float]] = None
    for lam in grid.lambdas:
        for tau in grid.taus:
            score = cv_score(stream_prefix, Hyperparams(lam, tau), grid.k, grid.seed, cfg, q)
            table.append((lam, tau, score))
            if math.isinf(score):
                continue
            if (
                best is None
                or score < best[2]
                or (score == best[2] and (lam, tau) > (best[0], best[1]))
            ):
                best = (lam, tau, score)
    if best is None:
        raise NumericalError("no feasible hyperparameters")
    return Hyperparams(best[0], best[1]), table
