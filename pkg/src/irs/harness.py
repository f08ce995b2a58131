"""Experiment runner: metrics, sequential cross-validated fitting of each
method over a stream, result tables, and JSON model-state checkpoints.

Protocol per seed: obtain the stream, pick (lam, tau) on a short prefix when
a grid is given, then fit every requested method sequentially with per-epoch
k-fold train/test splits and record held-out errors. All sequential state
lives in each epoch's standardized coordinates; held-out rows are mapped
through the training scaler before prediction.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .baselines import kalman_step, kalman_step_fast, local_adaptive_lasso
from .core import (
    ConfigError,
    DataError,
    EpochData,
    Hyperparams,
    ModelState,
    NoiseSpec,
    NumericalError,
    StateTransition,
    standardize,
)
from .estimator import (
    DescentConfig,
    initial_state,
    innovation_noise_scale,
    irs_step,
    predict_state,
)
from .simgen import DataStream, Exp2Config, gen_exp1, gen_exp2, load_stream
from .tuning import GridSpec, _fold_seed, grid_search, kfold_split

METHODS = ("irs", "kalman", "kalman-fast", "lasso-local")
METRICS = ("rmse", "mape")


def rmse(y, yhat) -> float:
    """Root mean squared error."""
    y = np.asarray(y, dtype=float)
    yhat = np.asarray(yhat, dtype=float)
    if y.shape != yhat.shape or y.ndim != 1 or y.size < 1:
        raise DataError(f"rmse needs equal-length vectors, got {y.shape} and {yhat.shape}")
    return float(np.sqrt(np.mean((y - yhat) ** 2)))


def mape(y, yhat, eps: float = 1e-12) -> tuple[float, int]:
    """Mean absolute percentage error as a fraction, plus the count of
    responses skipped for being (numerically) zero."""
    y = np.asarray(y, dtype=float)
    yhat = np.asarray(yhat, dtype=float)
    if y.shape != yhat.shape or y.ndim != 1:
        raise DataError(f"mape needs equal-length vectors, got {y.shape} and {yhat.shape}")
    keep = np.abs(y) > eps
    skipped = int(np.sum(~keep))
    if not np.any(keep):
        raise DataError("MAPE undefined: all responses are zero")
    value = float(np.mean(np.abs(y[keep] - yhat[keep]) / np.abs(y[keep])))
    return value, skipped


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StateSpec:
    """Modeling assumption for the state evolution: F = f I, Q = q^2 I."""

    f: float = 1.0
    q: float = 0.01

    def transition(self, p: int) -> StateTransition:
        return StateTransition(self.f * np.eye(p), (self.q ** 2) * np.eye(p))


@dataclass(frozen=True)
class ExperimentConfig:
    methods: tuple = ("irs",)
    stream: dict = field(default_factory=dict)
    seeds: tuple = (0,)
    folds: int = 10
    metrics: tuple = ("rmse",)
    hyperparams: Optional[Hyperparams] = None
    grid: Optional[GridSpec] = None
    state: StateSpec = StateSpec()
    descent: DescentConfig = DescentConfig()
    out_dir: Optional[str] = None

    def __post_init__(self):
        methods = tuple(self.methods)
        if not methods:
            raise ConfigError("at least one method is required")
        for m in methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}; choose from {METHODS}")
        seeds = tuple(int(s) for s in self.seeds)
        if not seeds:
            raise ConfigError("at least one seed is required")
        metrics = tuple(self.metrics)
        for m in metrics:
            if m not in METRICS:
                raise ConfigError(f"unknown metric {m!r}; choose from {METRICS}")
        if self.folds < 2:
            raise ConfigError(f"folds must be >= 2, got {self.folds}")
        if self.hyperparams is None and self.grid is None:
            raise ConfigError("either fixed hyperparams or a grid is required")
        kind = self.stream.get("kind")
        if kind not in ("exp1", "exp2", "csv"):
            raise ConfigError("stream.kind must be one of 'exp1', 'exp2', 'csv'")
        object.__setattr__(self, "methods", methods)
        object.__setattr__(self, "seeds", seeds)
        object.__setattr__(self, "metrics", metrics)
        object.__setattr__(self, "stream", dict(self.stream))

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        try:
            hp = d.get("hyperparams")
            grid = d.get("grid")
            return cls(
                methods=tuple(d.get("methods", ("irs",))),
                stream=dict(d.get("stream", {})),
                seeds=tuple(d.get("seeds", (0,))),
                folds=int(d.get("folds", 10)),
                metrics=tuple(d.get("metrics", ("rmse",))),
                hyperparams=None
                if hp is None
                else Hyperparams(float(hp["lambda"]), float(hp["tau"])),
                grid=None
                if grid is None
                else GridSpec(
                    lambdas=tuple(grid.get("lambdas", GridSpec().lambdas)),
                    taus=tuple(grid.get("taus", GridSpec().taus)),
                    k=int(grid.get("k", 10)),
                    n_epochs=int(grid.get("n_epochs", 3)),
                    seed=int(grid.get("seed", 0)),
                ),
                state=StateSpec(
                    f=float(d.get("state", {}).get("f", 1.0)),
                    q=float(d.get("state", {}).get("q", 0.01)),
                ),
                descent=DescentConfig(
                    max_iters=int(d.get("descent", {}).get("max_iters", 500)),
                    step0=float(d.get("descent", {}).get("step0", 1.0)),
                    step_rule=str(
                        d.get("descent", {}).get("step_rule", "halving-on-increase")
                    ),
                    tol=float(d.get("descent", {}).get("tol", 1e-8)),
                    adapt_floor=float(d.get("descent", {}).get("adapt_floor", 1e-10)),
                ),
                out_dir=d.get("out_dir"),
            )
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"bad experiment config: {exc}") from None

    @classmethod
    def from_json_file(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                return cls.from_dict(json.load(fh))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None


# ---------------------------------------------------------------------------
# report table
# ---------------------------------------------------------------------------

_CSV_HEADER = ["method", "epoch", "seed", "metric", "value", "status"]


@dataclass(frozen=True)
class ReportRow:
    method: str
    epoch: int
    seed: str
    metric: str
    value: Optional[float]
    status: str = "ok"


@dataclass
class ReportTable:
    rows: list

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(_CSV_HEADER)
            for r in self.rows:
                value = "" if r.value is None else repr(float(r.value))
                writer.writerow([r.method, r.epoch, r.seed, r.metric, value, r.status])

    @classmethod
    def from_csv(cls, path) -> "ReportTable":
        rows = []
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            for rec in reader:
                value = None if rec["value"] == "" else float(rec["value"])
                rows.append(
                    ReportRow(
                        rec["method"],
                        int(rec["epoch"]),
                        rec["seed"],
                        rec["metric"],
                        value,
                        rec["status"],
                    )
                )
        return cls(rows)


def write_score_table(path, table) -> None:
    """Serialize grid-search results as CSV with columns lambda, tau, rmse."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["lambda", "tau", "rmse"])
        for lam, tau, score in table:
            writer.writerow([repr(float(lam)), repr(float(tau)), repr(float(score))])


def save_state(path, state: ModelState) -> None:
    payload = {
        "theta": [float(v) for v in state.theta],
        "sigma": [float(v) for v in state.sigma.ravel()],
        "w2": float(state.w2),
        "t": int(state.t),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")


def load_state(path) -> ModelState:
    with open(path) as fh:
        payload = json.load(fh)
    theta = np.asarray(payload["theta"], dtype=float)
    p = theta.shape[0]
    sigma = np.asarray(payload["sigma"], dtype=float).reshape(p, p)
    return ModelState(theta, sigma, payload["w2"], payload["t"])


# ---------------------------------------------------------------------------
# sequential fitting
# ---------------------------------------------------------------------------


def _fit_epoch(method, state, ep_std, trans, hp, cfg):
    """Advance one method by one standardized epoch; returns (state, theta)."""
    if method == "lasso-local":
        return None, local_adaptive_lasso(ep_std, hp.lam, cfg)
    if state is None:
        state = initial_state(ep_std)
    if method == "irs":
        state = irs_step(state, ep_std, trans, hp, cfg)
    else:
        pred = predict_state(state, trans)
        noise = NoiseSpec.iid(innovation_noise_scale(ep_std, pred))
        if method == "kalman":
            state = kalman_step(state, ep_std, trans, noise, 1.0)
        elif method == "kalman-fast":
            state = kalman_step_fast(state, ep_std, trans, noise)
        else:
            raise ConfigError(f"unknown method {method!r}")
    return state, state.theta


def _sequential_cv(stream, method, hp, cfg, state_spec, k, seed, metrics):
    """Per-epoch held-out metrics pooled over k folds for one method/seed.

    A failure inside a fold abandons that fold from the failing epoch on;
    epochs left with no successful fold report None (a failed row).
    """
    T = stream.T
    splits = [kfold_split(ep.n, k, _fold_seed(seed, t)) for t, ep in enumerate(stream.epochs)]
    sse = np.zeros(T)
    count = np.zeros(T, dtype=int)
    ape = np.zeros(T)
    ape_n = np.zeros(T, dtype=int)
    for j in range(k):
        state = None
        try:
            for t, ep in enumerate(stream.epochs):
                train_idx, test_idx = splits[t][j]
                ep_std, scaler = standardize(EpochData(ep.X[train_idx], ep.y[train_idx], t))
                trans = state_spec.transition(ep.p)
                state, theta = _fit_epoch(method, state, ep_std, trans, hp, cfg)
                yhat = scaler.transform(ep.X[test_idx]) @ theta + scaler.y_mean
                y_te = ep.y[test_idx]
                sse[t] += float((y_te - yhat) @ (y_te - yhat))
                count[t] += test_idx.shape[0]
                if "mape" in metrics:
                    keep = np.abs(y_te) > 1e-12
                    ape[t] += float(
                        np.sum(np.abs(y_te[keep] - yhat[keep]) / np.abs(y_te[keep]))
                    )
                    ape_n[t] += int(np.sum(keep))
        except NumericalError:
            continue
    def _finite_or_none(value):
        return value if value is not None and math.isfinite(value) else None

    out = {}
    for t in range(T):
        epoch_metrics = {}
        epoch_metrics["rmse"] = _finite_or_none(
            math.sqrt(sse[t] / count[t]) if count[t] else None
        )
        if "mape" in metrics:
            epoch_metrics["mape"] = _finite_or_none(
                ape[t] / ape_n[t] if ape_n[t] else None
            )
        out[t] = epoch_metrics
    return out


def _fit_full(stream, method, hp, cfg, state_spec):
    """Sequential fit on full epochs (no folds); returns the final state."""
    state = None
    for t, ep in enumerate(stream.epochs):
        ep_std, _ = standardize(ep)
        trans = state_spec.transition(ep.p)
        state, _ = _fit_epoch(method, state, ep_std, trans, hp, cfg)
    return state


def _obtain_stream(cfg: ExperimentConfig, seed: int) -> DataStream:
    src = cfg.stream
    kind = src["kind"]
    if kind == "exp1":
        return gen_exp1(int(src["p"]), int(src["T"]), seed)
    if kind == "exp2":
        exp2 = src.get("exp2", {})
        return gen_exp2(int(src["p"]), int(src["T"]), seed, Exp2Config(**exp2))
    return load_stream(src["path"])


def run_experiment(cfg: ExperimentConfig) -> ReportTable:
    """Run the configured methods over the configured stream(s).

    Writes report.csv, plotdata.csv (epoch vs mean/std per method), the
    per-seed score table when tuning, and final-state checkpoints for the
    sequential methods. Deterministic given (config, seeds).
    """
    out_dir = Path(cfg.out_dir) if cfg.out_dir else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "checkpoints").mkdir(exist_ok=True)
    rows: list[ReportRow] = []
    for seed in cfg.seeds:
        stream = _obtain_stream(cfg, seed)
        if cfg.hyperparams is not None:
            hp = cfg.hyperparams
        else:
            hp, table = grid_search(
                stream.prefix(cfg.grid.n_epochs), cfg.grid, cfg.descent, cfg.state.q
            )
            if out_dir:
                write_score_table(out_dir / f"scores_seed{seed}.csv", table)
        for method in cfg.methods:
            per_epoch = _sequential_cv(
                stream, method, hp, cfg.descent, cfg.state, cfg.folds, seed, cfg.metrics
            )
            for t in range(stream.T):
                for metric in cfg.metrics:
                    value = per_epoch[t].get(metric)
                    status = "ok" if value is not None else "failed"
                    rows.append(ReportRow(method, t, str(seed), metric, value, status))
            if method != "lasso-local" and out_dir:
                try:
                    final = _fit_full(stream, method, hp, cfg.descent, cfg.state)
                    save_state(out_dir / "checkpoints" / f"{method}_seed{seed}.json", final)
                except NumericalError:
                    pass
    ok_by_key: dict = {}
    for r in rows:
        if r.status == "ok":
            ok_by_key.setdefault((r.method, r.epoch, r.metric), []).append(r.value)
    agg_rows = []
    for method in cfg.methods:
        for t in range(max((r.epoch for r in rows), default=-1) + 1):
            for metric in cfg.metrics:
                vals = ok_by_key.get((method, t, metric))
                if not vals:
                    continue
                agg_rows.append(
                    ReportRow(method, t, "mean", metric, float(np.mean(vals)))
                )
                agg_rows.append(
                    ReportRow(method, t, "std", metric, float(np.std(vals)))
                )
    report = ReportTable(rows + agg_rows)
    if not any(r.status == "ok" for r in rows):
        raise NumericalError("all methods failed on all epochs")
    if out_dir:
        report.to_csv(out_dir / "report.csv")
        _write_plotdata(out_dir / "plotdata.csv", agg_rows, cfg)
    return report


def _write_plotdata(path, agg_rows, cfg: ExperimentConfig) -> None:
    means = {
        (r.method, r.epoch, r.metric): r.value for r in agg_rows if r.seed == "mean"
    }
    stds = {(r.method, r.epoch, r.metric): r.value for r in agg_rows if r.seed == "std"}
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["epoch", "method", "metric", "mean", "std"])
        epochs = sorted({k[1] for k in means})
        for t in epochs:
            for method in cfg.methods:
                for metric in cfg.metrics:
                    key = (method, t, metric)
                    if key in means:
                        writer.writerow(
                            [t, method, metric, repr(means[key]), repr(stds[key])]
                        )
