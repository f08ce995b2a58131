"""Synthetic stream generators with ground-truth parameter paths.

Two protocols: a fixed-support random-walk benchmark (sparsity 0.2, walk
variance 1, sample sizes in [1.8p, 2.1p]) and an evolving-support variant
where coordinates activate, deactivate, and drift, optionally with sample
sizes shrinking across epochs. Streams round-trip through CSV bundles.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import ConfigError, DataError, EpochData

DRIFT_MODES = ("random-walk", "directional")


@dataclass(frozen=True)
class Exp2Config:
    """Evolution rules for the changing-support protocol."""

    activation_prob: float = 0.05
    deactivation_threshold: float = 0.1
    deactivation_prob: float = 0.1
    drift_mode: str = "random-walk"
    noise_sd: float = 1.0
    shrink_samples: bool = True

    def __post_init__(self):
        for name in ("activation_prob", "deactivation_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {v}")
        if self.deactivation_threshold < 0:
            raise ConfigError("deactivation_threshold must be >= 0")
        if self.drift_mode not in DRIFT_MODES:
            raise ConfigError(f"drift_mode must be one of {DRIFT_MODES}")
        if self.noise_sd <= 0:
            raise ConfigError("noise_sd must be > 0")


@dataclass(frozen=True)
class DataStream:
    """Ordered epochs, optional true parameter paths, and a config echo."""

    epochs: tuple
    truth: Optional[tuple] = None
    meta: Optional[dict] = None

    def __post_init__(self):
        epochs = tuple(self.epochs)
        if not epochs:
            raise DataError("stream must contain at least one epoch")
        truth = None if self.truth is None else tuple(np.asarray(v, float) for v in self.truth)
        if truth is not None:
            if len(truth) != len(epochs):
                raise DataError("truth length differs from number of epochs")
            for th, ep in zip(truth, epochs):
                if th.shape[0] != ep.p:
                    raise DataError("truth vector dimension differs from epoch p")
        object.__setattr__(self, "epochs", epochs)
        object.__setattr__(self, "truth", truth)
        object.__setattr__(self, "meta", dict(self.meta or {}))

    @property
    def T(self) -> int:
        return len(self.epochs)

    @property
    def p(self) -> int:
        return self.epochs[0].p

    def prefix(self, n_epochs: int) -> "DataStream":
        n = min(n_epochs, self.T)
        truth = None if self.truth is None else self.truth[:n]
        return DataStream(self.epochs[:n], truth, self.meta)


def _init_theta(p: int, rng: np.random.Generator, init_corr: float) -> np.ndarray:
    """Dense normal draw, then keep the ceil(0.2 p) largest-magnitude entries."""
    if init_corr == 0.0:
        theta = rng.standard_normal(p)
    else:
        cov = (1.0 - init_corr) * np.eye(p) + init_corr * np.ones((p, p))
        theta = np.linalg.cholesky(cov) @ rng.standard_normal(p)
    k = math.ceil(0.2 * p)
    order = np.argsort(-np.abs(theta), kind="stable")
    mask = np.zeros(p, dtype=bool)
    mask[order[:k]] = True
    return np.where(mask, theta, 0.0)


def _default_n_range(p: int) -> tuple[int, int]:
    return math.ceil(1.8 * p), math.floor(2.1 * p)


def gen_exp1(
    p: int,
    T: int,
    seed: int,
    n_range: Optional[tuple[int, int]] = None,
    init_corr: float = 0.0,
) -> DataStream:
    """Fixed-support benchmark: active coordinates walk with variance 1,
    zeros stay zero (walking them would destroy the sparse premise)."""
    if p < 2 or T < 1:
        raise ConfigError(f"need p >= 2 and T >= 1, got p={p}, T={T}")
    rng = np.random.default_rng(seed)
    lo, hi = n_range if n_range is not None else _default_n_range(p)
    theta = _init_theta(p, rng, init_corr)
    active = theta != 0.0
    epochs, truth = [], []
    for t in range(T):
        if t > 0:
            theta = theta + np.where(active, rng.standard_normal(p), 0.0)
        n_t = int(rng.integers(lo, hi + 1))
        X = rng.standard_normal((n_t, p))
        y = X @ theta + rng.standard_normal(n_t)
        epochs.append(EpochData(X, y, t))
        truth.append(theta.copy())
    meta = {
        "generator": "exp1",
        "p": p,
        "T": T,
        "seed": int(seed),
        "n_range": [int(lo), int(hi)],
        "init_corr": float(init_corr),
    }
    return DataStream(tuple(epochs), tuple(truth), meta)


def evolve_theta_exp2(
    theta: np.ndarray, cfg: Exp2Config, rng: np.random.Generator
) -> np.ndarray:
    """One evolution step: zeros may activate (value redrawn from the initial
    standard-normal marginal), small nonzeros may deactivate, and surviving
    nonzeros drift (plain walk, or scaled by 1 + N(0, 0.1) directionally)
    with added N(0, noise_sd^2) noise."""
    theta = np.asarray(theta, dtype=float)
    p = theta.shape[0]
    was_zero = theta == 0.0
    # Draw every variate for every coordinate so the stream is reproducible
    # regardless of the activation pattern.
    u_act = rng.random(p)
    fresh = rng.standard_normal(p)
    u_deact = rng.random(p)
    factor = rng.standard_normal(p)
    walk = rng.standard_normal(p)

    activate = was_zero & (u_act < cfg.activation_prob)
    small = (~was_zero) & (np.abs(theta) < cfg.deactivation_threshold)
    deactivate = small & (u_deact < cfg.deactivation_prob)
    drifting = (~was_zero) & (~deactivate)

    out = theta.copy()
    out[activate] = fresh[activate]
    out[deactivate] = 0.0
    if cfg.drift_mode == "directional":
        scale = 1.0 + math.sqrt(0.1) * factor
        out[drifting] = theta[drifting] * scale[drifting] + cfg.noise_sd * walk[drifting]
    else:
        out[drifting] = theta[drifting] + cfg.noise_sd * walk[drifting]
    return out


def _shrink_schedule(p: int, T: int) -> list[int]:
    """Linear sample-size ramp from ceil(2.0 p) down to ceil(0.8 p)."""
    if T == 1:
        return [math.ceil(2.0 * p)]
    return [math.ceil(p * (2.0 - 1.2 * t / (T - 1))) for t in range(T)]


def gen_exp2(
    p: int,
    T: int,
    seed: int,
    cfg: Optional[Exp2Config] = None,
) -> DataStream:
    """Evolving-support benchmark; epoch 1 initialization matches gen_exp1."""
    if p < 2 or T < 1:
        raise ConfigError(f"need p >= 2 and T >= 1, got p={p}, T={T}")
    cfg = cfg or Exp2Config()
    rng = np.random.default_rng(seed)
    lo, hi = _default_n_range(p)
    sizes = _shrink_schedule(p, T) if cfg.shrink_samples else None
    theta = _init_theta(p, rng, 0.0)
    epochs, truth = [], []
    for t in range(T):
        if t > 0:
            theta = evolve_theta_exp2(theta, cfg, rng)
        n_t = sizes[t] if sizes is not None else int(rng.integers(lo, hi + 1))
        X = rng.standard_normal((n_t, p))
        y = X @ theta + rng.standard_normal(n_t)
        epochs.append(EpochData(X, y, t))
        truth.append(theta.copy())
    meta = {"generator": "exp2", "p": p, "T": T, "seed": int(seed), **asdict(cfg)}
    return DataStream(tuple(epochs), tuple(truth), meta)


# ---------------------------------------------------------------------------
# CSV bundle round-trip
# ---------------------------------------------------------------------------


def _fmt(v: float) -> str:
    return repr(float(v))


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def save_stream(stream: DataStream, out_dir) -> Path:
    """Write one CSV per epoch (columns x_1..x_p, y), the truth path when
    present, and a JSON manifest. Output bytes are deterministic."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    p = stream.p
    header = [f"x_{j + 1}" for j in range(p)] + ["y"]
    epoch_files = []
    for t, ep in enumerate(stream.epochs):
        name = f"epoch_{t:03d}.csv"
        _write_csv(out / name, header, np.column_stack([ep.X, ep.y]))
        epoch_files.append(name)
    truth_file = None
    if stream.truth is not None:
        truth_file = "truth.csv"
        _write_csv(out / truth_file, [f"theta_{j + 1}" for j in range(p)], stream.truth)
    manifest = {
        "p": p,
        "T": stream.T,
        "seed": stream.meta.get("seed"),
        "config": stream.meta,
        "epochs": epoch_files,
        "truth": truth_file,
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out / "manifest.json"


def load_stream(path) -> DataStream:
    """Read a bundle written by save_stream (path: bundle dir or manifest)."""
    path = Path(path)
    manifest_path = path / "manifest.json" if path.is_dir() else path
    if not manifest_path.exists():
        raise DataError(f"no manifest found at {manifest_path}")
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    base = manifest_path.parent
    epochs = []
    for t, name in enumerate(manifest["epochs"]):
        arr = np.genfromtxt(base / name, delimiter=",", skip_header=1, ndmin=2)
        epochs.append(EpochData(arr[:, :-1], arr[:, -1], t))
    truth = None
    if manifest.get("truth"):
        tr = np.genfromtxt(base / manifest["truth"], delimiter=",", skip_header=1, ndmin=2)
        truth = tuple(tr[t] for t in range(tr.shape[0]))
    return DataStream(tuple(epochs), truth, manifest.get("config") or {})
