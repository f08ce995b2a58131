"""Transaction-data ingestion and feature engineering.

Turns a raw transactions CSV (product, quantity, timestamp, unit price) into
monthly modeling epochs: price, product dummies, day-of-week and
quarter-of-day dummies, plus all pairwise interactions of the base columns.
The column inventory is fixed from the whole dataset, so every epoch has the
same width and categories absent in a month appear as zero columns.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from .core import DataError, EpochData
from .simgen import DataStream

# canonical field -> default CSV header
DEFAULT_COLUMN_MAP = {
    "product": "Description",
    "quantity": "Quantity",
    "timestamp": "InvoiceDate",
    "price": "UnitPrice",
}
REQUIRED_FIELDS = ("product", "quantity", "timestamp", "price")

# Quarter-of-day: four 6-hour bins starting at midnight.
QOD_HOURS = 6


@dataclass(frozen=True)
class FeatureSpec:
    numeric: tuple = ("price",)
    categorical: tuple = ("product",)
    response: str = "quantity"
    time_field: str = "timestamp"


def load_transactions(path, column_map: Optional[dict] = None) -> tuple[pd.DataFrame, int]:
    """Parse a transactions CSV into canonical columns.

    Rows with unparseable timestamps or non-numeric quantity/price are
    dropped; the drop count is returned alongside the records.
    """
    path = Path(path)
    cmap = dict(DEFAULT_COLUMN_MAP)
    cmap.update(column_map or {})
    try:
        raw = pd.read_csv(path)
    except pd.errors.EmptyDataError:
        raise DataError(f"empty transactions file: {path}") from None
    if raw.empty:
        raise DataError(f"empty transactions file: {path}")
    for field in REQUIRED_FIELDS:
        col = cmap[field]
        if col not in raw.columns:
            raise DataError(f"missing required column {col!r} (field {field!r})")
    frame = pd.DataFrame(
        {
            "product": raw[cmap["product"]].astype(str),
            "quantity": pd.to_numeric(raw[cmap["quantity"]], errors="coerce"),
            "timestamp": pd.to_datetime(raw[cmap["timestamp"]], errors="coerce"),
            "price": pd.to_numeric(raw[cmap["price"]], errors="coerce"),
        }
    )
    before = len(frame)
    frame = frame.dropna(subset=["quantity", "timestamp", "price"]).reset_index(drop=True)
    return frame, before - len(frame)


def _base_columns(frame: pd.DataFrame, spec: FeatureSpec) -> tuple[list[str], np.ndarray]:
    """Assemble the base design: numerics, full categorical dummies, and the
    date-derived dummies with one reference level dropped each."""
    names: list[str] = []
    cols: list[np.ndarray] = []
    for field in spec.numeric:
        names.append(field)
        cols.append(frame[field].to_numpy(dtype=float))
    for field in spec.categorical:
        levels = sorted(frame[field].astype(str).unique())
        values = frame[field].astype(str).to_numpy()
        for level in levels:
            names.append(f"{field}={level}")
            cols.append((values == level).astype(float))
    ts = frame[spec.time_field]
    dow = ts.dt.dayofweek.to_numpy()  # Monday = 0 is the dropped baseline
    for d in range(1, 7):
        names.append(f"dow={d}")
        cols.append((dow == d).astype(float))
    qod = (ts.dt.hour.to_numpy() // QOD_HOURS).astype(int)  # bin 0 dropped
    for q in range(1, 4):
        names.append(f"qod={q}")
        cols.append((qod == q).astype(float))
    return names, np.column_stack(cols)


def build_features(frame: pd.DataFrame, spec: Optional[FeatureSpec] = None) -> DataStream:
    """Build one EpochData per calendar month with a constant column set:
    base predictors plus all pairwise products of distinct base columns."""
    spec = spec or FeatureSpec()
    if frame is None or len(frame) == 0:
        raise DataError("no transaction records to build features from")
    for field in spec.numeric + spec.categorical + (spec.response, spec.time_field):
        if field not in frame.columns:
            raise DataError(f"feature spec references absent field {field!r}")
    base_names, base = _base_columns(frame, spec)
    pairs = list(combinations(range(len(base_names)), 2))
    inter_names = [f"{base_names[i]}*{base_names[j]}" for i, j in pairs]
    inter = np.empty((base.shape[0], len(pairs)))
    for c, (i, j) in enumerate(pairs):
        inter[:, c] = base[:, i] * base[:, j]
    X = np.hstack([base, inter])
    y = frame[spec.response].to_numpy(dtype=float)
    months = frame[spec.time_field].dt.to_period("M").astype(str).to_numpy()
    labels = sorted(set(months))
    epochs = []
    for t, label in enumerate(labels):
        rows = np.flatnonzero(months == label)
        epochs.append(EpochData(X[rows], y[rows], t))
    meta = {
        "source": "transactions",
        "columns": base_names + inter_names,
        "base_columns": base_names,
        "months": labels,
    }
    return DataStream(tuple(epochs), None, meta)
