"""Imputation, min-max scaling, feature fusion, and window construction.

Two feature modes exist:

  * ``hisa``: open price plus daily positive and negative tweet percentages
    (3 columns).
  * ``dlpm``: open, high, low, close prices only (4 columns); sentiment
    input is ignored entirely.

Both modes share the same next-day target so a comparison between them
isolates the feature set. Scaling statistics are always fitted on the
training rows alone; test rows may legitimately land outside [0, 1].
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from datetime import date
from typing import Sequence

import numpy as np

from .errors import (
    AllMissingColumn,
    DegenerateRange,
    MissingSentimentDate,
    ShapeMismatch,
    TooFewRows,
)
from .market_data import BarSeries, NUMERIC_FIELDS
from .sentiment import DailySentiment

FEATURE_MODES = ("hisa", "dlpm")
HISA_FEATURES = ("open", "pos_pct", "neg_pct")
DLPM_FEATURES = ("open", "high", "low", "close")
TARGET_COLUMN = "target"


@dataclass(frozen=True)
class ScalerParams:
    """Per-column min/max fitted on training rows only."""

    feature_names: tuple[str, ...]
    mins: tuple[float, ...]
    maxs: tuple[float, ...]

    def __post_init__(self):
        if not (len(self.feature_names) == len(self.mins) == len(self.maxs)):
            raise ShapeMismatch("scaler name/min/max lengths differ")
        for name, lo, hi in zip(self.feature_names, self.mins, self.maxs):
            if not hi > lo:
                raise DegenerateRange(f"column {name!r} has max {hi} <= min {lo}")


@dataclass(frozen=True)
class FusedDataset:
    """Aligned per-trading-day feature rows plus next-day targets.

    ``scaler`` is None while the dataset still holds raw currency values;
    :func:`scale_dataset` returns the normalized twin with the fitted
    scaler attached. ``dates[t]`` is the as-of date of feature row t and
    ``targets[t]`` is the target field one trading day later.
    """

    dates: tuple[date, ...]
    feature_names: tuple[str, ...]
    features: np.ndarray
    targets: np.ndarray
    feature_mode: str
    target_field: str
    split_index: int
    scaler: ScalerParams | None = None

    def __post_init__(self):
        rows = len(self.dates)
        if self.features.shape != (rows, len(self.feature_names)):
            raise ShapeMismatch(
                f"features shape {self.features.shape} does not match "
                f"{rows} dates x {len(self.feature_names)} columns"
            )
        if self.targets.shape != (rows,):
            raise ShapeMismatch(f"targets shape {self.targets.shape} != ({rows},)")
        if not 0 < self.split_index < rows:
            raise TooFewRows(f"split_index {self.split_index} does not partition {rows} rows")
        expected = HISA_FEATURES if self.feature_mode == "hisa" else DLPM_FEATURES
        if self.feature_mode not in FEATURE_MODES:
            raise ValueError(f"unknown feature_mode {self.feature_mode!r}")
        if self.feature_names != expected:
            raise ShapeMismatch(f"{self.feature_mode} mode requires columns {expected}")

    @property
    def n_rows(self) -> int:
        return len(self.dates)


@dataclass(frozen=True)
class WindowedDataset:
    """Supervised sequences: (samples, lookback, features) plus labels."""

    sequences: np.ndarray
    labels: np.ndarray
    lookback: int

    def __post_init__(self):
        if self.sequences.ndim != 3 or self.sequences.shape[1] != self.lookback:
            raise ShapeMismatch(f"sequences shape {self.sequences.shape} inconsistent with lookback {self.lookback}")
        if self.labels.shape != (self.sequences.shape[0],):
            raise ShapeMismatch("one label per sequence required")

    def __len__(self) -> int:
        return self.sequences.shape[0]


def impute_mean(series: BarSeries, train_end: date) -> BarSeries:
    """Fill missing numeric cells with each field's training-range mean.

    The training range is every bar dated on or before ``train_end``; means
    never see test rows. Present values are left untouched.
    """
    train_bars = [b for b in series.bars if b.date <= train_end]
    means: dict[str, float] = {}
    for field in NUMERIC_FIELDS:
        present = [getattr(b, field) for b in train_bars if getattr(b, field) is not None]
        if not present:
            raise AllMissingColumn(
                f"field {field!r} has no present value in the training range ending {train_end}"
            )
        means[field] = sum(present) / len(present)

    filled = []
    for bar in series.bars:
        updates = {
            field: means[field]
            for field in NUMERIC_FIELDS
            if getattr(bar, field) is None
        }
        filled.append(replace(bar, **updates) if updates else bar)
    return BarSeries(symbol=series.symbol, bars=tuple(filled))


def impute_for_split(series: BarSeries, split_fraction: float) -> BarSeries:
    """Impute with the training range implied by the fuse split.

    fuse() will put the first floor(split_fraction * (bars - 1)) feature
    rows in the train side; imputation means must come from those bars
    only so no test information leaks backward.
    """
    rows = len(series.bars) - 1
    if rows < 2:
        return series
    split_index = math.floor(split_fraction * rows)
    split_index = max(1, min(split_index, rows - 1))
    return impute_mean(series, series.bars[split_index - 1].date)


def fit_scaler(
    features: np.ndarray,
    train_rows: int,
    feature_names: Sequence[str] | None = None,
) -> ScalerParams:
    """Column-wise min/max over the first ``train_rows`` rows only."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise ShapeMismatch(f"expected a 2-D matrix, got shape {features.shape}")
    if not 0 < train_rows <= features.shape[0]:
        raise TooFewRows(f"train_rows {train_rows} not in 1..{features.shape[0]}")
    names = tuple(feature_names) if feature_names is not None else tuple(
        f"f{i}" for i in range(features.shape[1])
    )
    train = features[:train_rows]
    return ScalerParams(
        feature_names=names,
        mins=tuple(train.min(axis=0).tolist()),
        maxs=tuple(train.max(axis=0).tolist()),
    )


def transform(features: np.ndarray, scaler: ScalerParams) -> np.ndarray:
    """x' = (x - min) / (max - min), columnwise. No clipping: test rows may
    fall outside [0, 1]."""
    features = np.asarray(features, dtype=np.float64)
    _check_columns(features, scaler)
    mins = np.array(scaler.mins)
    maxs = np.array(scaler.maxs)
    return (features - mins) / (maxs - mins)


def inverse_transform(features: np.ndarray, scaler: ScalerParams) -> np.ndarray:
    features = np.asarray(features, dtype=np.float64)
    _check_columns(features, scaler)
    mins = np.array(scaler.mins)
    maxs = np.array(scaler.maxs)
    return features * (maxs - mins) + mins


def _check_columns(features: np.ndarray, scaler: ScalerParams) -> None:
    if features.ndim != 2 or features.shape[1] != len(scaler.feature_names):
        raise ShapeMismatch(
            f"matrix shape {features.shape} does not match scaler with "
            f"{len(scaler.feature_names)} columns"
        )


def fuse(
    series: BarSeries,
    sentiment: Sequence[DailySentiment],
    mode: str = "hisa",
    target_field: str = "close",
    split_fraction: float = 0.75,
) -> FusedDataset:
    """Merge bars (and, in hisa mode, daily sentiment) into feature rows.

    Row t carries date t's features; its target is ``target_field`` at date
    t+1, so the final bar contributes only a target. The chronological
    split lands at floor(split_fraction * rows). Raw currency values are
    kept; call :func:`scale_dataset` before windowing for training.
    """
    if mode not in FEATURE_MODES:
        raise ValueError(f"unknown feature mode {mode!r}")
    if not 0.0 < split_fraction < 1.0:
        raise ValueError(f"split_fraction must lie strictly between 0 and 1, got {split_fraction}")
    if target_field not in NUMERIC_FIELDS:
        raise ValueError(f"unknown target field {target_field!r}")

    bars = series.bars
    rows = len(bars) - 1
    if rows < 2:
        raise TooFewRows(f"{len(bars)} bars yield {max(rows, 0)} rows; need at least 2")

    name_cols = HISA_FEATURES if mode == "hisa" else DLPM_FEATURES
    price_cols = [c for c in name_cols if c in NUMERIC_FIELDS]

    by_date: dict[date, DailySentiment] = {s.date: s for s in sentiment}
    matrix = np.empty((rows, len(name_cols)), dtype=np.float64)
    targets = np.empty(rows, dtype=np.float64)
    for t in range(rows):
        bar = bars[t]
        for field in price_cols:
            if getattr(bar, field) is None:
                raise ValueError(
                    f"{bar.date}: field {field!r} is missing; run impute_mean before fuse"
                )
        if getattr(bars[t + 1], target_field) is None:
            raise ValueError(
                f"{bars[t + 1].date}: target field {target_field!r} is missing; "
                "run impute_mean before fuse"
            )
        if mode == "hisa":
            day = by_date.get(bar.date)
            if day is None:
                raise MissingSentimentDate(f"no sentiment record for trading date {bar.date}")
            matrix[t] = (bar.open, day.pos_pct, day.neg_pct)
        else:
            matrix[t] = tuple(getattr(bar, c) for c in DLPM_FEATURES)
        targets[t] = getattr(bars[t + 1], target_field)

    split_index = math.floor(split_fraction * rows)
    if split_index < 1 or split_index >= rows:
        raise TooFewRows(
            f"split_fraction {split_fraction} on {rows} rows leaves an empty train or test side"
        )
    return FusedDataset(
        dates=tuple(b.date for b in bars[:rows]),
        feature_names=tuple(name_cols),
        features=matrix,
        targets=targets,
        feature_mode=mode,
        target_field=target_field,
        split_index=split_index,
        scaler=None,
    )


def scale_dataset(dataset: FusedDataset) -> FusedDataset:
    """Fit min-max columns (features plus target) on train rows and apply.

    The target gets its own scaler column so model outputs invert back to
    currency units.
    """
    if dataset.scaler is not None:
        raise ValueError("dataset is already scaled")
    joint = np.column_stack([dataset.features, dataset.targets])
    scaler = fit_scaler(
        joint,
        dataset.split_index,
        feature_names=dataset.feature_names + (TARGET_COLUMN,),
    )
    scaled = transform(joint, scaler)
    return replace(
        dataset,
        features=scaled[:, :-1],
        targets=scaled[:, -1],
        scaler=scaler,
    )


def apply_scaler(dataset: FusedDataset, scaler: ScalerParams) -> FusedDataset:
    """Normalize a raw dataset with a previously fitted scaler (replay path)."""
    if dataset.scaler is not None:
        raise ValueError("dataset is already scaled")
    expected = dataset.feature_names + (TARGET_COLUMN,)
    if scaler.feature_names != expected:
        raise ShapeMismatch(
            f"scaler columns {scaler.feature_names} do not match dataset columns {expected}"
        )
    joint = np.column_stack([dataset.features, dataset.targets])
    scaled = transform(joint, scaler)
    return replace(dataset, features=scaled[:, :-1], targets=scaled[:, -1], scaler=scaler)


def invert_target(values: np.ndarray, scaler: ScalerParams) -> np.ndarray:
    """Map normalized target values back to currency units."""
    lo = scaler.mins[-1]
    hi = scaler.maxs[-1]
    return np.asarray(values, dtype=np.float64) * (hi - lo) + lo


def make_windows(dataset: FusedDataset, lookback: int) -> tuple[WindowedDataset, WindowedDataset]:
    """Cut the dataset into walk-forward training and test sequences.

    Window j covers feature rows [j, j+lookback) and is labeled with
    targets[j+lookback], the target row just past the window's end. Train
    labels stay strictly inside the train region; test windows may reach
    back into trailing train rows for history. Counts:
    train = split_index - lookback, test = rows - split_index.
    """
    if lookback < 1:
        raise ValueError(f"lookback must be positive, got {lookback}")
    rows = dataset.n_rows
    if rows < lookback + 2:
        raise TooFewRows(f"{rows} rows cannot support lookback {lookback} (need {lookback + 2})")
    if dataset.split_index - lookback < 1:
        raise TooFewRows(
            f"split_index {dataset.split_index} leaves no training window for lookback {lookback}"
        )

    n_samples = rows - lookback
    seqs = np.empty((n_samples, lookback, dataset.features.shape[1]), dtype=np.float64)
    labels = np.empty(n_samples, dtype=np.float64)
    for j in range(n_samples):
        seqs[j] = dataset.features[j:j + lookback]
        labels[j] = dataset.targets[j + lookback]

    n_train = dataset.split_index - lookback
    train = WindowedDataset(seqs[:n_train], labels[:n_train], lookback)
    test = WindowedDataset(seqs[n_train:], labels[n_train:], lookback)
    return train, test


# JSON persistence (versioned, field-named arrays) so runs are replayable.

def dataset_to_json(dataset: FusedDataset) -> str:
    doc = {
        "version": 1,
        "feature_mode": dataset.feature_mode,
        "target_field": dataset.target_field,
        "split_index": dataset.split_index,
        "dates": [d.isoformat() for d in dataset.dates],
        "feature_names": list(dataset.feature_names),
        "features": dataset.features.tolist(),
        "targets": dataset.targets.tolist(),
        "scaler": scaler_to_dict(dataset.scaler) if dataset.scaler else None,
    }
    return json.dumps(doc, sort_keys=True, indent=2)


def dataset_from_json(text: str) -> FusedDataset:
    doc = json.loads(text)
    if doc.get("version") != 1:
        raise ValueError(f"unsupported dataset document version {doc.get('version')!r}")
    return FusedDataset(
        dates=tuple(date.fromisoformat(d) for d in doc["dates"]),
        feature_names=tuple(doc["feature_names"]),
        features=np.array(doc["features"], dtype=np.float64),
        targets=np.array(doc["targets"], dtype=np.float64),
        feature_mode=doc["feature_mode"],
        target_field=doc["target_field"],
        split_index=doc["split_index"],
        scaler=scaler_from_dict(doc["scaler"]) if doc.get("scaler") else None,
    )


def scaler_to_dict(scaler: ScalerParams) -> dict:
    return {
        "feature_names": list(scaler.feature_names),
        "min": list(scaler.mins),
        "max": list(scaler.maxs),
    }


def scaler_from_dict(doc: dict) -> ScalerParams:
    return ScalerParams(
        feature_names=tuple(doc["feature_names"]),
        mins=tuple(float(x) for x in doc["min"]),
        maxs=tuple(float(x) for x in doc["max"]),
    )
