"""Accuracy/MAPE/RMSE metrics and the hisa-vs-dlpm comparison protocol.

Accuracy is defined as 100 - MAPE over the test split. Every comparison
trains both feature modes with an identical seed and hyperparameters apart
from the feature set and epoch count, so the reported gap isolates what
the sentiment features add.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from datetime import date
from typing import Callable, Sequence

import numpy as np

from .errors import EmptyInput, LengthMismatch, ZeroActual
from .features import fuse, impute_for_split, invert_target, make_windows, scale_dataset
from .lstm import Checkpoint, TrainConfig, predict, train
from .market_data import BarSeries, Tweet, align_to_trading_days
from .sentiment import DailySentiment, Lexicon, aggregate_daily, score_corpus


def mape(actual: Sequence[float], predicted: Sequence[float]) -> float:
    """Mean absolute percentage error: 100 * mean(|a - p| / |a|)."""
    a, p = _paired(actual, predicted)
    if np.any(a == 0.0):
        raise ZeroActual("actual series contains a zero; MAPE is undefined")
    return float(100.0 * np.mean(np.abs(a - p) / np.abs(a)))


def accuracy(actual: Sequence[float], predicted: Sequence[float]) -> float:
    """100 - MAPE, the regression accuracy used throughout reporting."""
    return 100.0 - mape(actual, predicted)


def rmse(actual: Sequence[float], predicted: Sequence[float]) -> float:
    a, p = _paired(actual, predicted)
    return float(np.sqrt(np.mean((a - p) ** 2)))


def _paired(actual, predicted) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(actual, dtype=np.float64)
    p = np.asarray(predicted, dtype=np.float64)
    if a.shape != p.shape or a.ndim != 1:
        raise LengthMismatch(f"series shapes differ: {a.shape} vs {p.shape}")
    if a.size == 0:
        raise EmptyInput("metric requires at least one point")
    return a, p


@dataclass(frozen=True)
class VariantRecord:
    """Metrics and plot series for one (feature mode, epoch count) run."""

    variant: str
    epochs: int
    accuracy_pct: float
    mape_pct: float
    rmse: float
    dates: tuple[date, ...]
    real: tuple[float, ...]
    predicted: tuple[float, ...]

    def __post_init__(self):
        if not (len(self.dates) == len(self.real) == len(self.predicted)):
            raise LengthMismatch("dates/real/predicted lengths differ")


@dataclass(frozen=True)
class EvalReport:
    """All variant-epoch records plus per-variant average accuracy."""

    records: tuple[VariantRecord, ...]
    averages: tuple[tuple[str, float], ...]

    @classmethod
    def from_records(cls, records: Sequence[VariantRecord]) -> "EvalReport":
        """Build a report, computing each variant's arithmetic mean accuracy."""
        variants = []
        for rec in records:
            if rec.variant not in variants:
                variants.append(rec.variant)
        averages = []
        for variant in variants:
            accs = [r.accuracy_pct for r in records if r.variant == variant]
            averages.append((variant, sum(accs) / len(accs)))
        return cls(records=tuple(records), averages=tuple(averages))

    def average_for(self, variant: str) -> float:
        for name, value in self.averages:
            if name == variant:
                return value
        raise KeyError(variant)


def run_comparison(
    historical: BarSeries,
    sentiment: Sequence[Tweet],
    lexicon: Lexicon,
    epoch_sizes: Sequence[int],
    base_config: TrainConfig,
    lookback: int = 30,
    split_fraction: float = 0.75,
    target_field: str = "close",
    checkpoint_sink: Callable[[str, int, Checkpoint], None] | None = None,
) -> EvalReport:
    """Train and score both feature modes at every epoch size.

    Each run shares the seed, hidden size, lookback, and split; only the
    feature set and epoch count differ. Records come out epoch-major with
    the historical-only baseline first, mirroring the reporting table.
    ``checkpoint_sink`` (variant, epochs, checkpoint) is invoked after each
    training run so callers can persist the trained models.
    """
    if not epoch_sizes:
        raise ValueError("epoch_sizes must not be empty")

    series = impute_for_split(historical, split_fraction)
    daily = _daily_sentiment(sentiment, series, lexicon)

    records = []
    for epochs in epoch_sizes:
        for variant in ("dlpm", "hisa"):
            dataset = fuse(
                series,
                daily,
                mode=variant,
                target_field=target_field,
                split_fraction=split_fraction,
            )
            scaled = scale_dataset(dataset)
            train_windows, test_windows = make_windows(scaled, lookback)
            config = replace(base_config, epochs=epochs)
            checkpoint = train(train_windows, config, scaler=scaled.scaler, feature_mode=variant)
            if checkpoint_sink is not None:
                checkpoint_sink(variant, epochs, checkpoint)
            predicted = predict(checkpoint, test_windows)
            real = invert_target(test_windows.labels, scaled.scaler)
            m = mape(real, predicted)
            records.append(
                VariantRecord(
                    variant=variant,
                    epochs=epochs,
                    accuracy_pct=100.0 - m,
                    mape_pct=m,
                    rmse=rmse(real, predicted),
                    dates=dataset.dates[dataset.split_index:],
                    real=tuple(real.tolist()),
                    predicted=tuple(predicted.tolist()),
                )
            )
    return EvalReport.from_records(records)


def _daily_sentiment(
    tweets: Sequence[Tweet], series: BarSeries, lexicon: Lexicon
) -> list[DailySentiment]:
    buckets, _ = align_to_trading_days(tweets, series.dates())
    return aggregate_daily(score_corpus(buckets, lexicon))


def render_table(report: EvalReport) -> str:
    """Plain-text comparison table: epoch sizes x models plus averages."""
    rows = [("Epoch size", "Model", "Accuracy")]
    seen = []
    for rec in report.records:
        if rec.epochs not in seen:
            seen.append(rec.epochs)
    for epochs in seen:
        for rec in report.records:
            if rec.epochs == epochs:
                rows.append((str(epochs), rec.variant, f"{rec.accuracy_pct:.2f}%"))
    for variant, avg in report.averages:
        rows.append(("Average", variant, f"{avg:.2f}%"))

    widths = [max(len(r[c]) for r in rows) for c in range(3)]
    lines = []
    for idx, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[c]) for c, cell in enumerate(row)).rstrip())
        if idx == 0:
            lines.append("  ".join("-" * widths[c] for c in range(3)))
    return "\n".join(lines) + "\n"


def report_to_json(report: EvalReport) -> str:
    doc = {
        "version": 1,
        "records": [
            {
                "variant": r.variant,
                "epochs": r.epochs,
                "accuracy_pct": r.accuracy_pct,
                "mape_pct": r.mape_pct,
                "rmse": r.rmse,
                "dates": [d.isoformat() for d in r.dates],
                "real": list(r.real),
                "predicted": list(r.predicted),
            }
            for r in report.records
        ],
        "averages": {variant: value for variant, value in report.averages},
    }
    return json.dumps(doc, sort_keys=True, indent=2)


def report_from_json(text: str) -> EvalReport:
    doc = json.loads(text)
    if doc.get("version") != 1:
        raise ValueError(f"unsupported report version {doc.get('version')!r}")
    records = tuple(
        VariantRecord(
            variant=r["variant"],
            epochs=r["epochs"],
            accuracy_pct=r["accuracy_pct"],
            mape_pct=r["mape_pct"],
            rmse=r["rmse"],
            dates=tuple(date.fromisoformat(d) for d in r["dates"]),
            real=tuple(r["real"]),
            predicted=tuple(r["predicted"]),
        )
        for r in doc["records"]
    )
    averages = tuple((v, doc["averages"][v]) for v in doc["averages"])
    return EvalReport(records=records, averages=averages)


def record_plot_csv(record: VariantRecord) -> str:
    """Plot-ready CSV (date, real, predicted) for one variant-epoch run."""
    lines = ["date,real,predicted"]
    for d, r, p in zip(record.dates, record.real, record.predicted):
        lines.append(f"{d.isoformat()},{r!r},{p!r}")
    return "\n".join(lines) + "\n"
