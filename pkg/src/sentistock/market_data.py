"""Ingestion of daily OHLCV bars and raw tweet corpora.

Parses exchange CSV exports and JSONL tweet dumps into validated, immutable
records and aligns tweets onto the trading calendar. All transformations
here are pure; parsed values never change after construction.
"""

from __future__ import annotations

import csv
import io
import json
import math
from bisect import bisect_left
from dataclasses import dataclass, asdict
from datetime import date, datetime
from typing import BinaryIO, Iterable, Mapping, Sequence

from .errors import (
    DateParseError,
    DuplicateDate,
    EmptyInput,
    EmptyTradingCalendar,
    InvalidBar,
    MissingColumn,
)

PRICE_FIELDS = ("open", "high", "low", "close", "adj_close")
NUMERIC_FIELDS = PRICE_FIELDS + ("volume",)
OHLCV_FIELDS = ("date",) + NUMERIC_FIELDS

#: Column names used when the caller does not supply a schema map.
DEFAULT_SCHEMA: dict[str, str] = {
    "date": "Date",
    "open": "Open",
    "high": "High",
    "low": "Low",
    "close": "Close",
    "adj_close": "Adj Close",
    "volume": "Volume",
}


@dataclass(frozen=True)
class OhlcvBar:
    """One trading day's prices and volume; missing cells are None."""

    date: date
    open: float | None = None
    high: float | None = None
    low: float | None = None
    close: float | None = None
    adj_close: float | None = None
    volume: float | None = None

    def __post_init__(self):
        if not isinstance(self.date, date) or isinstance(self.date, datetime):
            raise TypeError(f"date must be a datetime.date, got {type(self.date).__name__}")
        if self.volume is not None and self.volume < 0:
            raise InvalidBar(f"{self.date}: negative volume {self.volume}")
        for name in NUMERIC_FIELDS:
            value = getattr(self, name)
            if value is not None and not math.isfinite(value):
                raise InvalidBar(f"{self.date}: non-finite {name} {value!r}")

    def violates_price_box(self) -> bool:
        """True when low/high do not bracket open/close (all four present)."""
        o, h, l, c = self.open, self.high, self.low, self.close
        if None in (o, h, l, c):
            return False
        return l > min(o, c) or h < max(o, c)


@dataclass(frozen=True)
class Tweet:
    """A single tweet; the timestamp retains whatever offset it was posted with."""

    timestamp: datetime
    text: str
    id: str

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("tweet text is empty after trimming")


@dataclass(frozen=True)
class BarSeries:
    """Bars for one symbol, strictly ascending by date with no duplicates."""

    symbol: str
    bars: tuple[OhlcvBar, ...]

    def __post_init__(self):
        for prev, cur in zip(self.bars, self.bars[1:]):
            if cur.date == prev.date:
                raise DuplicateDate(f"duplicate date {cur.date} in series {self.symbol!r}")
            if cur.date < prev.date:
                raise ValueError(f"bars out of order at {cur.date}")

    def dates(self) -> tuple[date, ...]:
        return tuple(b.date for b in self.bars)

    def column(self, field: str) -> list[float | None]:
        """Values of one numeric field across all bars, in date order."""
        if field not in NUMERIC_FIELDS:
            raise ValueError(f"unknown numeric field {field!r}")
        return [getattr(b, field) for b in self.bars]

    def __len__(self) -> int:
        return len(self.bars)


def parse_ohlcv_csv(
    stream: BinaryIO,
    schema_map: Mapping[str, str] | None = None,
    symbol: str = "",
) -> BarSeries:
    """Parse a UTF-8 OHLCV CSV export into a date-sorted BarSeries.

    `schema_map` maps each bar field (date, open, high, low, close,
    adj_close, volume) to its column name in the file. Unparseable numeric
    cells become missing values rather than errors, so the row count is
    preserved. Dates may be ISO-8601 or DD-MM-YYYY; the format is detected
    once per file, never per row.
    """
    schema = dict(DEFAULT_SCHEMA)
    if schema_map:
        schema.update(schema_map)
    missing = [f for f in OHLCV_FIELDS if f not in schema]
    if missing:
        raise MissingColumn(f"schema map lacks fields: {', '.join(missing)}")

    text = io.TextIOWrapper(stream, encoding="utf-8", newline="")
    reader = csv.DictReader(text)
    if reader.fieldnames is None:
        raise EmptyInput("CSV stream has no header row")
    header = [h.strip() for h in reader.fieldnames]
    for field in OHLCV_FIELDS:
        if schema[field] not in header:
            raise MissingColumn(f"column {schema[field]!r} (for {field}) not in header {header}")

    rows = [{k.strip(): (v if v is not None else "") for k, v in raw.items() if k is not None}
            for raw in reader]
    if not rows:
        raise EmptyInput("CSV contains a header but no data rows")

    dates = _parse_date_column([row.get(schema["date"], "") for row in rows])

    bars = []
    for row, d in zip(rows, dates):
        values: dict[str, float | None] = {}
        for field in NUMERIC_FIELDS:
            values[field] = _parse_numeric_cell(row.get(schema[field], ""))
        bar = OhlcvBar(date=d, **values)
        if bar.violates_price_box():
            raise InvalidBar(
                f"{d}: low/high do not bracket open/close "
                f"(o={bar.open} h={bar.high} l={bar.low} c={bar.close})"
            )
        bars.append(bar)

    bars.sort(key=lambda b: b.date)
    return BarSeries(symbol=symbol, bars=tuple(bars))


def _parse_numeric_cell(cell: str) -> float | None:
    # Exchange exports use thousands separators; strip those before parsing.
    cleaned = cell.strip().replace(",", "")
    if not cleaned:
        return None
    try:
        return float(cleaned)
    except ValueError:
        return None


def _parse_date_column(raw: Sequence[str]) -> list[date]:
    """Parse every date cell with one format chosen for the whole file."""
    for parser in (_parse_iso_date, _parse_ddmmyyyy):
        parsed = []
        for cell in raw:
            d = parser(cell.strip())
            if d is None:
                break
            parsed.append(d)
        else:
            return parsed
    bad = next((c for c in raw if _parse_iso_date(c.strip()) is None), raw[0])
    raise DateParseError(f"date cell {bad!r} is neither ISO-8601 nor DD-MM-YYYY")


def _parse_iso_date(cell: str):
    try:
        return date.fromisoformat(cell)
    except ValueError:
        return None


def _parse_ddmmyyyy(cell: str):
    try:
        return datetime.strptime(cell, "%d-%m-%Y").date()
    except ValueError:
        return None


def parse_tweets_jsonl(stream: BinaryIO) -> tuple[list[Tweet], int]:
    """Parse a JSONL tweet corpus (one object per line).

    Returns (tweets, skipped_count). Lines that are not valid JSON, lack a
    timestamp/text/id field, or carry an empty text are skipped and counted;
    blank lines are ignored silently. Input order is preserved.
    """
    text = io.TextIOWrapper(stream, encoding="utf-8")
    tweets: list[Tweet] = []
    skipped = 0
    for line in text:
        line = line.strip()
        if not line:
            continue
        tweet = _parse_tweet_line(line)
        if tweet is None:
            skipped += 1
        else:
            tweets.append(tweet)
    if not tweets:
        raise EmptyInput(f"no valid tweet lines found ({skipped} skipped)")
    return tweets, skipped


def _parse_tweet_line(line: str) -> Tweet | None:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError:
        return None
    if not isinstance(obj, dict):
        return None
    try:
        ts = _parse_rfc3339(str(obj["timestamp"]))
        return Tweet(timestamp=ts, text=str(obj["text"]), id=str(obj["id"]))
    except (KeyError, ValueError):
        return None


def _parse_rfc3339(value: str) -> datetime:
    # datetime.fromisoformat only learned the 'Z' suffix in 3.11.
    if value.endswith(("Z", "z")):
        value = value[:-1] + "+00:00"
    return datetime.fromisoformat(value)


def align_to_trading_days(
    tweets: Iterable[Tweet],
    trading_dates: Sequence[date],
) -> tuple[dict[date, list[Tweet]], int]:
    """Bucket tweets onto the first trading date at or after their own date.

    Weekend and holiday tweets therefore roll forward to the next session.
    Tweets dated after the final trading date are dropped and counted.
    Every trading date appears as a key, empty list when nothing landed
    there, so downstream daily aggregation stays defined on every session.

    Returns (buckets, dropped_count).
    """
    calendar = list(trading_dates)
    if not calendar:
        raise EmptyTradingCalendar("trading calendar is empty")
    for prev, cur in zip(calendar, calendar[1:]):
        if cur <= prev:
            raise ValueError(f"trading dates not strictly ascending at {cur}")

    buckets: dict[date, list[Tweet]] = {d: [] for d in calendar}
    dropped = 0
    for tweet in tweets:
        day = tweet.timestamp.date()
        idx = bisect_left(calendar, day)
        if idx == len(calendar):
            dropped += 1
        else:
            buckets[calendar[idx]].append(tweet)
    return buckets, dropped


# Serialization of parsed bars: a small versioned JSON document, used by the
# CLI to persist validated intermediates and by round-trip tests.

def bars_to_json(series: BarSeries) -> str:
    doc = {
        "version": 1,
        "symbol": series.symbol,
        "bars": [
            {**{k: v for k, v in asdict(b).items() if k != "date"}, "date": b.date.isoformat()}
            for b in series.bars
        ],
    }
    return json.dumps(doc, sort_keys=True, indent=2)


def bars_from_json(text: str) -> BarSeries:
    doc = json.loads(text)
    if doc.get("version") != 1:
        raise ValueError(f"unsupported bar-series document version {doc.get('version')!r}")
    bars = tuple(
        OhlcvBar(
            date=date.fromisoformat(item["date"]),
            **{f: item.get(f) for f in NUMERIC_FIELDS},
        )
        for item in doc["bars"]
    )
    return BarSeries(symbol=doc.get("symbol", ""), bars=bars)


def tweet_to_json_line(tweet: Tweet) -> str:
    return json.dumps(
        {"timestamp": tweet.timestamp.isoformat(), "text": tweet.text, "id": tweet.id},
        sort_keys=True,
    )
