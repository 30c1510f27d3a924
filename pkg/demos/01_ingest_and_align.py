#!/usr/bin/env python3
"""Walkthrough: parsing an OHLCV CSV, a tweet corpus, and aligning the two.

Everything is generated inline so the script runs standalone:

    python3 demos/01_ingest_and_align.py
"""

import io

from sentistock import align_to_trading_days, parse_ohlcv_csv, parse_tweets_jsonl

CSV = """\
Date,Open,High,Low,Close,Adj Close,Volume
03-01-2020,101.2,103.0,100.1,102.5,102.5,120000
01-01-2020,100.0,101.5,99.0,101.0,101.0,150000
02-01-2020,,102.8,99.9,101.9,101.9,90000
06-01-2020,102.4,104.1,101.9,103.6,103.6,110000
"""

TWEETS = """\
{"timestamp": "2020-01-01T09:30:00Z", "text": "strong open expected", "id": "a1"}
{"timestamp": "2020-01-04T14:00:00Z", "text": "weekend chatter, watching monday", "id": "a2"}
{"timestamp": "2020-01-06T08:00:00Z", "text": "good momentum", "id": "a3"}
{"timestamp": "2020-01-09T08:00:00Z", "text": "posted after the last session", "id": "a4"}
this line is not JSON and will be skipped
"""

print("== OHLCV ingestion ==")
print("The CSV above is deliberately messy: rows out of order, a DD-MM-YYYY")
print("date format, and an empty Open cell on 02-01.\n")

series = parse_ohlcv_csv(io.BytesIO(CSV.encode()), symbol="DEMO")
for bar in series.bars:
    print(f"  {bar.date}  open={bar.open}  close={bar.close}  volume={bar.volume}")
print("\nRows come back date-sorted; the empty cell is a missing value (None),")
print("left for the feature pipeline's mean imputation, never silently zeroed.\n")

print("== Tweet corpus ==")
tweets, skipped = parse_tweets_jsonl(io.BytesIO(TWEETS.encode()))
print(f"parsed {len(tweets)} tweets, skipped {skipped} malformed line(s)\n")

print("== Calendar alignment ==")
print("Tweets roll forward to the first trading date on or after their own")
print("date; anything after the final session is dropped (and counted).\n")
buckets, dropped = align_to_trading_days(tweets, series.dates())
for day, members in buckets.items():
    ids = ", ".join(t.id for t in members) or "-"
    print(f"  {day}: {ids}")
print(f"  dropped after final session: {dropped}")
print("\nNote a2 (Saturday) landed on Monday 2020-01-06 next to a3.")
