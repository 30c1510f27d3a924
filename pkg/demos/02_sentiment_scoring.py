#!/usr/bin/env python3
"""Walkthrough: lexicon-based scoring, three-way labels, daily percentages.

    python3 demos/02_sentiment_scoring.py
"""

import io
from datetime import date

from sentistock import aggregate_daily, load_lexicon, score_text, tokenize

LEXICON = """\
term\tpolarity\tintensity\tflag
good\t0.7\t1.0\tterm
great\t0.9\t1.0\tterm
bad\t-0.7\t1.0\tterm
weak\t-0.6\t1.0\tterm
very\t0\t1.3\tterm
not\t0\t1.0\tnegator
"""

lexicon = load_lexicon(io.BytesIO(LEXICON.encode()))
print(f"lexicon: {len(lexicon.terms)} scored terms, {len(lexicon.negators)} negator(s)\n")

SAMPLES = [
    "Good results!",
    "not good",
    "very good quarter",
    "#DemoCorp looking great, says @analyst http://example.com",
    "very not ... actually nothing scoreable here",
    "weak guidance but good execution",
]

print("== Scoring rule in action ==")
print("negator queues a x(-0.5) flip, an intensity term queues a multiplier,")
print("and the next scoring term consumes the queue; clause scores average.\n")
for text in SAMPLES:
    tokens = tokenize(text)
    score = score_text(tokens, lexicon)
    print(f"  {text!r}")
    print(f"      tokens={tokens}  polarity={score.polarity:+.4f}  label={score.label}")

print("\n== Daily aggregation ==")
day_a, day_b = date(2020, 3, 2), date(2020, 3, 3)
scored = {
    day_a: [score_text(tokenize(t), lexicon) for t in ("good", "bad", "flat day")],
    day_b: [],
}
for record in aggregate_daily(scored):
    print(
        f"  {record.date}: pos {record.pos_pct:.1f}%  neg {record.neg_pct:.1f}%  "
        f"neu {record.neu_pct:.1f}%  (n={record.tweet_count})"
    )
print("\nAn empty day reports (0, 0, 100) so every trading day keeps defined features.")
