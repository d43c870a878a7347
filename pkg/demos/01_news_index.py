"""Building a macroeconomic news index from classified story counts.

Each month every story is tagged with one of four themes and a tone.  A
theme's sub-index is (positive - negative) / total, and the combined index
is the plain average of the four sub-indexes.

Run:  python3 demos/01_news_index.py
"""
from newscopula import (THEMES, CorpusConfig, MonthlyNewsCounts, build_index_series,
                        simulate_news_corpus, sub_index)
from newscopula.news_index import count_totals
from newscopula.series import parse_month

# One month of counts, (positive, negative, neutral) per theme.
april = {"employment": (17, 10, 0), "housing": (0, 5, 2),
         "industry": (12, 3, 2), "energy": (13, 13, 1)}
records = [MonthlyNewsCounts(parse_month("2014-04"), t, *april[t]) for t in THEMES]

print("Sub-indexes for 2014-04")
for rec in records:
    print(f"  {rec.theme:<11} {rec.positive:>3} pos {rec.negative:>3} neg {rec.neutral:>3} neu"
          f"  ->  {sub_index(rec):+.2f}")
index = build_index_series(records)
print(f"Combined index: {index.mni.values[0]:+.4f}")
# Averaging the rounded sub-indexes gives 0.02; the unrounded mean is 0.0185.

# A synthetic corpus with a slowly improving tone.
import numpy as np

n = 184
tone = np.linspace(-0.4, 0.4, n)
corpus = simulate_news_corpus(CorpusConfig(seed=1, n_months=n, balance=tone))
index = build_index_series(corpus)
print("\nStory totals over the synthetic sample")
print(f"  {'theme':<11}{'pos':>7}{'neg':>7}{'neu':>7}{'total':>8}")
for theme, (p, m, z, tot) in count_totals(corpus).items():
    print(f"  {theme:<11}{p:>7}{m:>7}{z:>7}{tot:>8}")
first, last = index.mni.values[:12].mean(), index.mni.values[-12:].mean()
print(f"\nMean index, first year {first:+.3f}; last year {last:+.3f}")
