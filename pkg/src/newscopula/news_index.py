"""Macroeconomic news index from classified monthly story counts.

Each theme's sub-index is the share of positive minus the share of negative
stories, with neutral stories counted in the denominator.  The combined
index is a weighted average of the four sub-indexes, equal weights by
default.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ._errors import NoNewsMonthError
from .series import IndexSeries, format_month, parse_month, read_table, write_table

logger = logging.getLogger(__name__)

THEMES = ("employment", "housing", "industry", "energy")
SUBINDEX_LABELS = {"employment": "eni", "housing": "hni", "industry": "ini", "energy": "enni"}


@dataclass(frozen=True)
class MonthlyNewsCounts:
    """Classified story counts for one theme in one month."""

    month: int
    theme: str
    positive: int
    negative: int
    neutral: int

    def __post_init__(self):
        if self.theme not in THEMES:
            raise ValueError(f"unknown theme {self.theme!r}; expected one of {THEMES}")
        for name in ("positive", "negative", "neutral"):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise ValueError(f"{name} count must be a nonnegative integer, got {value!r}")

    @property
    def total(self) -> int:
        return self.positive + self.negative + self.neutral


def sub_index(counts: MonthlyNewsCounts) -> float:
    """(positive - negative) / total for one theme-month.

    Raises
    ------
    NoNewsMonthError
        If the month carries no stories for the theme.
    """
    total = counts.total
    if total == 0:
        raise NoNewsMonthError(
            f"no {counts.theme} stories in {format_month(counts.month)}"
        )
    return (counts.positive - counts.negative) / total


def combined_index(sub_indexes, weights=None) -> float:
    """Weighted average of the four thematic sub-indexes.

    Parameters
    ----------
    sub_indexes : mapping or sequence
        Either a mapping ``theme -> value`` covering all four themes, or a
        sequence of four values in :data:`THEMES` order.
    weights : sequence of float, optional
        Theme weights in :data:`THEMES` order; normalised to sum to one.
        Equal weights when omitted.
    """
    if isinstance(sub_indexes, dict):
        missing = [t for t in THEMES if t not in sub_indexes]
        if missing:
            raise ValueError(f"missing sub-index for theme(s): {', '.join(missing)}")
        values = np.array([sub_indexes[t] for t in THEMES], dtype=float)
    else:
        values = np.asarray(sub_indexes, dtype=float)
        if values.shape != (4,):
            raise ValueError(f"expected four sub-index values, got {values.size}")
    if np.any(np.abs(values) > 1):
        raise ValueError("sub-index values must lie in [-1, 1]")
    if weights is None:
        return float(values.mean())
    w = np.asarray(weights, dtype=float)
    if w.shape != (4,) or np.any(w < 0) or w.sum() <= 0:
        raise ValueError("weights must be four nonnegative numbers with positive sum")
    return float(w @ values / w.sum())


@dataclass(frozen=True)
class NewsIndex:
    """Result of :func:`build_index_series`."""

    sub_indexes: dict[str, IndexSeries]
    mni: IndexSeries
    volume: dict[str, IndexSeries]

    @property
    def total_volume(self) -> IndexSeries:
        total = sum(v.values for v in self.volume.values())
        return IndexSeries("volume", self.mni.months, total)

    def as_columns(self) -> dict[str, list]:
        cols = {"month": self.mni.month_labels}
        for theme in THEMES:
            cols[SUBINDEX_LABELS[theme]] = list(self.sub_indexes[theme].values)
        cols["mni"] = list(self.mni.values)
        for theme in THEMES:
            cols[f"volume_{theme}"] = [int(v) for v in self.volume[theme].values]
        return cols


def build_index_series(records, weights=None) -> NewsIndex:
    """Build the four sub-index series, the combined index and volumes.

    Records must cover a contiguous range of months with every theme present
    in every month.  A theme-month with zero stories is scored 0 and a
    warning is logged.
    """
    records = list(records)
    if not records:
        raise ValueError("no news count records supplied")
    table = {}
    for rec in records:
        key = (rec.month, rec.theme)
        if key in table:
            raise ValueError(f"duplicate record for {rec.theme} in {format_month(rec.month)}")
        table[key] = rec
    months = sorted({rec.month for rec in records})
    expected = range(months[0], months[-1] + 1)
    gaps = [format_month(m) for m in expected if m not in set(months)]
    if gaps:
        raise ValueError(f"news counts have gaps; missing months: {', '.join(gaps)}")
    for m in months:
        absent = [t for t in THEMES if (m, t) not in table]
        if absent:
            raise ValueError(f"{format_month(m)} lacks theme(s): {', '.join(absent)}")

    months = np.arange(months[0], months[-1] + 1)
    subs = {t: np.empty(months.size) for t in THEMES}
    vols = {t: np.empty(months.size) for t in THEMES}
    mni = np.empty(months.size)
    for i, m in enumerate(months):
        for t in THEMES:
            rec = table[(m, t)]
            vols[t][i] = rec.total
            try:
                subs[t][i] = sub_index(rec)
            except NoNewsMonthError as exc:
                logger.warning("%s; scoring it 0", exc)
                subs[t][i] = 0.0
        mni[i] = combined_index([subs[t][i] for t in THEMES], weights)
    return NewsIndex(
        sub_indexes={t: IndexSeries(SUBINDEX_LABELS[t], months, subs[t]) for t in THEMES},
        mni=IndexSeries("mni", months, mni),
        volume={t: IndexSeries(f"volume_{t}", months, vols[t]) for t in THEMES},
    )


def count_totals(records) -> dict[str, tuple[int, int, int, int]]:
    """Per-theme and overall (positive, negative, neutral, total) sums."""
    out = {}
    for t in THEMES:
        rows = [r for r in records if r.theme == t]
        p = sum(r.positive for r in rows)
        n = sum(r.negative for r in rows)
        z = sum(r.neutral for r in rows)
        out[t] = (p, n, z, p + n + z)
    out["total"] = tuple(sum(out[t][i] for t in THEMES) for i in range(4))
    return out


def read_counts(path) -> list[MonthlyNewsCounts]:
    """Read ``month,theme,positive,negative,neutral`` rows."""
    cols = read_table(path)
    required = ("month", "theme", "positive", "negative", "neutral")
    missing = [c for c in required if c not in cols]
    if missing:
        raise ValueError(f"{path}: missing column(s) {', '.join(missing)}")
    n = len(cols["month"])
    if n == 0:
        raise ValueError(f"{path}: no data rows")
    out = []
    for i in range(n):
        out.append(MonthlyNewsCounts(
            month=parse_month(cols["month"][i]),
            theme=cols["theme"][i].lower(),
            positive=int(cols["positive"][i]),
            negative=int(cols["negative"][i]),
            neutral=int(cols["neutral"][i]),
        ))
    return out


def write_counts(path, records) -> None:
    records = sorted(records, key=lambda r: (r.month, THEMES.index(r.theme)))
    write_table(path, {
        "month": [format_month(r.month) for r in records],
        "theme": [r.theme for r in records],
        "positive": [r.positive for r in records],
        "negative": [r.negative for r in records],
        "neutral": [r.neutral for r in records],
    })


def write_index(path, index: NewsIndex) -> None:
    write_table(path, index.as_columns())
