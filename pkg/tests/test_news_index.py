import logging

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import CORPUS_TOTALS, APRIL_2014_COUNTS, APRIL_2014_SUBINDEX, april_2014_records
from newscopula import NoNewsMonthError
from newscopula.news_index import (THEMES, MonthlyNewsCounts, build_index_series, combined_index,
                                   count_totals, read_counts, sub_index, write_counts, write_index)
from newscopula.series import parse_month, read_series

counts = st.integers(min_value=0, max_value=10_000)


@pytest.mark.parametrize("theme", THEMES)
def test_april_2014_sub_indexes(theme):
    rec = MonthlyNewsCounts(parse_month("2014-04"), theme, *APRIL_2014_COUNTS[theme])
    assert sub_index(rec) == pytest.approx(APRIL_2014_SUBINDEX[theme], abs=0.005)


def test_april_2014_combined_index_is_plain_mean():
    # mean of the rounded sub-indexes is 0.02; the unrounded mean is 0.0185
    assert combined_index([0.26, -0.71, 0.53, 0.0]) == pytest.approx(0.02, abs=0.005)
    idx = build_index_series(april_2014_records())
    assert idx.mni.values[0] == pytest.approx((7 / 27 - 5 / 7 + 9 / 17 + 0) / 4, abs=1e-15)


@given(counts.filter(lambda k: k > 0), counts)
def test_balanced_month_scores_zero(k, m):
    assert sub_index(MonthlyNewsCounts(0, "housing", k, k, m)) == 0.0


@given(st.integers(min_value=1, max_value=10_000))
def test_all_positive_month_scores_one(n):
    assert sub_index(MonthlyNewsCounts(0, "energy", n, 0, 0)) == 1.0


@given(counts, counts, counts)
def test_sub_index_bounded(p, n, z):
    if p + n + z == 0:
        with pytest.raises(NoNewsMonthError):
            sub_index(MonthlyNewsCounts(0, "industry", p, n, z))
    else:
        assert -1.0 <= sub_index(MonthlyNewsCounts(0, "industry", p, n, z)) <= 1.0


def test_zero_total_is_no_news_error():
    with pytest.raises(NoNewsMonthError, match="no employment stories in 2014-04"):
        sub_index(MonthlyNewsCounts(parse_month("2014-04"), "employment", 0, 0, 0))


@pytest.mark.parametrize("bad", [dict(positive=-1), dict(negative=1.5), dict(theme="sports")])
def test_counts_validation(bad):
    kw = dict(month=0, theme="housing", positive=1, negative=1, neutral=1) | bad
    with pytest.raises(ValueError):
        MonthlyNewsCounts(**kw)


def test_combined_index_requires_every_theme():
    with pytest.raises(ValueError, match="energy"):
        combined_index({"employment": 0.1, "housing": 0.2, "industry": 0.3})
    with pytest.raises(ValueError):
        combined_index([0.1, 0.2, 0.3])
    assert combined_index([1, 1, 1, 1]) == 1.0


def test_combined_index_weights():
    assert combined_index([1, 0, 0, -1], weights=[2, 1, 1, 0]) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        combined_index([0, 0, 0, 0], weights=[0, 0, 0, 0])


@given(st.lists(st.floats(-1, 1), min_size=4, max_size=4))
def test_combined_index_bounded(values):
    assert -1.0 <= combined_index(values) <= 1.0


def _month_records(month, positive=1):
    return [MonthlyNewsCounts(month, t, positive, 1, 1) for t in THEMES]


def test_build_index_rejects_gaps_and_duplicates():
    with pytest.raises(ValueError, match="1999-02"):
        build_index_series(_month_records(parse_month("1999-01")) + _month_records(parse_month("1999-03")))
    recs = _month_records(0)
    with pytest.raises(ValueError, match="duplicate"):
        build_index_series(recs + recs[:1])
    with pytest.raises(ValueError, match="energy"):
        build_index_series(recs[:3])
    with pytest.raises(ValueError):
        build_index_series([])


def test_zero_total_theme_month_scored_zero(caplog):
    recs = _month_records(0)
    recs[1] = MonthlyNewsCounts(0, "housing", 0, 0, 0)
    with caplog.at_level(logging.WARNING):
        idx = build_index_series(recs)
    assert idx.sub_indexes["housing"].values[0] == 0.0
    assert "scoring it 0" in caplog.text
    assert idx.volume["housing"].values[0] == 0


def test_corpus_totals_from_monthly_records():
    # spread each theme's totals over the 184 months of the sample
    months = np.arange(parse_month("1999-01"), parse_month("2014-04") + 1)
    assert months.size == 184
    records = []
    for theme in THEMES:
        pos, neg, neu, _ = CORPUS_TOTALS[theme]
        split = [np.full(months.size, c // months.size) for c in (pos, neg, neu)]
        for arr, c in zip(split, (pos, neg, neu)):
            arr[: c % months.size] += 1
        records += [MonthlyNewsCounts(int(m), theme, int(a), int(b), int(c))
                    for m, a, b, c in zip(months, *split)]
    totals = count_totals(records)
    assert totals == CORPUS_TOTALS
    assert sum(totals[t][3] for t in THEMES) == 19739


def test_counts_roundtrip_and_index_file(tmp_path, april_counts_file):
    recs = read_counts(april_counts_file)
    assert {r.theme: (r.positive, r.negative, r.neutral) for r in recs} == APRIL_2014_COUNTS
    out = tmp_path / "index.csv"
    write_index(out, build_index_series(recs))
    assert read_series(out, "hni").values[0] == pytest.approx(-5 / 7)
    assert read_series(out, "volume_energy").values[0] == 27


def test_read_counts_errors(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(ValueError, match="empty"):
        read_counts(empty)
    bad = tmp_path / "bad.csv"
    bad.write_text("month,theme,positive,negative\n2014-04,housing,1,2\n")
    with pytest.raises(ValueError, match="neutral"):
        read_counts(bad)
    write_counts(tmp_path / "ok.csv", april_2014_records())
    assert len(read_counts(tmp_path / "ok.csv")) == 4
