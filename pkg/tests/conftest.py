import numpy as np
import pytest

from newscopula.news_index import MonthlyNewsCounts, write_counts
from newscopula.series import parse_month

# April 2014 story counts: (positive, negative, neutral) per theme
APRIL_2014_COUNTS = {
    "employment": (17, 10, 0),
    "housing": (0, 5, 2),
    "industry": (12, 3, 2),
    "energy": (13, 13, 1),
}
APRIL_2014_SUBINDEX = {"employment": 0.26, "housing": -0.71, "industry": 0.53, "energy": 0.0}

# Story totals by theme over 1999-01 .. 2014-04
CORPUS_TOTALS = {
    "employment": (3328, 3220, 479, 7027),
    "housing": (982, 830, 126, 1938),
    "industry": (1407, 946, 107, 2460),
    "energy": (3830, 3203, 1281, 8314),
    "total": (9547, 8199, 1993, 19739),
}


def april_2014_records(month="2014-04"):
    m = parse_month(month)
    return [MonthlyNewsCounts(m, t, *c) for t, c in APRIL_2014_COUNTS.items()]


@pytest.fixture
def april_counts_file(tmp_path):
    path = tmp_path / "april_counts.csv"
    write_counts(path, april_2014_records())
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(20140401)
