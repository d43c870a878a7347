"""Monthly series container and delimited-file helpers.

Months are stored as integer counters (``12 * year + month - 1``) so that
alignment and gap detection are plain integer arithmetic.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


def parse_month(text: str) -> int:
    """Convert an ISO year-month string such as ``"2014-04"`` to a counter."""
    text = text.strip()
    try:
        year, month = text.split("-")[:2]
        year, month = int(year), int(month)
    except ValueError as exc:
        raise ValueError(f"invalid month {text!r}; expected YYYY-MM") from exc
    if not 1 <= month <= 12:
        raise ValueError(f"invalid month {text!r}; month out of range")
    return 12 * year + month - 1


def format_month(counter: int) -> str:
    year, month = divmod(int(counter), 12)
    return f"{year:04d}-{month + 1:02d}"


@dataclass(frozen=True)
class IndexSeries:
    """A labelled monthly series.

    Parameters
    ----------
    label : str
        Identifier, e.g. ``"mni"`` or ``"returns"``.
    months : array_like of int
        Month counters, strictly increasing.
    values : array_like of float
        One value per month.
    """

    label: str
    months: np.ndarray
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        months = np.asarray(self.months, dtype=np.int64)
        values = np.asarray(self.values, dtype=float)
        if months.ndim != 1 or months.shape != values.shape:
            raise ValueError("months and values must be 1-d and of equal length")
        if months.size > 1 and np.any(np.diff(months) <= 0):
            raise ValueError(f"months of series {self.label!r} are not strictly increasing")
        object.__setattr__(self, "months", months)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size

    @classmethod
    def from_strings(cls, label, months, values):
        return cls(label, [parse_month(m) for m in months], values)

    @property
    def month_labels(self):
        return [format_month(m) for m in self.months]

    def restrict(self, months) -> "IndexSeries":
        """Subseries on the given months, which must all be present."""
        months = np.asarray(months, dtype=np.int64)
        idx = np.searchsorted(self.months, months)
        ok = (idx < self.months.size) & (self.months[np.minimum(idx, self.months.size - 1)] == months)
        if not np.all(ok):
            missing = [format_month(m) for m in months[~ok]]
            raise ValueError(f"series {self.label!r} lacks months {missing}")
        return IndexSeries(self.label, months, self.values[idx])

    def with_values(self, values, label=None) -> "IndexSeries":
        return IndexSeries(label or self.label, self.months, values)


def align(*series: IndexSeries) -> list[IndexSeries]:
    """Restrict all series to their common months."""
    if not series:
        return []
    common = series[0].months
    for s in series[1:]:
        common = np.intersect1d(common, s.months)
    if common.size == 0:
        raise ValueError("series share no common months")
    return [s.restrict(common) for s in series]


def read_table(path) -> dict[str, list[str]]:
    """Read a delimited text file with a header row into columns.

    The delimiter is sniffed among comma, semicolon and tab.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        text = fh.read()
    if not text.strip():
        raise ValueError(f"{path}: file is empty")
    try:
        dialect = csv.Sniffer().sniff(text.splitlines()[0], delimiters=",;\t")
    except csv.Error:
        dialect = csv.excel
    rows = [r for r in csv.reader(text.splitlines(), dialect) if r and any(c.strip() for c in r)]
    header = [h.strip().lower() for h in rows[0]]
    columns = {h: [] for h in header}
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        for h, cell in zip(header, row):
            columns[h].append(cell.strip())
    return columns


def write_table(path, columns: dict[str, list]) -> None:
    names = list(columns)
    n = len(next(iter(columns.values()))) if columns else 0
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for i in range(n):
            writer.writerow([_fmt(columns[c][i]) for c in names])


def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return value


def read_series(path, column: str = "value", label: str | None = None) -> IndexSeries:
    """Read a ``month,<column>`` delimited file into an :class:`IndexSeries`."""
    cols = read_table(path)
    if "month" not in cols:
        raise ValueError(f"{path}: missing column 'month'")
    column = column.lower()
    if column not in cols:
        raise ValueError(f"{path}: missing column {column!r}")
    values = [float(v) for v in cols[column]]
    order = np.argsort([parse_month(m) for m in cols["month"]], kind="stable")
    months = [cols["month"][i] for i in order]
    return IndexSeries.from_strings(label or column, months, np.asarray(values)[order])


def write_series(path, *series: IndexSeries) -> None:
    """Write aligned series as ``month,<label>,...`` columns."""
    aligned = align(*series)
    cols = {"month": aligned[0].month_labels}
    for s in aligned:
        cols[s.label] = list(s.values)
    write_table(path, cols)
