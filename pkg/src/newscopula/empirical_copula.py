"""Empirical copula (joint rank-bin frequency) tables.

Both series are ranked, split into ``k`` equal-frequency bins, and the pairs
are cross-tabulated.  Cell ``(j, i)`` (1-based in reports) counts pairs in
bin ``j`` of ``v`` and bin ``i`` of ``u``.  Under independence every cell
expects ``n / k**2`` pairs.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EmpiricalCopulaTable:
    k: int
    counts: np.ndarray  # (k, k); rows index v-bins, columns u-bins

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def expected(self) -> float:
        return self.n / self.k ** 2

    def chi_square(self) -> float:
        """Pearson statistic against the uniform (independence) table."""
        e = self.expected
        return float(np.sum((self.counts - e) ** 2) / e)

    def to_rows(self):
        return [[int(c) for c in row] for row in self.counts]

    def to_delimited(self, sep=",") -> str:
        header = sep.join(["bin"] + [str(i + 1) for i in range(self.k)])
        rows = [sep.join([str(j + 1)] + [str(int(c)) for c in row])
                for j, row in enumerate(self.counts)]
        return "\n".join([header] + rows) + "\n"

    def format(self, highlight=True) -> str:
        """Fixed-width text rendering of the table.

        The cell with the largest excess over the independence count is
        marked with asterisks.
        """
        mark = excess_report(self).max_excess_cell if highlight else None
        w = max(5, len(str(int(self.counts.max()))) + 4)
        lines = ["Bin |" + "".join(f"{i + 1:>{w}}" for i in range(self.k)),
                 "----+" + "-" * (w * self.k)]
        for j, row in enumerate(self.counts):
            cells = []
            for i, c in enumerate(row):
                s = f"*{int(c)}*" if mark == (j + 1, i + 1) else str(int(c))
                cells.append(f"{s:>{w}}")
            lines.append(f"{j + 1:>3} |" + "".join(cells))
        lines.append(f"n = {self.n}, expected per cell under independence = {self.expected:.2f} "
                     f"(~{round(self.expected)})")
        return "\n".join(lines)


def rank_bins(x, k) -> np.ndarray:
    """0-based equal-frequency bin of each observation; ties kept in time order."""
    x = np.asarray(x, dtype=float)
    n = x.size
    order = np.argsort(x, kind="stable")
    ranks = np.empty(n, dtype=np.int64)
    ranks[order] = np.arange(n)
    bins = ranks * k // n
    sx = x[order]
    boundary = np.nonzero(np.diff(bins[order]))[0]
    if np.any(sx[boundary] == sx[boundary + 1]):
        logger.info("tied values straddle a bin boundary; split by time order")
    return bins


def copula_table(u, v, k=4) -> EmpiricalCopulaTable:
    """Cross-tabulate equal-frequency rank bins of ``u`` (columns) and ``v`` (rows)."""
    u = np.asarray(getattr(u, "values", u), dtype=float)
    v = np.asarray(getattr(v, "values", v), dtype=float)
    k = int(k)
    if k < 2:
        raise ValueError("need at least 2 bins")
    if u.shape != v.shape or u.ndim != 1:
        raise ValueError("u and v must be 1-d and of equal length")
    if u.size < k * k:
        raise ValueError(f"need at least k**2 = {k * k} pairs, got {u.size}")
    bu, bv = rank_bins(u, k), rank_bins(v, k)
    counts = np.zeros((k, k), dtype=np.int64)
    np.add.at(counts, (bv, bu), 1)
    return EmpiricalCopulaTable(k, counts)


@dataclass(frozen=True)
class ExcessReport:
    deviations: np.ndarray  # (count - expected) / expected
    max_excess_cell: tuple  # 1-based (row, column) of the largest positive deviation
    max_abs_cell: tuple     # 1-based (row, column) of the largest |deviation|

    @property
    def max_excess(self) -> float:
        j, i = self.max_excess_cell
        return float(self.deviations[j - 1, i - 1])


def excess_report(table: EmpiricalCopulaTable) -> ExcessReport:
    """Relative deviation of each cell from the independence count."""
    dev = (table.counts - table.expected) / table.expected
    jm, im = np.unravel_index(np.argmax(dev), dev.shape)
    ja, ia = np.unravel_index(np.argmax(np.abs(dev)), dev.shape)
    return ExcessReport(dev, (int(jm) + 1, int(im) + 1), (int(ja) + 1, int(ia) + 1))
