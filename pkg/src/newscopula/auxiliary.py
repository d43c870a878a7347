"""Hodrick-Prescott detrending and least squares with robust standard errors."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

HP_MONTHLY = 129600.0
HP_MONTHLY_ALT = 14400.0


def _second_difference_bands(n):
    """Upper bands (offsets 0, 1, 2) of D'D for the (n-2) x n second-difference D."""
    d = np.array([1.0, -2.0, 1.0])
    bands = [np.zeros(n), np.zeros(n - 1), np.zeros(n - 2)]
    for r in range(n - 2):
        for a in range(3):
            for b in range(a, 3):
                bands[b - a][r + a] += d[a] * d[b]
    return bands


def hp_filter(series, smoothing=HP_MONTHLY):
    """Hodrick-Prescott filter.

    Solves ``min sum (y - trend)**2 + smoothing * sum (diff(trend, 2))**2``
    through the symmetric positive definite pentadiagonal system
    ``(I + smoothing * D'D) trend = y``.

    Parameters
    ----------
    series : array_like
        Observations, at least 8.
    smoothing : float
        Penalty weight. 129600 is the usual monthly value, 1600 quarterly.
        ``np.inf`` returns the least squares linear trend.

    Returns
    -------
    trend, cycle : ndarray
    """
    y = np.asarray(getattr(series, "values", series), dtype=float)
    if y.ndim != 1 or y.size < 8:
        raise ValueError("hp_filter needs a 1-d series of length >= 8")
    if not smoothing >= 0:
        raise ValueError("smoothing must be nonnegative")
    n = y.size
    if smoothing == 0:
        trend = y.copy()
    elif np.isinf(smoothing):
        t = np.arange(n, dtype=float)
        trend = np.polyval(np.polyfit(t, y, 1), t)
    else:
        main, off1, off2 = _second_difference_bands(n)
        ab = np.zeros((3, n))
        ab[2] = 1.0 + smoothing * main
        ab[1, 1:] = smoothing * off1
        ab[0, 2:] = smoothing * off2
        trend = linalg.solveh_banded(ab, y, lower=False)
    return trend, y - trend


@dataclass(frozen=True)
class RegressionResult:
    coefficients: np.ndarray
    se: np.ndarray
    t_ratios: np.ndarray
    p_values: np.ndarray
    r_squared: float
    n: int
    names: tuple
    residuals: np.ndarray
    robust: bool


def _collinear_columns(X, names):
    bad = []
    kept = np.empty((X.shape[0], 0))
    for j in range(X.shape[1]):
        trial = np.column_stack([kept, X[:, j]])
        if np.linalg.matrix_rank(trial) < trial.shape[1]:
            bad.append(names[j])
        else:
            kept = trial
    return bad


def ols(y, X, robust=False, constant=True, names=None) -> RegressionResult:
    """Least squares regression.

    Parameters
    ----------
    y : array_like, shape (n,)
    X : array_like, shape (n,) or (n, k)
        Regressors, without the intercept unless ``constant=False``.
    robust : bool
        Use heteroskedasticity-robust (HC1 sandwich) standard errors.
    constant : bool
        Prepend an intercept column named ``"const"``.
    names : sequence of str, optional
        Column names for ``X``.

    Raises
    ------
    ValueError
        If the design is rank deficient; the message names the columns that
        are linear combinations of earlier ones.
    """
    from scipy import stats

    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if names is None:
        names = [f"x{j + 1}" for j in range(X.shape[1])]
    names = list(names)
    if constant:
        X = np.column_stack([np.ones(X.shape[0]), X])
        names = ["const"] + names
    n, k = X.shape
    if y.shape != (n,):
        raise ValueError("y and X have different numbers of observations")
    if n <= k:
        raise ValueError(f"need more observations ({n}) than columns ({k})")
    if np.linalg.matrix_rank(X) < k:
        raise ValueError(f"design matrix is rank deficient; collinear column(s): "
                         f"{', '.join(_collinear_columns(X, names))}")
    xtx_inv = np.linalg.inv(X.T @ X)
    beta = xtx_inv @ (X.T @ y)
    resid = y - X @ beta
    if robust:
        meat = (X * resid[:, None] ** 2).T @ X
        cov = xtx_inv @ meat @ xtx_inv * n / (n - k)
    else:
        cov = xtx_inv * (resid @ resid) / (n - k)
    se = np.sqrt(np.maximum(np.diag(cov), 0))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, beta / se, np.nan)
    p = 2 * stats.t.sf(np.abs(t), n - k)
    sst = np.sum((y - y.mean()) ** 2)
    r2 = 1 - (resid @ resid) / sst if sst > 0 else float("nan")
    return RegressionResult(beta, se, t, p, float(r2), n, tuple(names), resid, robust)
