"""Unit-root, ARCH, serial-correlation and Kolmogorov-Smirnov tests."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from .auxiliary import ols

# MacKinnon (1994) approximate asymptotic p-value surface for the
# Dickey-Fuller tau statistic, single series (N = 1).
# p = Phi(poly(stat)) with the small-p polynomial below ``star`` and the
# large-p polynomial above it; 0 below ``min`` and 1 above ``max``.
_ADF_SURFACE = {
    "n": dict(min=-19.04, max=np.inf, star=-1.04,
              small=(0.6344, 1.2378, 3.2496e-2),
              large=(0.4797, 9.3557e-1, -0.6999e-1, 3.3066e-2)),
    "c": dict(min=-18.83, max=2.74, star=-1.61,
              small=(2.1659, 1.4412, 3.8269e-2),
              large=(1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2)),
    "ct": dict(min=-16.18, max=0.7, star=-2.89,
               small=(3.2512, 1.6047, 4.9588e-2),
               large=(2.5261, 6.1654e-1, -3.7956e-1, -6.0285e-2)),
}

# MacKinnon (2010) finite-sample critical values: b0 + b1/T + b2/T^2 + b3/T^3
_ADF_CRITICAL = {
    "n": {"1%": (-2.56574, -2.2358, -3.627, 0.0), "5%": (-1.94100, -0.2686, -3.365, 31.223),
          "10%": (-1.61682, 0.2656, -2.714, 25.364)},
    "c": {"1%": (-3.43035, -6.5393, -16.786, -79.433), "5%": (-2.86154, -2.8903, -4.234, -40.040),
          "10%": (-2.56677, -1.5384, -2.809, 0.0)},
    "ct": {"1%": (-3.95877, -9.0531, -28.428, -134.155), "5%": (-3.41049, -4.3904, -9.036, -45.374),
           "10%": (-3.12705, -2.5856, -3.925, -22.380)},
}

ADF_SURFACE_NOTE = ("ADF p-values: MacKinnon (1994) asymptotic response surface; "
                    "critical values: MacKinnon (2010) finite-sample surface")
KS_ESTIMATED_NOTE = ("K-S reference parameters estimated from the same sample; "
                     "asymptotic p-value is anti-conservative")


@dataclass(frozen=True)
class TestResult:
    name: str
    statistic: float
    p_value: float
    lags: int | None = None
    notes: tuple = ()
    extra: dict = field(default_factory=dict)

    __test__ = False  # not a pytest class

    @property
    def reject_at_5pct(self) -> bool:
        return bool(self.p_value < 0.05)

    def to_report(self, prefix=""):
        out = {f"{prefix}statistic": float(self.statistic), f"{prefix}p_value": float(self.p_value),
               f"{prefix}reject_5pct": self.reject_at_5pct}
        if self.lags is not None:
            out[f"{prefix}lags"] = int(self.lags)
        return out


def _as_array(series):
    x = np.asarray(getattr(series, "values", series), dtype=float)
    if x.ndim != 1:
        raise ValueError("expected a one-dimensional series")
    if not np.all(np.isfinite(x)):
        raise ValueError("series contains non-finite values")
    return x


def mackinnon_pvalue(stat, regression="c"):
    surf = _ADF_SURFACE[regression]
    if stat > surf["max"]:
        return 1.0
    if stat < surf["min"]:
        return 0.0
    coef = surf["small"] if stat <= surf["star"] else surf["large"]
    return float(special.ndtr(np.polynomial.polynomial.polyval(stat, coef)))


def mackinnon_critical_values(nobs, regression="c"):
    return {k: b[0] + b[1] / nobs + b[2] / nobs ** 2 + b[3] / nobs ** 3
            for k, b in _ADF_CRITICAL[regression].items()}


def adf_test(series, lags=12, regression="c") -> TestResult:
    """Augmented Dickey-Fuller test of a unit root.

    Regresses ``diff(y)_t`` on the deterministic terms (``"c"``: constant,
    ``"ct"``: constant and trend, ``"n"``: none), ``y_{t-1}`` and ``lags``
    lagged differences.  The statistic is the t-ratio on ``y_{t-1}``.
    """
    y = _as_array(series)
    lags = int(lags)
    if y.size <= lags + 10:
        raise ValueError(f"ADF test needs more than {lags + 10} observations")
    if np.ptp(y) == 0:
        raise ValueError("ADF test is undefined for a constant series")
    if regression not in _ADF_SURFACE:
        raise ValueError(f"regression must be one of {tuple(_ADF_SURFACE)}")
    dy = np.diff(y)
    n = dy.size - lags
    cols = [y[lags:-1]]
    cols += [dy[lags - j: dy.size - j] for j in range(1, lags + 1)]
    names = ["level"] + [f"dlag{j}" for j in range(1, lags + 1)]
    if "t" in regression:
        cols.append(np.arange(n, dtype=float))
        names.append("trend")
    res = ols(dy[lags:], np.column_stack(cols), constant=regression != "n", names=names)
    stat = float(res.t_ratios[1 if regression != "n" else 0])
    return TestResult("adf", stat, mackinnon_pvalue(stat, regression), lags,
                      notes=(ADF_SURFACE_NOTE,),
                      extra={"critical_values": mackinnon_critical_values(n, regression),
                             "nobs": n, "regression": regression})


def arch_lm_test(series, lags=12) -> TestResult:
    """Engle's ARCH Lagrange multiplier test.

    ``T * R^2`` from regressing the squared demeaned series on a constant and
    ``lags`` of itself, referred to chi-square(``lags``).
    """
    x = _as_array(series)
    lags = int(lags)
    if x.size <= 2 * lags:
        raise ValueError(f"ARCH-LM test needs more than {2 * lags} observations")
    e2 = (x - x.mean()) ** 2
    if np.ptp(e2) == 0:
        raise ValueError("ARCH-LM test is undefined: squared series is constant")
    n = e2.size - lags
    X = np.column_stack([e2[lags - j: e2.size - j] for j in range(1, lags + 1)])
    res = ols(e2[lags:], X)
    stat = n * res.r_squared
    return TestResult("arch_lm", float(stat), float(stats.chi2.sf(stat, lags)), lags)


def autocorrelations(x, nlags):
    x = _as_array(x)
    d = x - x.mean()
    denom = d @ d
    if denom == 0:
        raise ValueError("autocorrelations are undefined for a constant series")
    return np.array([d[k:] @ d[: d.size - k] for k in range(1, nlags + 1)]) / denom


def ljung_box_from_acf(acf, nobs, model_df=0) -> TestResult:
    acf = np.asarray(acf, dtype=float)
    k = np.arange(1, acf.size + 1)
    q = nobs * (nobs + 2) * np.sum(acf ** 2 / (nobs - k))
    df = acf.size - model_df
    return TestResult("ljung_box", float(q), float(stats.chi2.sf(q, df)), acf.size)


def ljung_box_test(series, lags=12, model_df=0) -> TestResult:
    """Ljung-Box Q test of no autocorrelation up to ``lags``."""
    x = _as_array(series)
    lags = int(lags)
    if x.size <= lags:
        raise ValueError(f"Ljung-Box test needs more than {lags} observations")
    return ljung_box_from_acf(autocorrelations(x, lags), x.size, model_df)


def ks_test(sample, reference="uniform", estimated=False) -> TestResult:
    """One-sample Kolmogorov-Smirnov test with the asymptotic p-value.

    Parameters
    ----------
    reference : {"uniform", "normal"}
        Uniform on [0, 1] or standard normal.
    estimated : bool
        Flag that the reference was fitted to this sample; the report then
        carries a note that the p-value is anti-conservative.
    """
    x = np.sort(_as_array(sample))
    n = x.size
    if n < 10:
        raise ValueError("K-S test needs at least 10 observations")
    if reference in ("uniform", "uniform-01"):
        F = np.clip(x, 0.0, 1.0)
    elif reference in ("normal", "standard-normal"):
        F = special.ndtr(x)
    else:
        raise ValueError("reference must be 'uniform' or 'normal'")
    i = np.arange(1, n + 1)
    d = max(np.max(i / n - F), np.max(F - (i - 1) / n))
    p = float(special.kolmogorov(np.sqrt(n) * d))
    notes = (KS_ESTIMATED_NOTE,) if estimated else ()
    return TestResult(f"ks_{'uniform' if reference.startswith('uniform') else 'normal'}",
                      float(d), min(max(p, 0.0), 1.0), None, notes)


GRID_COLUMNS = (("unit_root", "Unit Root"), ("heteroskedasticity", "Heteroskedasticity"),
                ("autocorrelation", "Autocorrelation"))


def diagnose(series, lags=12) -> dict:
    """Unit-root, ARCH and Ljung-Box tests for one series."""
    return {"unit_root": adf_test(series, lags), "heteroskedasticity": arch_lm_test(series, lags),
            "autocorrelation": ljung_box_test(series, lags)}


def rejection_grid(named_series: dict, lags=12) -> dict:
    """Run :func:`diagnose` on each series; keys are series labels."""
    return {label: diagnose(s, lags) for label, s in named_series.items()}


def format_rejection_grid(grid: dict) -> str:
    width = max([len(k) for k in grid] + [6])
    lines = ["Reject null at 5%".rjust(width + 30),
             " " * width + "  " + "  ".join(f"{title:>18}" for _, title in GRID_COLUMNS)]
    for label, tests in grid.items():
        cells = ["Reject" if tests[key].reject_at_5pct else "Do not reject" for key, _ in GRID_COLUMNS]
        lines.append(f"{label:<{width}}  " + "  ".join(f"{c:>18}" for c in cells))
    lines.append(f"Note: {ADF_SURFACE_NOTE}.")
    return "\n".join(lines)


def residual_checks(fit, lags=12) -> dict:
    """Goodness-of-fit checks for a marginal fit: normality, ARCH, autocorrelation, PIT uniformity."""
    z = fit.std_resid
    return {
        "ks_normal": ks_test(z, "normal", estimated=True),
        "arch_lm": arch_lm_test(z, lags),
        "ljung_box": ljung_box_test(z, lags),
        "ks_uniform_pit": ks_test(fit.pit, "uniform", estimated=True),
    }
