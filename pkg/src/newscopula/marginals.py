"""Conditional marginal models: AR-X mean with GARCH(1,1) normal errors.

The model for a series y_t is

    y_t = c + sum_j b_j x_{j,t} + sum_l a_l y_{t-l} + e_t
    s2_t = omega + persistence * s2_{t-1} + arch * e_{t-1}^2
    e_t / sqrt(s2_t) ~ N(0, 1)

and is fitted by maximum likelihood.  The recursion starts from the sample
variance of the current mean-equation residuals.  Positivity and covariance
stationarity are enforced by reparameterisation (log for omega, logistic for
the total persistence + arch and for its split), so the optimiser works on an
unconstrained vector.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special
from scipy.signal import lfilter

from ._errors import ConvergenceError
from .auxiliary import ols
from .series import IndexSeries, align, format_month

logger = logging.getLogger(__name__)

_LOG2PI = np.log(2 * np.pi)
MIN_LENGTH = 30


@dataclass(frozen=True)
class MarginalSpec:
    """Mean regressors, autoregressive lags and whether to use GARCH(1,1).

    ``regressors`` are labels matched against the regressor series passed to
    :func:`fit_marginal`; a constant is always included.
    """

    regressors: tuple = ()
    ar_lags: tuple = ()
    garch: bool = True

    def __post_init__(self):
        lags = tuple(int(l) for l in self.ar_lags)
        if any(l <= 0 for l in lags) or len(set(lags)) != len(lags):
            raise ValueError("ar_lags must be distinct positive integers")
        object.__setattr__(self, "ar_lags", tuple(sorted(lags)))
        object.__setattr__(self, "regressors", tuple(self.regressors))

    @property
    def mean_names(self):
        return ("const",) + tuple(self.regressors) + tuple(f"ar{l}" for l in self.ar_lags)


def garch_variance(resid, omega, persistence, arch, sigma2_0=None):
    """Conditional variance path of a GARCH(1,1) recursion.

    ``sigma2_0`` is used both as the pre-sample variance and the pre-sample
    squared residual; it defaults to the mean squared residual.
    """
    e = np.asarray(resid, dtype=float)
    if sigma2_0 is None:
        sigma2_0 = float(np.mean(e * e))
    drive = np.empty(e.size)
    drive[0] = omega + arch * sigma2_0
    drive[1:] = omega + arch * e[:-1] ** 2
    return lfilter([1.0], [1.0, -persistence], drive, zi=[persistence * sigma2_0])[0]


def _central_grad(f, x, h=1e-5):
    g = np.empty(x.size)
    for i in range(x.size):
        step = h * max(1.0, abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += step
        xm[i] -= step
        g[i] = (f(xp) - f(xm)) / (2 * step)
    return g


def numeric_hessian(f, x, rel_step=1e-4):
    """Central-difference Hessian of a scalar function."""
    x = np.asarray(x, dtype=float)
    k = x.size
    h = rel_step * np.maximum(np.abs(x), 1e-2)
    H = np.empty((k, k))
    f0 = f(x)
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = h[i]
        H[i, i] = (f(x + ei) - 2 * f0 + f(x - ei)) / h[i] ** 2
        for j in range(i):
            ej = np.zeros(k)
            ej[j] = h[j]
            H[i, j] = H[j, i] = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej)
                                 + f(x - ei - ej)) / (4 * h[i] * h[j])
    return H


class _Model:
    """Scaled design and likelihood for one marginal specification."""

    def __init__(self, y, X, garch):
        self.y_raw = y
        self.X_raw = X
        self.garch = garch
        self.sy = float(np.std(y)) or 1.0
        sx = X.std(axis=0)
        sx[sx == 0] = 1.0
        self.sx = sx
        self.y = y / self.sy
        self.X = X / sx
        self.k = X.shape[1]
        self.nobs = y.size

    # unconstrained z -> natural scaled params (b, omega, persistence, arch)
    def natural(self, z):
        b = z[: self.k]
        if not self.garch:
            return b, np.exp(z[self.k]), 0.0, 0.0
        omega = np.exp(z[self.k])
        total = special.expit(z[self.k + 1])
        share = special.expit(z[self.k + 2])
        return b, omega, total * share, total * (1 - share)

    def unconstrained(self, b, omega, persistence, arch):
        if not self.garch:
            return np.r_[b, np.log(omega)]
        total = persistence + arch
        share = persistence / total if total > 0 else 0.5
        total = np.clip(total, 1e-10, 1 - 1e-10)
        share = np.clip(share, 1e-10, 1 - 1e-10)
        return np.r_[b, np.log(omega), special.logit(total), special.logit(share)]

    def loglik_terms(self, b, omega, persistence, arch):
        e = self.y - self.X @ b
        if self.garch:
            s2 = garch_variance(e, omega, persistence, arch)
        else:
            s2 = np.full(e.size, omega)
        return -0.5 * (_LOG2PI + np.log(s2) + e * e / s2), e, s2

    def loglik_scaled(self, natural, weights=None):
        with np.errstate(all="ignore"):
            ll = self.loglik_terms(*natural)[0]
        if weights is not None:
            ll = ll * weights
        total = np.sum(ll)
        return total if np.isfinite(total) else -np.inf

    def objective(self, z, weights=None):
        # negative mean log-likelihood, scale-free
        val = self.loglik_scaled(self.natural(z), weights)
        return -val / self.nobs if np.isfinite(val) else 1e10

    def to_original(self, b, omega, persistence, arch):
        return b * self.sy / self.sx, omega * self.sy ** 2, persistence, arch

    def natural_vector(self, z):
        b, om, p, a = self.natural(z)
        return np.r_[b, om, p, a] if self.garch else np.r_[b, om]

    def loglik_natural_vector(self, p):
        b = p[: self.k]
        if self.garch:
            return self.loglik_scaled((b, p[self.k], p[self.k + 1], p[self.k + 2]))
        return self.loglik_scaled((b, p[self.k], 0.0, 0.0))


@dataclass
class MarginalFit:
    """Maximum likelihood fit of a marginal model.

    ``variance_params`` is ``(omega, persistence, arch)``: the constant, the
    coefficient on the lagged conditional variance and the coefficient on the
    lagged squared residual.
    """

    spec: MarginalSpec
    label: str
    months: np.ndarray
    mean_params: np.ndarray
    variance_params: np.ndarray
    loglik: float
    r_squared: float
    residuals: np.ndarray
    cond_variance: np.ndarray
    se: np.ndarray
    converged: bool
    grad_norm: float
    nobs: int
    _model: _Model = field(repr=False, default=None)
    _z: np.ndarray = field(repr=False, default=None)

    @property
    def param_names(self):
        names = list(self.spec.mean_names)
        names += ["omega", "persistence", "arch"] if self.spec.garch else ["sigma2"]
        return tuple(names)

    @property
    def params(self):
        var = self.variance_params if self.spec.garch else self.variance_params[:1]
        return np.r_[self.mean_params, var]

    @property
    def t_ratios(self):
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.params / self.se

    @property
    def std_resid(self):
        return self.residuals / np.sqrt(self.cond_variance)

    @property
    def pit(self):
        return pit_transform(self)

    def pit_series(self) -> IndexSeries:
        return IndexSeries(f"pit_{self.label}", self.months, self.pit)

    def to_report(self, prefix="") -> dict:
        out = {f"{prefix}nobs": self.nobs, f"{prefix}loglik": self.loglik,
               f"{prefix}r_squared": self.r_squared, f"{prefix}converged": self.converged,
               f"{prefix}first_month": format_month(self.months[0]),
               f"{prefix}last_month": format_month(self.months[-1])}
        for name, p, s, t in zip(self.param_names, self.params, self.se, self.t_ratios):
            out[f"{prefix}params.{name}.estimate"] = float(p)
            out[f"{prefix}params.{name}.se"] = float(s)
            out[f"{prefix}params.{name}.t_ratio"] = float(t)
        return out


def pit_transform(fit: MarginalFit) -> np.ndarray:
    """Standard normal CDF of the standardised residuals, kept inside (0, 1)."""
    s2 = np.asarray(fit.cond_variance)
    if np.any(~(s2 > 0)):
        raise ValueError("conditional variance is not strictly positive; cannot standardise")
    u = special.ndtr(np.asarray(fit.residuals) / np.sqrt(s2))
    return np.clip(u, np.finfo(float).tiny, 1 - np.finfo(float).epsneg)


def build_design(series: IndexSeries, regressors, spec: MarginalSpec):
    """Aligned response, design matrix and months after lag trimming."""
    regs = _regressor_map(regressors)
    missing = [r for r in spec.regressors if r not in regs]
    if missing:
        raise ValueError(f"regressor series not supplied: {', '.join(missing)}")
    parts = align(series, *[regs[r] for r in spec.regressors])
    y_full = parts[0].values
    months = parts[0].months
    max_lag = max(spec.ar_lags, default=0)
    if spec.ar_lags and np.any(np.diff(months) != 1):
        gaps = [format_month(m) for m in months[1:][np.diff(months) != 1]]
        raise ValueError(f"autoregressive lags need contiguous months; breaks before {gaps}")
    n = y_full.size - max_lag
    if n < MIN_LENGTH:
        raise ValueError(f"need at least {MIN_LENGTH} usable observations, got {max(n, 0)}")
    cols = [np.ones(n)]
    cols += [p.values[max_lag:] for p in parts[1:]]
    cols += [y_full[max_lag - l: y_full.size - l] for l in spec.ar_lags]
    return y_full[max_lag:], np.column_stack(cols), months[max_lag:]


def _regressor_map(regressors):
    if regressors is None:
        return {}
    if isinstance(regressors, dict):
        return dict(regressors)
    return {r.label: r for r in regressors}


def fit_marginal(series: IndexSeries, regressors=None, spec: MarginalSpec = MarginalSpec(), *,
                 n_starts=5, seed=0, tol=1e-4) -> MarginalFit:
    """Maximum likelihood fit of an AR-X / GARCH(1,1) marginal model.

    Parameters
    ----------
    series : IndexSeries
        Dependent series.
    regressors : list of IndexSeries or dict, optional
        Exogenous series named by ``spec.regressors``.
    spec : MarginalSpec
    n_starts : int
        Number of Nelder-Mead starts; the first is deterministic (OLS mean,
        persistence 0.765, arch 0.135), the rest random.  The best is then
        polished with BFGS.
    seed : int
        Seed for the random starts.
    tol : float
        Convergence threshold on the gradient norm of the mean
        log-likelihood in the unconstrained parameterisation.  The fit is
        rejected outright when the norm exceeds ``10 * tol``.

    Raises
    ------
    ValueError
        Too few observations or misaligned inputs.
    ConvergenceError
        No stationary point found.
    """
    y, X, months = build_design(series, regressors, spec)
    model = _Model(y, X, spec.garch)
    z = _optimise(model, n_starts, seed)
    return _finish(model, z, spec, series.label, months, tol)


def _ols_start(model):
    b = np.linalg.lstsq(model.X, model.y, rcond=None)[0]
    e = model.y - model.X @ b
    return b, float(np.mean(e * e))


def _optimise(model, n_starts, seed, weights=None):
    b0, v0 = _ols_start(model)
    if not model.garch:
        # closed form: OLS mean, ML variance
        if weights is None:
            return np.r_[b0, np.log(v0)]
        return _polish(model, np.r_[b0, np.log(v0)], weights)
    rng = np.random.default_rng(seed)
    starts = [model.unconstrained(b0, v0 * 0.1, 0.765, 0.135)]
    bse = np.sqrt(np.diag(np.linalg.pinv(model.X.T @ model.X)) * v0)
    for _ in range(max(n_starts, 1) - 1):
        total = rng.uniform(0.3, 0.98)
        share = rng.uniform(0.3, 0.95)
        b = b0 + rng.normal(scale=bse)
        starts.append(model.unconstrained(b, v0 * (1 - total), total * share, total * (1 - share)))
    dim = starts[0].size
    best = None
    for z0 in starts:
        steps = np.r_[np.maximum(bse, 0.05), np.full(dim - model.k, 0.5)]
        simplex = np.vstack([z0] + [z0 + np.eye(dim)[i] * steps[i] for i in range(dim)])
        res = optimize.minimize(model.objective, z0, args=(weights,), method="Nelder-Mead",
                                options={"initial_simplex": simplex, "maxiter": 400 * dim,
                                         "maxfev": 600 * dim, "xatol": 1e-6, "fatol": 1e-10})
        if best is None or res.fun < best.fun:
            best = res
    return _polish(model, best.x, weights)


def _polish(model, z, weights=None):
    f = lambda x: model.objective(x, weights)  # noqa: E731
    res = optimize.minimize(f, z, jac=lambda x: _central_grad(f, x), method="BFGS",
                            options={"gtol": 1e-8, "maxiter": 200})
    return res.x if res.fun <= f(z) else z


def _finish(model, z, spec, label, months, tol):
    grad = _central_grad(model.objective, z)
    grad_norm = float(np.linalg.norm(grad))
    if not np.all(np.isfinite(z)) or grad_norm > 10 * tol:
        raise ConvergenceError(
            f"marginal fit for {label!r} did not converge (gradient norm {grad_norm:.2e})",
            params=z, grad_norm=grad_norm)
    converged = grad_norm < tol
    if not converged:
        logger.warning("marginal fit for %r: gradient norm %.2e above %.0e", label, grad_norm, tol)
    b, om, pers, arch = model.natural(z)
    if not om > 0:
        raise ConvergenceError(f"marginal fit for {label!r}: omega collapsed to zero",
                               params=z, grad_norm=grad_norm)
    ll_terms, e, s2 = model.loglik_terms(b, om, pers, arch)
    loglik = float(np.sum(ll_terms) - model.nobs * np.log(model.sy))
    se = _hessian_se(model, z)
    b_o, om_o, pers_o, arch_o = model.to_original(b, om, pers, arch)
    resid = e * model.sy
    r2 = 1 - resid @ resid / np.sum((model.y_raw - model.y_raw.mean()) ** 2)
    return MarginalFit(
        spec=spec, label=label, months=months, mean_params=b_o,
        variance_params=np.array([om_o, pers_o, arch_o]), loglik=loglik, r_squared=float(r2),
        residuals=resid, cond_variance=s2 * model.sy ** 2, se=se, converged=converged,
        grad_norm=grad_norm, nobs=model.nobs, _model=model, _z=z,
    )


def _hessian_se(model, z):
    p = model.natural_vector(z)
    H = numeric_hessian(model.loglik_natural_vector, p)
    scale = np.r_[model.sy / model.sx, model.sy ** 2, np.ones(p.size - model.k - 1)]
    try:
        cov = np.linalg.inv(-H)
        var = np.diag(cov)
    except np.linalg.LinAlgError:
        var = np.full(p.size, np.nan)
    with np.errstate(invalid="ignore"):
        se = np.where(var > 0, np.sqrt(np.abs(var)), np.nan)
    return se * scale


def refit_weighted(fit: MarginalFit, weights) -> MarginalFit:
    """Re-estimate with per-observation likelihood weights, warm-started.

    Used for delete-one jackknife replicates: setting a weight to zero drops
    that observation's likelihood contribution while the variance recursion
    still runs through it.  Standard errors are not recomputed.
    """
    model = fit._model
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (model.nobs,):
        raise ValueError("weights must have one entry per observation")
    z = _polish(model, fit._z, weights)
    grad_norm = float(np.linalg.norm(_central_grad(lambda x: model.objective(x, weights), z)))
    if not np.all(np.isfinite(z)) or grad_norm > 1e-3:
        raise ConvergenceError("weighted refit did not converge", params=z, grad_norm=grad_norm)
    b, om, pers, arch = model.natural(z)
    _, e, s2 = model.loglik_terms(b, om, pers, arch)
    b_o, om_o, pers_o, arch_o = model.to_original(b, om, pers, arch)
    resid = e * model.sy
    return MarginalFit(
        spec=fit.spec, label=fit.label, months=fit.months, mean_params=b_o,
        variance_params=np.array([om_o, pers_o, arch_o]),
        loglik=float(np.sum(weights * model.loglik_terms(b, om, pers, arch)[0])
                     - weights.sum() * np.log(model.sy)),
        r_squared=float("nan"), residuals=resid, cond_variance=s2 * model.sy ** 2,
        se=np.full(fit.se.size, np.nan), converged=grad_norm < 1e-4, grad_norm=grad_norm,
        nobs=model.nobs, _model=model, _z=z,
    )


def homoskedastic_loglik(fit: MarginalFit) -> float:
    """Log-likelihood of the same mean equation with constant variance, at its MLE."""
    model = fit._model
    b, v = _ols_start(model)
    return float(-0.5 * model.nobs * (_LOG2PI + np.log(v) + 1) - model.nobs * np.log(model.sy))


def select_ar_lags(series: IndexSeries, max_lag=6, alpha=0.05, regressors=None, spec_regressors=()):
    """General-to-specific AR lag selection by OLS t-ratios.

    Starts from lags ``1..max_lag`` and repeatedly drops the lag with the
    smallest absolute t-ratio while it is insignificant at ``alpha``.
    """
    from scipy import stats

    lags = list(range(1, max_lag + 1))
    # fix the estimation sample at the longest lag so fits are comparable
    y, X, _ = build_design(series, regressors, MarginalSpec(spec_regressors, tuple(lags), False))
    n_exog = 1 + len(spec_regressors)
    while lags:
        cols = [n_exog + l - 1 for l in lags]
        design = np.column_stack([X[:, :n_exog], X[:, cols]])
        res = ols(y, design, constant=False)
        crit = stats.t.ppf(1 - alpha / 2, res.n - design.shape[1])
        t_lags = np.abs(res.t_ratios[n_exog:])
        worst = int(np.argmin(t_lags))
        if t_lags[worst] >= crit:
            break
        lags.pop(worst)
    return tuple(lags)
