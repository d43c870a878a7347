"""Two-step copula estimation, jackknife standard errors and model selection.

IFM fits each parametric margin by maximum likelihood, turns the residuals
into probability integral transforms and then maximises the copula
log-likelihood over those.  CML replaces the parametric transforms with
rescaled ranks.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import optimize, stats

from ._errors import ConvergenceError
from .copulas import ClaytonCopula, Copula, copula_class
from .marginals import MarginalFit, MarginalSpec, fit_marginal, pit_transform, refit_weighted

logger = logging.getLogger(__name__)

BOUNDARY_TOL = 1e-3
ONE_SIDED_CRIT = stats.norm.ppf(0.95)
TWO_SIDED_CRIT = stats.norm.ppf(0.975)

# tail parameters above 0.99 push the Joe-Clayton exponents past ~70 and the
# density overflows
_SJC_HI = float(np.log((0.99 - 1e-4) / (1 - 1e-4 - 0.99)))

# unconstrained search boxes
_BOX = {
    "gaussian": [(-3.8, 3.8)],
    "clayton": [(np.log(ClaytonCopula.theta_min), np.log(ClaytonCopula.theta_max))],
    "gumbel": [(np.log(1e-8), np.log(49.0))],
    "t": [(-3.8, 3.8), (np.log(1e-2), np.log(198.0))],
    "sjc": [(-12.0, _SJC_HI), (-12.0, _SJC_HI)],
}


@dataclass
class CopulaFit:
    """Maximum likelihood copula fit.

    ``se`` holds delete-one jackknife standard errors when they were
    computed (``jackknife`` names the mode), otherwise ``None``.
    """

    copula: Copula
    loglik: float
    nobs: int
    method: str = "ifm"
    boundary: bool = False
    fixed: dict = field(default_factory=dict)
    se: np.ndarray | None = None
    jackknife: str | None = None
    n_dropped: int = 0

    @property
    def family(self) -> str:
        return self.copula.tag

    @property
    def params(self) -> np.ndarray:
        return self.copula.params

    @property
    def param_names(self):
        return tuple(n for n in self.copula.param_names if n not in self.fixed)

    @property
    def free_params(self) -> np.ndarray:
        return np.array([p for n, p in zip(self.copula.param_names, self.params)
                         if n not in self.fixed])

    @property
    def k(self) -> int:
        return len(self.param_names)

    @property
    def aic(self) -> float:
        return 2 * self.k - 2 * self.loglik

    @property
    def bic(self) -> float:
        return self.k * np.log(self.nobs) - 2 * self.loglik

    @property
    def t_ratios(self):
        if self.se is None:
            return None
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.free_params / self.se

    @property
    def significant(self):
        """Per-parameter significance at 5%.

        Clayton's theta is tested one-sided (theta > 0); other parameters
        two-sided.
        """
        t = self.t_ratios
        if t is None:
            return None
        crit = ONE_SIDED_CRIT if self.family == "clayton" else TWO_SIDED_CRIT
        return t > crit if self.family == "clayton" else np.abs(t) > crit

    @cached_property
    def implied(self) -> dict:
        lower, upper = self.copula.tail_dependence()
        tau, rho = self.copula.kendall_tau(), self.copula.spearman_rho()
        return {"kendall_tau": float(tau), "spearman_rho": float(rho),
                "lambda_lower": float(lower), "lambda_upper": float(upper)}

    def to_report(self, prefix="", implied=True) -> dict:
        out = {f"{prefix}family": self.family, f"{prefix}method": self.method,
               f"{prefix}nobs": self.nobs, f"{prefix}k": self.k,
               f"{prefix}loglik": float(self.loglik), f"{prefix}aic": float(self.aic),
               f"{prefix}bic": float(self.bic), f"{prefix}at_boundary": bool(self.boundary),
               f"{prefix}jackknife": self.jackknife or "none"}
        t = self.t_ratios
        sig = self.significant
        for j, (name, p) in enumerate(zip(self.param_names, self.free_params)):
            out[f"{prefix}params.{name}.estimate"] = float(p)
            if self.se is not None:
                out[f"{prefix}params.{name}.se"] = float(self.se[j])
                out[f"{prefix}params.{name}.t_ratio"] = float(t[j])
                out[f"{prefix}params.{name}.significant_5pct"] = bool(sig[j])
        for name, val in self.fixed.items():
            out[f"{prefix}fixed.{name}"] = float(val)
        if implied:
            for key, val in self.implied.items():
                out[f"{prefix}implied.{key}"] = val
        return out


def _check_pits(u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 1:
        raise ValueError("u and v must be 1-d arrays of equal length")
    if np.any((u <= 0) | (u >= 1) | (v <= 0) | (v >= 1)):
        raise ValueError("pseudo-observations must lie strictly inside (0, 1)")
    return u, v


def fit_copula(u, v, family, *, fixed_df=None, start=None, method="ifm") -> CopulaFit:
    """Maximise the copula log-likelihood over pseudo-observations.

    Parameters
    ----------
    u, v : array_like
        Pseudo-observations in (0, 1).
    family : str
        One of ``gaussian``, ``clayton``, ``gumbel``, ``t``, ``sjc``.
    fixed_df : float, optional
        Hold the t copula's degrees of freedom fixed.
    start : array_like, optional
        Natural-scale starting parameters; replaces the family defaults.
    """
    u, v = _check_pits(u, v)
    cls = copula_class(family)
    tag = cls.tag
    box = list(_BOX[tag])
    fixed = {}
    if tag == "t" and fixed_df is not None:
        fixed = {"df": float(fixed_df)}
        box = box[:1]

    def build(z):
        if fixed:
            return cls.from_unconstrained(np.r_[z, np.log(fixed["df"] - 2)])
        return cls.from_unconstrained(z)

    def negll(z):
        z = np.clip(np.atleast_1d(z), [b[0] for b in box], [b[1] for b in box])
        with np.errstate(all="ignore"):
            val = build(z).loglik(u, v)
        return -val if np.isfinite(val) else 1e300

    if start is not None:
        starts = [np.atleast_1d(np.asarray(start, dtype=float))]
    else:
        starts = cls.start_points(u, v)
    z_starts = []
    for s in starts:
        if fixed:
            s = np.r_[s[0], fixed["df"]]
        z_starts.append(cls(*s).to_unconstrained()[: len(box)])

    if len(box) == 1:
        lo, hi = box[0]
        res = optimize.minimize_scalar(lambda z: negll([z]), bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-9})
        z_best, f_best = np.array([res.x]), res.fun
        # guard against a local optimum missed by the bracket
        for z0 in z_starts:
            if negll(z0) < f_best:
                z_best, f_best = np.clip(z0, lo, hi), negll(z0)
    else:
        z_best, f_best = None, np.inf
        z_starts = [np.clip(z0, [b[0] for b in box], [b[1] for b in box]) for z0 in z_starts]
        # local searches only from the two most promising starts
        z_starts = sorted(z_starts, key=negll)[:2]
        for z0 in z_starts:
            res = optimize.minimize(negll, z0, method="Nelder-Mead",
                                    options={"xatol": 1e-5, "fatol": 1e-8, "maxiter": 2000})
            z1 = np.clip(res.x, [b[0] for b in box], [b[1] for b in box])
            pol = optimize.minimize(negll, z1, method="L-BFGS-B", bounds=box,
                                    options={"ftol": 1e-14, "gtol": 1e-8, "maxiter": 200})
            if np.isfinite(pol.fun) and pol.fun <= negll(z1):
                res = pol
            if res.fun < f_best:
                z_best, f_best = res.x, res.fun
    z_best = np.clip(z_best, [b[0] for b in box], [b[1] for b in box])
    cop = build(z_best)
    return CopulaFit(cop, -float(f_best), u.size, method=method,
                     boundary=_at_boundary(cop, z_best, box), fixed=fixed)


def _at_boundary(cop, z, box):
    if cop.tag == "clayton":
        return bool(cop.params[0] < BOUNDARY_TOL)
    if cop.tag == "gumbel":
        return bool(cop.params[0] - 1 < BOUNDARY_TOL)
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    return bool(np.any((z - lo < 1e-6) | (hi - z < 1e-6)))


# -- jackknife -------------------------------------------------------------------

def jackknife_replicates(replicate, n, max_drop=0.05):
    """Collect delete-one estimates ``replicate(i)`` for ``i = 0..n-1``.

    Replicates raising :class:`ConvergenceError` or returning non-finite
    values are dropped with a warning; more than ``max_drop`` of ``n``
    dropped is an error.
    """
    reps, dropped = [], 0
    for i in range(n):
        try:
            theta = np.atleast_1d(np.asarray(replicate(i), dtype=float))
        except ConvergenceError as exc:
            logger.warning("jackknife replicate %d dropped: %s", i, exc)
            dropped += 1
            continue
        if not np.all(np.isfinite(theta)):
            logger.warning("jackknife replicate %d dropped: non-finite estimate", i)
            dropped += 1
            continue
        reps.append(theta)
    if dropped > max_drop * n:
        raise ConvergenceError(f"{dropped} of {n} jackknife replicates failed")
    if dropped:
        warnings.warn(f"{dropped} jackknife replicate(s) dropped", RuntimeWarning, stacklevel=2)
    return np.array(reps), dropped


def jackknife_se_from_replicates(reps) -> np.ndarray:
    reps = np.asarray(reps, dtype=float)
    if reps.ndim == 1:
        reps = reps[:, None]
    m = reps.shape[0]
    # shift by the first replicate so identical replicates give exactly zero
    dev = reps - reps[0]
    dev -= dev.mean(axis=0)
    return np.sqrt((m - 1) / m * np.sum(dev * dev, axis=0))


def jackknife_se(estimator, data, max_drop=0.05) -> np.ndarray:
    """Delete-one jackknife standard errors.

    ``estimator`` maps a data array (observations along axis 0) to a
    parameter vector; it is called once per deleted observation.

    >>> x = np.array([1.0, 2.0, 4.0, 7.0])
    >>> float(jackknife_se(np.mean, x)[0]) == float(x.std(ddof=1) / 2)
    True
    """
    data = np.asarray(data)
    n = data.shape[0]
    reps, _ = jackknife_replicates(lambda i: estimator(np.delete(data, i, axis=0)), n, max_drop)
    return jackknife_se_from_replicates(reps)


def copula_jackknife(fit: CopulaFit, u, v, max_drop=0.05) -> CopulaFit:
    """Copula-step-only jackknife: drop each pair and refit the copula."""
    u, v = _check_pits(u, v)
    start = fit.params[:1] if fit.fixed else fit.params
    df = fit.fixed.get("df")

    def rep(i):
        keep = np.ones(u.size, bool)
        keep[i] = False
        return _refit_start(u[keep], v[keep], fit, start, df).free_params

    reps, dropped = jackknife_replicates(rep, u.size, max_drop)
    fit.se = jackknife_se_from_replicates(reps)
    fit.jackknife = "copula-only"
    fit.n_dropped = dropped
    return fit


def _refit_start(u, v, fit, start, df):
    # single start at the full-sample optimum; 1-d families still search their whole box
    return fit_copula(u, v, fit.family, fixed_df=df, start=start, method=fit.method)


# -- IFM / CML -------------------------------------------------------------------

@dataclass
class IFMResult:
    margin_x: MarginalFit
    margin_y: MarginalFit
    copula_fit: CopulaFit
    months: np.ndarray
    u: np.ndarray
    v: np.ndarray


def _common_pits(fx: MarginalFit, fy: MarginalFit, ux=None, vy=None):
    months = np.intersect1d(fx.months, fy.months)
    if months.size == 0:
        raise ValueError("marginal fits share no months")
    ix = np.searchsorted(fx.months, months)
    iy = np.searchsorted(fy.months, months)
    ux = pit_transform(fx) if ux is None else ux
    vy = pit_transform(fy) if vy is None else vy
    return months, ux[ix], vy[iy], ix, iy


def fit_ifm(x, y, spec_x: MarginalSpec, spec_y: MarginalSpec, family="clayton", *,
            regressors_x=None, regressors_y=None, jackknife="full", fixed_df=None,
            n_starts=5, seed=0, margins=None) -> IFMResult:
    """Two-step IFM estimation.

    Step one fits both marginal models; step two maximises the copula
    log-likelihood over their PITs ``u`` (from ``x``) and ``v`` (from
    ``y``) on the months they share.

    Parameters
    ----------
    jackknife : {"full", "copula", None}
        ``"full"`` repeats both steps for every delete-one replicate (the
        margins are re-estimated with the deleted month's likelihood
        contribution removed, warm-started at the full-sample optimum);
        ``"copula"`` refits only the copula step; ``None`` skips standard
        errors.
    margins : (MarginalFit, MarginalFit), optional
        Reuse already fitted margins.
    """
    if margins is None:
        fx = fit_marginal(x, regressors_x, spec_x, n_starts=n_starts, seed=seed)
        fy = fit_marginal(y, regressors_y, spec_y, n_starts=n_starts, seed=seed + 1)
    else:
        fx, fy = margins
    months, u, v, ix, iy = _common_pits(fx, fy)
    cfit = fit_copula(u, v, family, fixed_df=fixed_df)
    if jackknife == "full":
        _full_jackknife(cfit, fx, fy, ix, iy)
    elif jackknife == "copula":
        copula_jackknife(cfit, u, v)
    elif jackknife is not None:
        raise ValueError("jackknife must be 'full', 'copula' or None")
    return IFMResult(fx, fy, cfit, months, u, v)


def _full_jackknife(cfit, fx, fy, ix, iy, max_drop=0.05):
    start = cfit.params[:1] if cfit.fixed else cfit.params
    df = cfit.fixed.get("df")

    def rep(i):
        wx = np.ones(fx.nobs)
        wx[ix[i]] = 0.0
        wy = np.ones(fy.nobs)
        wy[iy[i]] = 0.0
        rx, ry = refit_weighted(fx, wx), refit_weighted(fy, wy)
        u, v = pit_transform(rx)[ix], pit_transform(ry)[iy]
        keep = np.ones(u.size, bool)
        keep[i] = False
        return _refit_start(u[keep], v[keep], cfit, start, df).free_params

    reps, dropped = jackknife_replicates(rep, ix.size, max_drop)
    cfit.se = jackknife_se_from_replicates(reps)
    cfit.jackknife = "full two-step"
    cfit.n_dropped = dropped
    return cfit


def pseudo_observations(x):
    """Rescaled ranks ``rank / (n + 1)`` with average ranks for ties."""
    x = np.asarray(getattr(x, "values", x), dtype=float)
    if np.ptp(x) == 0:
        raise ValueError("cannot rank a constant series")
    return stats.rankdata(x) / (x.size + 1)


def fit_cml(x, y, family="clayton", *, jackknife=None, fixed_df=None) -> CopulaFit:
    """Canonical maximum likelihood: copula ML on rescaled empirical ranks."""
    x = np.asarray(getattr(x, "values", x), dtype=float)
    y = np.asarray(getattr(y, "values", y), dtype=float)
    if x.shape != y.shape:
        raise ValueError("x and y must have equal length")
    if x.size < 30:
        raise ValueError("CML needs at least 30 observations")
    u, v = pseudo_observations(x), pseudo_observations(y)
    fit = fit_copula(u, v, family, fixed_df=fixed_df, method="cml")
    if jackknife == "copula":
        # ranks are recomputed inside each replicate
        def rep(i):
            keep = np.ones(x.size, bool)
            keep[i] = False
            uu, vv = pseudo_observations(x[keep]), pseudo_observations(y[keep])
            return _refit_start(uu, vv, fit, fit.params[:1] if fit.fixed else fit.params,
                                fit.fixed.get("df")).free_params
        reps, dropped = jackknife_replicates(rep, x.size)
        fit.se = jackknife_se_from_replicates(reps)
        fit.jackknife = "copula-only"
        fit.n_dropped = dropped
    return fit


# -- model selection -------------------------------------------------------------

def rank_copulas(u, v, candidates, fixed_df=None) -> list[CopulaFit]:
    """Fit every candidate family to the same pseudo-observations, best AIC first."""
    candidates = list(candidates)
    if not candidates:
        raise ValueError("no candidate families given")
    fits = [fit_copula(u, v, fam, fixed_df=fixed_df if fam == "t" else None) for fam in candidates]
    order = sorted(range(len(fits)), key=lambda i: (fits[i].aic, i))
    return [fits[i] for i in order]


def select_family(x, y, spec_x, spec_y, candidates=("gaussian", "clayton", "gumbel", "t", "sjc"),
                  *, regressors_x=None, regressors_y=None, n_starts=5, seed=0, margins=None):
    """Fit the margins once, then rank candidate copulas by AIC on identical PITs.

    Returns ``(ranking, (margin_x, margin_y))``.
    """
    if margins is None:
        fx = fit_marginal(x, regressors_x, spec_x, n_starts=n_starts, seed=seed)
        fy = fit_marginal(y, regressors_y, spec_y, n_starts=n_starts, seed=seed + 1)
    else:
        fx, fy = margins
    _, u, v, _, _ = _common_pits(fx, fy)
    return rank_copulas(u, v, candidates), (fx, fy)
