"""End-to-end analysis runs driven by a JSON run configuration.

A run reads monthly returns, a news index and control series, then
produces a flat key-path/value report: the diagnostics grid, both marginal
fits, the empirical copula table, the family ranking and the final copula
fit with jackknife t-ratios and implied tail dependence.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ._errors import ConvergenceError
from .auxiliary import HP_MONTHLY, hp_filter, ols
from .copulas import FAMILIES, tail_coefficients
from .diagnostics import (format_rejection_grid, rejection_grid, residual_checks)
from .empirical_copula import copula_table, excess_report
from .estimation import ONE_SIDED_CRIT, TWO_SIDED_CRIT, fit_ifm, rank_copulas, _common_pits
from .marginals import MarginalSpec, fit_marginal
from .series import IndexSeries, align, format_month, read_series, read_table, write_table

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_NUMERICAL, EXIT_INPUT = 0, 1, 2


@dataclass(frozen=True)
class SeriesRef:
    path: Path
    column: str = "value"
    label: str | None = None
    detrend: bool = False

    @property
    def name(self):
        return self.label or self.column

    def load(self) -> IndexSeries:
        return read_series(self.path, self.column, self.name)


@dataclass(frozen=True)
class RunConfig:
    """Inputs and settings for :func:`analyze` and :func:`robustness`.

    ``margin_x`` models the returns (``u`` side) and ``margin_y`` the news
    index (``v`` side).  ``family=None`` picks the best family by AIC.
    """

    returns: SeriesRef
    index: SeriesRef
    controls: tuple = ()
    volume: SeriesRef | None = None
    margin_x: MarginalSpec = MarginalSpec()
    margin_y: MarginalSpec = MarginalSpec(ar_lags=(1, 2))
    candidates: tuple = FAMILIES
    family: str | None = None
    k: int = 4
    lags: int = 12
    smoothing: float = HP_MONTHLY
    seed: int = 0
    jackknife: str = "full"
    n_starts: int = 5
    output_dir: Path | None = None
    format: str = "text"

    def validate(self):
        refs = [self.returns, self.index, *self.controls] + ([self.volume] if self.volume else [])
        for ref in refs:
            if not Path(ref.path).is_file():
                raise ValueError(f"input file not found: {ref.path}")
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if self.lags < 1:
            raise ValueError("lags must be positive")
        if not self.smoothing >= 0:
            raise ValueError("smoothing must be nonnegative")
        bad = [c for c in self.candidates if c not in FAMILIES]
        if bad or not self.candidates:
            raise ValueError(f"unknown or empty candidate families: {bad}")
        if self.family is not None and self.family not in FAMILIES:
            raise ValueError(f"unknown copula family {self.family!r}")
        if self.jackknife not in ("full", "copula", "none"):
            raise ValueError("jackknife must be 'full', 'copula' or 'none'")
        if self.format not in ("text", "structured"):
            raise ValueError("format must be 'text' or 'structured'")
        labels = [self.returns.name, self.index.name] + [c.name for c in self.controls]
        if len(set(labels)) != len(labels):
            raise ValueError(f"series labels must be unique: {labels}")
        return self


def _ref(d, base, default_column="value", default_label=None):
    if isinstance(d, str):
        d = {"path": d}
    d = dict(d)
    path = Path(d.pop("path"))
    if not path.is_absolute():
        path = base / path
    return SeriesRef(path, d.pop("column", default_column), d.pop("label", default_label),
                     bool(d.pop("detrend", False)))


def _spec(d, default):
    if d is None:
        return default
    return MarginalSpec(tuple(d.get("regressors", default.regressors)),
                        tuple(d.get("ar_lags", default.ar_lags)), bool(d.get("garch", True)))


def config_from_dict(d, base=Path(".")) -> RunConfig:
    """Build a :class:`RunConfig` from a parsed JSON document.

    Relative paths are resolved against ``base``.  Unknown keys are an
    error so that typos do not silently fall back to defaults.
    """
    d = dict(d)
    known = {"returns", "index", "controls", "volume", "margin_x", "margin_y", "candidates",
             "family", "k", "lags", "smoothing", "seed", "jackknife", "n_starts",
             "output_dir", "format"}
    unknown = sorted(set(d) - known)
    if unknown:
        raise ValueError(f"unknown config keys: {unknown}")
    for key in ("returns", "index"):
        if key not in d:
            raise ValueError(f"config is missing {key!r}")
    base = Path(base)
    controls = tuple(_ref(c, base) for c in d.get("controls", []))
    default_x = MarginalSpec(tuple(c.name for c in controls))
    out = d.get("output_dir")
    return RunConfig(
        returns=_ref(d["returns"], base, "value", "returns"),
        index=_ref(d["index"], base, "mni", "mni"),
        controls=controls,
        volume=_ref(d["volume"], base, "volume", "volume") if d.get("volume") else None,
        margin_x=_spec(d.get("margin_x"), default_x),
        margin_y=_spec(d.get("margin_y"), MarginalSpec(ar_lags=(1, 2))),
        candidates=tuple(d.get("candidates", FAMILIES)),
        family=d.get("family"),
        k=int(d.get("k", 4)), lags=int(d.get("lags", 12)),
        smoothing=float(d.get("smoothing", HP_MONTHLY)), seed=int(d.get("seed", 0)),
        jackknife=str(d.get("jackknife", "full")), n_starts=int(d.get("n_starts", 5)),
        output_dir=(base / out) if out else None, format=str(d.get("format", "text")),
    )


def load_run_config(path, **overrides) -> RunConfig:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON ({exc})") from None
    cfg = config_from_dict(doc, path.parent)
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return replace(cfg, **overrides)


# -- reports ---------------------------------------------------------------------

@dataclass
class Report:
    """Flat key-path/value report plus a human-readable rendering."""

    entries: dict = field(default_factory=dict)
    text: list = field(default_factory=list)
    error: BaseException | None = None

    def update(self, prefix, d):
        for k, v in d.items():
            self.entries[f"{prefix}{k}"] = v

    @property
    def exit_code(self):
        if self.error is None:
            return EXIT_OK
        return EXIT_INPUT if isinstance(self.error, (ValueError, KeyError, OSError)) else EXIT_NUMERICAL

    def structured(self) -> str:
        return json.dumps({k: _jsonable(v) for k, v in self.entries.items()}, indent=1) + "\n"

    def render(self, fmt="text") -> str:
        if fmt == "structured":
            return self.structured()
        return "\n\n".join(self.text) + "\n"


def _jsonable(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, (tuple, list)):
        # keep the document flat: sequences become comma-joined scalars
        return ",".join(str(_jsonable(x)) for x in v)
    return v


def _stage(report: Report, name: str):
    report.entries["status.stage"] = name


def _fail(report: Report, exc: BaseException):
    report.error = exc
    report.entries["status.ok"] = False
    report.entries["status.error"] = f"{type(exc).__name__}: {exc}"
    report.text.append(f"ERROR during stage '{report.entries.get('status.stage')}': {exc}")
    return report


def format_marginal(fit, title) -> str:
    w = max(14, max(len(n) for n in fit.param_names) + 2)
    lines = [title, f"{'Parameter':<{w}}{'Estimate':>12}{'Std. error':>12}{'t-ratio':>10}"]
    for name, p, s, t in zip(fit.param_names, fit.params, fit.se, fit.t_ratios):
        lines.append(f"{name:<{w}}{p:>12.4f}{s:>12.4f}{t:>10.3f}")
    lines.append(f"LogL = {fit.loglik:.3f}   R^2 = {fit.r_squared:.3f}   n = {fit.nobs}   "
                 f"({format_month(fit.months[0])} to {format_month(fit.months[-1])})")
    return "\n".join(lines)


def format_ranking(ranking) -> str:
    lines = ["Copula family ranking (IFM on identical PITs)",
             f"{'Rank':<6}{'Family':<10}{'LogL':>10}{'AIC':>11}{'BIC':>11}  Parameters"]
    for r, f in enumerate(ranking, 1):
        params = ", ".join(f"{n}={p:.4f}" for n, p in zip(f.copula.param_names, f.params))
        lines.append(f"{r:<6}{f.family:<10}{f.loglik:>10.3f}{f.aic:>11.3f}{f.bic:>11.3f}  {params}")
    return "\n".join(lines)


def format_copula_fit(fit) -> str:
    lines = [f"IFM estimation results: {fit.family} copula ({fit.jackknife or 'no'} jackknife)",
             f"{'Parameter':<12}{'Estimate':>10}{'t-ratio':>10}{'AIC':>11}{'BIC':>11}{'LogL':>10}"]
    t = fit.t_ratios if fit.t_ratios is not None else [float("nan")] * fit.k
    for j, (name, p) in enumerate(zip(fit.param_names, fit.free_params)):
        tail = (f"{fit.aic:>11.3f}{fit.bic:>11.3f}{fit.loglik:>10.3f}" if j == 0 else "")
        lines.append(f"{name:<12}{p:>10.4f}{t[j]:>10.3f}" + tail)
    imp = fit.implied
    lines.append(f"Implied: tau = {imp['kendall_tau']:.4f}, rho_s = {imp['spearman_rho']:.4f}, "
                 f"lambda_l = {imp['lambda_lower']:.6f}, lambda_u = {imp['lambda_upper']:.6f}")
    if fit.boundary:
        lines.append("Estimate is at the independence boundary.")
    if fit.significant is not None:
        crit = ONE_SIDED_CRIT if fit.family == "clayton" else TWO_SIDED_CRIT
        side = "one-sided" if fit.family == "clayton" else "two-sided"
        for name, sig in zip(fit.param_names, fit.significant):
            lines.append(f"{name}: {'significant' if sig else 'not significant'} at 5% "
                         f"({side}, critical value {crit:.3f})")
    return "\n".join(lines)


# -- runs ------------------------------------------------------------------------

@dataclass
class _Inputs:
    returns: IndexSeries
    index: IndexSeries
    controls: dict
    extra_diag: dict


def _load_inputs(cfg: RunConfig) -> _Inputs:
    returns, index = cfg.returns.load(), cfg.index.load()
    controls = {}
    for ref in cfg.controls:
        s = ref.load()
        if ref.detrend:
            _, cycle = hp_filter(s.values, cfg.smoothing)
            s = s.with_values(cycle)
        controls[ref.name] = s
    # sub-indexes in the index file join the diagnostics grid
    cols = read_table(cfg.index.path)
    extra = {}
    for name in ("eni", "hni", "ini", "enni"):
        if name in cols and name != cfg.index.column.lower():
            extra[name] = read_series(cfg.index.path, name, name)
    for spec in (cfg.margin_x, cfg.margin_y):
        missing = [r for r in spec.regressors if r not in controls]
        if missing:
            raise ValueError(f"marginal regressors without a control series: {missing}")
    return _Inputs(returns, index, controls, extra)


def _fit_margins(cfg, inputs, spec_x=None, controls=None):
    controls = inputs.controls if controls is None else controls
    fx = fit_marginal(inputs.returns, controls, spec_x or cfg.margin_x,
                      n_starts=cfg.n_starts, seed=cfg.seed)
    fy = fit_marginal(inputs.index, controls, cfg.margin_y, n_starts=cfg.n_starts, seed=cfg.seed + 1)
    return fx, fy


def analyze(cfg: RunConfig) -> Report:
    """Run the full pipeline; failures leave a partial report with ``error`` set."""
    report = Report()
    try:
        _stage(report, "validate")
        cfg.validate()
        report.update("config.", {"seed": cfg.seed, "k": cfg.k, "lags": cfg.lags,
                                   "smoothing": cfg.smoothing, "jackknife": cfg.jackknife,
                                   "candidates": list(cfg.candidates),
                                   "family": cfg.family or "best-aic",
                                   "margin_x.regressors": list(cfg.margin_x.regressors),
                                   "margin_x.ar_lags": list(cfg.margin_x.ar_lags),
                                   "margin_y.regressors": list(cfg.margin_y.regressors),
                                   "margin_y.ar_lags": list(cfg.margin_y.ar_lags)})
        _stage(report, "load")
        inputs = _load_inputs(cfg)

        _stage(report, "diagnostics")
        named = {inputs.returns.label: inputs.returns, inputs.index.label: inputs.index,
                 **inputs.extra_diag, **inputs.controls}
        grid = rejection_grid(named, cfg.lags)
        for label, tests in grid.items():
            for key, res in tests.items():
                report.update(f"diagnostics.{label}.{key}.", res.to_report())
        report.text.append(format_rejection_grid(grid))

        _stage(report, "marginals")
        fx, fy = _fit_margins(cfg, inputs)
        for tag, fit, title in (("x", fx, "Returns marginal model"), ("y", fy, "News index marginal model")):
            report.update(f"margin.{tag}.", fit.to_report())
            report.entries[f"margin.{tag}.label"] = fit.label
            checks = residual_checks(fit, cfg.lags)
            for key, res in checks.items():
                report.update(f"margin.{tag}.checks.{key}.", res.to_report())
            report.text.append(format_marginal(fit, f"{title} ({fit.label})") + "\n" + "\n".join(
                f"  {k}: stat = {r.statistic:.4f}, p = {r.p_value:.4f}" for k, r in checks.items()))

        months, u, v, _, _ = _common_pits(fx, fy)
        report.update("pits.", {"nobs": int(months.size), "first_month": format_month(months[0]),
                                "last_month": format_month(months[-1])})

        _stage(report, "copula_table")
        table = copula_table(u, v, cfg.k)
        exc = excess_report(table)
        report.update("copula_table.", {"k": cfg.k, "n": table.n, "expected": table.expected,
                                        "chi_square": table.chi_square(),
                                        "max_excess_cell": list(exc.max_excess_cell),
                                        "max_excess": exc.max_excess,
                                        "max_abs_cell": list(exc.max_abs_cell)})
        for j in range(cfg.k):
            for i in range(cfg.k):
                report.entries[f"copula_table.cells.r{j + 1}c{i + 1}"] = int(table.counts[j, i])
        report.text.append("Empirical copula table (rows: news index bins, columns: return bins)\n"
                           + table.format())

        _stage(report, "selection")
        ranking = rank_copulas(u, v, cfg.candidates)
        for r, f in enumerate(ranking, 1):
            report.update(f"selection.rank{r}.", {"family": f.family, "loglik": f.loglik,
                                                  "aic": f.aic, "bic": f.bic, "k": f.k})
        report.entries["selection.best_aic"] = ranking[0].family
        report.entries["selection.best_bic"] = min(ranking, key=lambda f: f.bic).family
        report.text.append(format_ranking(ranking))

        _stage(report, "final_fit")
        family = cfg.family or ranking[0].family
        res = fit_ifm(None, None, cfg.margin_x, cfg.margin_y, family, margins=(fx, fy),
                      jackknife=None if cfg.jackknife == "none" else cfg.jackknife)
        final = res.copula_fit
        report.update("final.", final.to_report())
        lo, hi = tail_coefficients(final.copula)
        report.update("final.tail.", {"lambda_lower": lo, "lambda_upper": hi})
        report.text.append(format_copula_fit(final))

        if cfg.output_dir is not None:
            _stage(report, "write")
            out = Path(cfg.output_dir)
            out.mkdir(parents=True, exist_ok=True)
            write_table(out / "pits.csv", {"month": [format_month(m) for m in months],
                                           "u": list(u), "v": list(v)})
            (out / "report.json").write_text(report.structured())
        _stage(report, "done")
        report.entries["status.ok"] = True
    except (ValueError, KeyError, OSError, ConvergenceError, ArithmeticError,
            np.linalg.LinAlgError) as exc:
        return _fail(report, exc)
    return report


def _volume_series(cfg: RunConfig) -> IndexSeries:
    if cfg.volume is not None:
        return cfg.volume.load()
    cols = read_table(cfg.index.path)
    vol_cols = sorted(c for c in cols if c.startswith("volume_"))
    if not vol_cols:
        raise ValueError("no news volume: give 'volume' in the config or volume_* columns "
                         "in the index file")
    total = np.sum([np.asarray(cols[c], dtype=float) for c in vol_cols], axis=0)
    months = cols["month"]
    order = np.argsort(months, kind="stable")
    return IndexSeries.from_strings("volume", [months[i] for i in order], total[order])


def robustness(cfg: RunConfig) -> Report:
    """Reverse-causation checks with de-trended news volume.

    1. OLS of absolute returns on HP-detrended volume with robust SEs.
    2. Returns marginal re-estimated with detrended volume as an extra regressor.
    3. Copula re-estimated by IFM with that augmented margin.
    """
    report = Report()
    try:
        _stage(report, "validate")
        cfg.validate()
        _stage(report, "load")
        inputs = _load_inputs(cfg)
        volume = _volume_series(cfg)
        _, cycle = hp_filter(volume.values, cfg.smoothing)
        vol_dt = volume.with_values(cycle, label="volume_detrended")
        report.entries["config.smoothing"] = cfg.smoothing

        _stage(report, "volume_regression")
        r, vd = align(inputs.returns, vol_dt)
        reg = ols(np.abs(r.values), vd.values, robust=True, names=["volume_detrended"])
        sig = bool(abs(reg.t_ratios[1]) > TWO_SIDED_CRIT)
        report.update("volume_regression.", {
            "nobs": reg.n, "coefficient": float(reg.coefficients[1]), "robust_se": float(reg.se[1]),
            "robust_t_ratio": float(reg.t_ratios[1]), "p_value": float(reg.p_values[1]),
            "significant_5pct": sig, "r_squared": reg.r_squared})
        report.text.append(
            "Regression of |returns| on de-trended news volume (robust SEs)\n"
            f"coefficient = {reg.coefficients[1]:.6g}, robust t = {reg.t_ratios[1]:.3f}, "
            f"p = {reg.p_values[1]:.4f} -> {'significant' if sig else 'insignificant'} at 5%")

        _stage(report, "augmented_marginal")
        controls = dict(inputs.controls)
        controls[vol_dt.label] = vol_dt
        spec_x = MarginalSpec(cfg.margin_x.regressors + (vol_dt.label,), cfg.margin_x.ar_lags,
                              cfg.margin_x.garch)
        fx, fy = _fit_margins(cfg, inputs, spec_x, controls)
        report.update("augmented_margin.", fx.to_report())
        report.text.append(format_marginal(fx, "Returns marginal model with de-trended volume"))

        _stage(report, "copula_refit")
        family = cfg.family
        if family is None:
            _, u, v, _, _ = _common_pits(fx, fy)
            family = rank_copulas(u, v, cfg.candidates)[0].family
        res = fit_ifm(None, None, spec_x, cfg.margin_y, family, margins=(fx, fy),
                      jackknife=None if cfg.jackknife == "none" else cfg.jackknife)
        final = res.copula_fit
        report.update("copula_refit.", final.to_report())
        text = format_copula_fit(final)
        if final.significant is not None:
            name, t = final.param_names[0], final.t_ratios[0]
            verdict = "remains significant" if final.significant[0] else "is no longer significant"
            text += f"\n{name} {verdict} with the new t-ratio of {t:.2f}"
        report.text.append(text)
        _stage(report, "done")
        report.entries["status.ok"] = True
    except (ValueError, KeyError, OSError, ConvergenceError, ArithmeticError,
            np.linalg.LinAlgError) as exc:
        return _fail(report, exc)
    return report
