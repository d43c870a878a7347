"""Command-line front end.

Exit status is 0 on success, 1 on a numerical failure (non-convergence,
singular matrices) and 2 on invalid input.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from ._errors import ConvergenceError
from .auxiliary import HP_MONTHLY, hp_filter
from .copulas import FAMILIES
from .diagnostics import format_rejection_grid, rejection_grid
from .empirical_copula import copula_table, excess_report
from .estimation import copula_jackknife, fit_copula, fit_cml, fit_ifm, rank_copulas, _common_pits
from .marginals import MarginalSpec, fit_marginal, select_ar_lags
from .news_index import build_index_series, count_totals, read_counts, write_counts, write_index
from .pipeline import (EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK, Report, analyze, format_copula_fit,
                       format_marginal, format_ranking, load_run_config, robustness, _fit_margins,
                       _load_inputs)
from .series import IndexSeries, format_month, read_series, read_table, write_series, write_table
from .simulate import (CorpusConfig, config_from_dict, simulate_news_corpus, simulate_system)

logger = logging.getLogger("newscopula")


def _int_list(text):
    if text is None or text == "":
        return ()
    return tuple(int(t) for t in text.split(","))


def _str_list(text):
    if text is None:
        return None
    return tuple(t.strip() for t in text.split(",") if t.strip())


def _series_ref(text, default_column="value"):
    """``path[:column]``"""
    path, _, column = text.partition(":")
    column = column or default_column
    return read_series(path, column, column)


def _emit(report: Report, fmt, out=None):
    text = report.render(fmt)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# -- subcommands -----------------------------------------------------------------

def cmd_build_index(args):
    records = read_counts(args.counts)
    weights = [float(w) for w in args.weights.split(",")] if args.weights else None
    index = build_index_series(records, weights)
    if args.output:
        write_index(args.output, index)
    report = Report()
    totals = count_totals(records)
    lines = ["Story counts by theme", f"{'Theme':<12}{'Positive':>10}{'Negative':>10}"
             f"{'Neutral':>10}{'Total':>10}"]
    for theme, (pos, neg, neu, tot) in totals.items():
        report.update(f"totals.{theme}.", {"positive": pos, "negative": neg, "neutral": neu,
                                           "total": tot})
        lines.append(f"{theme:<12}{pos:>10}{neg:>10}{neu:>10}{tot:>10}")
    report.text.append("\n".join(lines))
    cols = index.as_columns()
    names = ["eni", "hni", "ini", "enni", "mni"]
    rows = [f"{'Month':<9}" + "".join(f"{n.upper():>9}" for n in names)]
    for i, m in enumerate(cols["month"]):
        rows.append(f"{m:<9}" + "".join(f"{cols[n][i]:>9.4f}" for n in names))
        for n in names:
            report.entries[f"index.{m}.{n}"] = float(cols[n][i])
    report.entries["index.months"] = len(cols["month"])
    report.text.append("\n".join(rows))
    _emit(report, args.format, args.report)
    return EXIT_OK


def cmd_diagnose(args):
    cols = read_table(args.file)
    if "month" not in cols:
        raise ValueError(f"{args.file}: missing column 'month'")
    wanted = _str_list(args.columns) or tuple(c for c in cols if c != "month")
    detrend = set(_str_list(args.detrend) or ())
    named = {}
    for c in wanted:
        s = read_series(args.file, c, c)
        if c in detrend:
            s = s.with_values(hp_filter(s.values, args.smoothing)[1], label=f"{c}_detrended")
        named[s.label] = s
    grid = rejection_grid(named, args.lags) if args.regression == "c" else {
        k: _diagnose_reg(s, args.lags, args.regression) for k, s in named.items()}
    report = Report()
    for label, tests in grid.items():
        for key, res in tests.items():
            report.update(f"diagnostics.{label}.{key}.", res.to_report())
    report.text.append(format_rejection_grid(grid))
    _emit(report, args.format, args.report)
    return EXIT_OK


def _diagnose_reg(series, lags, regression):
    from .diagnostics import adf_test, arch_lm_test, ljung_box_test
    return {"unit_root": adf_test(series, lags, regression),
            "heteroskedasticity": arch_lm_test(series, lags),
            "autocorrelation": ljung_box_test(series, lags)}


def cmd_fit_marginal(args):
    series = _series_ref(f"{args.file}:{args.column}")
    regressors = [_series_ref(r) for r in args.regressor or []]
    if args.select_lags:
        lags = select_ar_lags(series, args.select_lags, regressors=regressors,
                              spec_regressors=tuple(r.label for r in regressors))
    else:
        lags = _int_list(args.ar_lags)
    spec = MarginalSpec(tuple(r.label for r in regressors), lags, not args.no_garch)
    fit = fit_marginal(series, regressors, spec, n_starts=args.n_starts, seed=args.seed)
    report = Report()
    report.update("margin.", fit.to_report())
    report.text.append(format_marginal(fit, f"Marginal model ({fit.label})"))
    if args.pit_out:
        write_series(args.pit_out, fit.pit_series().with_values(fit.pit, label="pit"))
    _emit(report, args.format, args.report)
    return EXIT_OK


def _read_pair(path, ucol, vcol):
    return _series_ref(f"{path}:{ucol}"), _series_ref(f"{path}:{vcol}")


def cmd_copula_table(args):
    u, v = _read_pair(args.file, args.u, args.v)
    if not np.array_equal(u.months, v.months):
        raise ValueError("u and v columns cover different months")
    table = copula_table(u.values, v.values, args.k)
    exc = excess_report(table)
    report = Report()
    report.update("copula_table.", {"k": args.k, "n": table.n, "expected": table.expected,
                                    "chi_square": table.chi_square(),
                                    "max_excess_cell": list(exc.max_excess_cell),
                                    "max_excess": exc.max_excess,
                                    "max_abs_cell": list(exc.max_abs_cell)})
    for j in range(args.k):
        for i in range(args.k):
            report.entries[f"copula_table.cells.r{j + 1}c{i + 1}"] = int(table.counts[j, i])
    report.text.append(table.format())
    if args.output:
        Path(args.output).write_text(table.to_delimited())
    _emit(report, args.format, args.report)
    return EXIT_OK


def _config_margins(args):
    cfg = load_run_config(args.config, seed=args.seed)
    cfg.validate()
    inputs = _load_inputs(cfg)
    return cfg, _fit_margins(cfg, inputs)


def cmd_fit_copula(args):
    report = Report()
    if args.config:
        cfg, margins = _config_margins(args)
        jk = args.jackknife or cfg.jackknife
        res = fit_ifm(None, None, cfg.margin_x, cfg.margin_y, args.family, margins=margins,
                      jackknife=None if jk == "none" else jk, fixed_df=args.df)
        fit = res.copula_fit
    elif args.file:
        u, v = _read_pair(args.file, args.u, args.v)
        if args.jackknife == "full":
            raise ValueError("the full two-step jackknife needs the marginal models; "
                             "pass --config instead of a pseudo-observation file")
        if args.method == "cml":
            fit = fit_cml(u.values, v.values, args.family, fixed_df=args.df,
                          jackknife="copula" if args.jackknife == "copula" else None)
        else:
            fit = fit_copula(u.values, v.values, args.family, fixed_df=args.df)
            if args.jackknife == "copula":
                copula_jackknife(fit, u.values, v.values)
    else:
        raise ValueError("give a pseudo-observation file or --config")
    report.update("copula.", fit.to_report())
    report.text.append(format_copula_fit(fit))
    _emit(report, args.format, args.report)
    return EXIT_OK


def cmd_select_copula(args):
    candidates = _str_list(args.candidates) or FAMILIES
    if args.config:
        _, (fx, fy) = _config_margins(args)
        _, u, v, _, _ = _common_pits(fx, fy)
    elif args.file:
        su, sv = _read_pair(args.file, args.u, args.v)
        u, v = su.values, sv.values
    else:
        raise ValueError("give a pseudo-observation file or --config")
    ranking = rank_copulas(u, v, candidates)
    report = Report()
    for r, f in enumerate(ranking, 1):
        report.update(f"selection.rank{r}.", {"family": f.family, "loglik": f.loglik, "aic": f.aic,
                                              "bic": f.bic, "k": f.k})
    report.entries["selection.best_aic"] = ranking[0].family
    report.entries["selection.best_bic"] = min(ranking, key=lambda f: f.bic).family
    report.text.append(format_ranking(ranking))
    _emit(report, args.format, args.report)
    return EXIT_OK


def _run_overrides(args):
    return dict(seed=args.seed, k=args.k, lags=args.lags, smoothing=args.smoothing,
                candidates=_str_list(args.candidates), family=args.family,
                jackknife=args.jackknife, format=args.format,
                output_dir=Path(args.output_dir) if args.output_dir else None)


def _run(fn, args):
    cfg = load_run_config(args.config, **_run_overrides(args))
    report = fn(cfg)
    _emit(report, cfg.format, args.report)
    if report.error is not None:
        print(f"error: {report.entries.get('status.error')}", file=sys.stderr)
    return report.exit_code


def cmd_analyze(args):
    return _run(analyze, args)


def cmd_robustness(args):
    return _run(robustness, args)


def cmd_simulate(args):
    doc = json.loads(Path(args.config).read_text())
    if args.seed is not None:
        doc["seed"] = args.seed
    if "corpus" in doc:
        c = dict(doc["corpus"])
        cfg = CorpusConfig(seed=int(doc.get("seed", c.pop("seed", 0))), **{k: v for k, v in c.items()
                                                                           if k != "seed"})
        records = simulate_news_corpus(cfg)
        write_counts(args.output, records)
        print(f"wrote {len(records)} theme-month records to {args.output}")
        return EXIT_OK
    if args.length is not None:
        doc["length"] = args.length
    cfg = config_from_dict(doc)
    sim = simulate_system(cfg)
    cols = {"month": sim.x.month_labels, sim.x.label: list(sim.x.values),
            sim.y.label: list(sim.y.values)}
    for lab, s in sorted(sim.exog.items()):
        cols[lab] = list(s.values)
    cols["u_true"], cols["v_true"] = list(sim.u), list(sim.v)
    write_table(args.output, cols)
    print(f"wrote {cfg.length} months to {args.output}")
    return EXIT_OK


# -- parser ----------------------------------------------------------------------

def _add_output(p):
    p.add_argument("--format", choices=("text", "structured"), default=None,
                   help="report format (default: text)")
    p.add_argument("--report", help="write the report to this file instead of stdout")


def _add_run_flags(p):
    p.add_argument("config", help="JSON run configuration")
    p.add_argument("--seed", type=int)
    p.add_argument("--k", type=int, help="bins per axis of the empirical copula table")
    p.add_argument("--lags", type=int, help="lags for the ARCH-LM, Ljung-Box and ADF tests")
    p.add_argument("--smoothing", type=float, help=f"HP smoothing (default {HP_MONTHLY:g})")
    p.add_argument("--candidates", help="comma-separated copula families")
    p.add_argument("--family", choices=FAMILIES, help="final family (default: best AIC)")
    p.add_argument("--jackknife", choices=("full", "copula", "none"))
    p.add_argument("--output-dir")
    _add_output(p)


def build_parser():
    parser = argparse.ArgumentParser(prog="newscopula", description=__doc__.splitlines()[0],
                                     allow_abbrev=False)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-index", help="news sub-indexes and MNI from story counts")
    p.add_argument("counts", help="month,theme,positive,negative,neutral file")
    p.add_argument("-o", "--output", help="index file to write")
    p.add_argument("--weights", help="four comma-separated theme weights (default equal)")
    _add_output(p)
    p.set_defaults(func=cmd_build_index)

    p = sub.add_parser("diagnose", help="unit-root, ARCH and autocorrelation rejection grid")
    p.add_argument("file")
    p.add_argument("--columns", help="comma-separated columns (default: all)")
    p.add_argument("--lags", type=int, default=12)
    p.add_argument("--regression", choices=("c", "ct", "n"), default="c",
                   help="ADF deterministic terms")
    p.add_argument("--detrend", help="columns to HP-detrend first")
    p.add_argument("--smoothing", type=float, default=HP_MONTHLY)
    _add_output(p)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("fit-marginal", help="AR-X / GARCH(1,1) marginal model")
    p.add_argument("file")
    p.add_argument("--column", default="value")
    p.add_argument("--regressor", action="append", help="path[:column]; repeatable")
    p.add_argument("--ar-lags", default="", help="comma-separated AR lags, e.g. 1,2")
    p.add_argument("--select-lags", type=int, help="general-to-specific AR lag search from this order")
    p.add_argument("--no-garch", action="store_true")
    p.add_argument("--n-starts", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pit-out", help="write the PIT series here")
    _add_output(p)
    p.set_defaults(func=cmd_fit_marginal)

    p = sub.add_parser("copula-table", help="empirical copula (rank-bin) table")
    p.add_argument("file", help="file with the paired columns")
    p.add_argument("--u", default="u")
    p.add_argument("--v", default="v")
    p.add_argument("--k", type=int, default=4)
    p.add_argument("-o", "--output", help="write the table as a delimited file")
    _add_output(p)
    p.set_defaults(func=cmd_copula_table)

    for name, func, helptext in (("fit-copula", cmd_fit_copula, "fit one copula family"),
                                 ("select-copula", cmd_select_copula, "rank copula families by AIC")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("file", nargs="?", help="pseudo-observation file (columns --u/--v)")
        p.add_argument("--config", help="run configuration; fits the margins first (IFM)")
        p.add_argument("--u", default="u")
        p.add_argument("--v", default="v")
        p.add_argument("--seed", type=int)
        if name == "fit-copula":
            p.add_argument("--family", choices=FAMILIES, default="clayton")
            p.add_argument("--method", choices=("ifm", "cml"), default="ifm",
                           help="cml ranks the two columns instead of treating them as PITs")
            p.add_argument("--jackknife", choices=("full", "copula", "none"))
            p.add_argument("--df", type=float, help="fix the t copula degrees of freedom")
        else:
            p.add_argument("--candidates", help="comma-separated families")
        _add_output(p)
        p.set_defaults(func=func)

    p = sub.add_parser("analyze", help="full pipeline report")
    _add_run_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("robustness", help="news-volume robustness checks")
    _add_run_flags(p)
    p.set_defaults(func=cmd_robustness)

    p = sub.add_parser("simulate", help="simulate a bivariate system or a news corpus")
    p.add_argument("config", help="JSON simulation config")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--length", type=int)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "format", "text") is None and args.command not in ("analyze", "robustness"):
        args.format = "text"
    try:
        return args.func(args)
    except (ConvergenceError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
