"""Conditional copula analysis of news sentiment and returns.

Builds a news index from classified story counts, fits AR-X/GARCH(1,1)
marginal models, estimates copulas by two-step maximum likelihood and
reports tail dependence, rank correlations and diagnostics.
"""

__version__ = "0.1.0"

from ._errors import ConvergenceError, NoNewsMonthError
from .auxiliary import HP_MONTHLY, HP_MONTHLY_ALT, RegressionResult, hp_filter, ols
from .copulas import (FAMILIES, ClaytonCopula, Copula, GaussianCopula, GumbelCopula, SJCCopula,
                      StudentTCopula, kendall_tau_quad, make_copula, rank_correlations,
                      spearman_rho_quad, tail_coefficients)
from .diagnostics import (TestResult, adf_test, arch_lm_test, ks_test, ljung_box_test,
                          rejection_grid)
from .empirical_copula import EmpiricalCopulaTable, copula_table, excess_report
from .estimation import (CopulaFit, IFMResult, fit_cml, fit_copula, fit_ifm, jackknife_se,
                         rank_copulas, select_family)
from .marginals import MarginalFit, MarginalSpec, fit_marginal, pit_transform, select_ar_lags
from .news_index import (THEMES, MonthlyNewsCounts, NewsIndex, build_index_series,
                         combined_index, sub_index)
from .series import IndexSeries, align, read_series, write_series
from .simulate import (CorpusConfig, ExogSpec, MarginParams, SimulationConfig, make_rng,
                       simulate_garch, simulate_news_corpus, simulate_system)
