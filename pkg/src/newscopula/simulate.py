"""Seeded generators for every model class in the package.

All randomness comes from counter-based Philox streams keyed by
``(seed, *keys)``, so replicate ``i`` of an experiment is reproducible no
matter in which order, or in which process, replicates are generated.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import special

from .copulas import Copula, make_copula
from .news_index import THEMES, MonthlyNewsCounts
from .series import IndexSeries, parse_month

BURN_IN = 500


def make_rng(seed, *keys) -> np.random.Generator:
    """Independent generator for ``(seed, *keys)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, keys)])))


@dataclass(frozen=True)
class ExogSpec:
    """Gaussian AR(1) exogenous regressor."""

    label: str
    phi: float = 0.5
    sd: float = 1.0
    mean: float = 0.0


@dataclass(frozen=True)
class MarginParams:
    """True parameters of an AR-X / GARCH(1,1) margin."""

    const: float = 0.0
    ar: tuple = ()
    exog: tuple = ()          # (ExogSpec, beta) pairs
    omega: float = 1.0
    persistence: float = 0.0
    arch: float = 0.0

    def __post_init__(self):
        if not self.omega > 0 or self.persistence < 0 or self.arch < 0:
            raise ValueError("GARCH parameters need omega > 0 and nonnegative coefficients")
        if self.persistence + self.arch >= 1:
            raise ValueError("persistence + arch must be below 1")
        object.__setattr__(self, "ar", tuple(float(a) for a in self.ar))
        object.__setattr__(self, "exog", tuple(self.exog))

    @property
    def ar_lags(self):
        return tuple(range(1, len(self.ar) + 1))

    @property
    def unconditional_variance(self):
        return self.omega / (1 - self.persistence - self.arch)


@dataclass(frozen=True)
class SimulationConfig:
    seed: int
    length: int
    margin_x: MarginParams = field(default_factory=MarginParams)
    margin_y: MarginParams = field(default_factory=MarginParams)
    copula: Copula = None
    start_month: str = "1999-01"
    labels: tuple = ("x", "y")
    burn_in: int = BURN_IN

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("length must be positive")


@dataclass(frozen=True)
class SimulatedSystem:
    x: IndexSeries
    y: IndexSeries
    u: np.ndarray
    v: np.ndarray
    sigma2_x: np.ndarray
    sigma2_y: np.ndarray
    exog: dict

    @property
    def regressors(self):
        return list(self.exog.values())


def _simulate_exog(spec: ExogSpec, n, rng):
    z = rng.standard_normal(n)
    out = np.empty(n)
    prev = 0.0
    innov_sd = spec.sd * np.sqrt(1 - spec.phi ** 2)
    for t in range(n):
        prev = spec.phi * prev + innov_sd * z[t]
        out[t] = prev
    return out + spec.mean


def simulate_margin(params: MarginParams, z, exog_values):
    """Propagate AR-X mean and GARCH variance recursions for innovations ``z``."""
    n = z.size
    p = len(params.ar)
    ar = np.asarray(params.ar)
    mean_exog = np.full(n, params.const)
    for (spec, beta) in params.exog:
        mean_exog += beta * exog_values[spec.label]
    y = np.zeros(n)
    s2 = np.empty(n)
    e_prev2 = s2_prev = params.unconditional_variance
    phi = params.omega, params.persistence, params.arch
    for t in range(n):
        s2_prev = phi[0] + phi[1] * s2_prev + phi[2] * e_prev2
        e = np.sqrt(s2_prev) * z[t]
        acc = mean_exog[t] + e
        for j in range(p):
            if t - j - 1 >= 0:
                acc += ar[j] * y[t - j - 1]
        y[t] = acc
        s2[t] = s2_prev
        e_prev2 = e * e
    return y, s2


def simulate_system(config: SimulationConfig) -> SimulatedSystem:
    """Bivariate system whose innovations are linked by ``config.copula``.

    Copula draws ``(u, v)`` become standard normal innovations for the
    ``x`` and ``y`` margins respectively.  The first ``burn_in`` observations
    are discarded.  ``config.copula=None`` means independence.
    """
    n_total = config.length + config.burn_in
    rng_cop = make_rng(config.seed, 0)
    if config.copula is None:
        uv = rng_cop.uniform(size=(n_total, 2))
    else:
        uv = config.copula.sample(n_total, rng_cop)
    exog_specs = {}
    for params in (config.margin_x, config.margin_y):
        for spec, _ in params.exog:
            exog_specs[spec.label] = spec
    exog_values = {lab: _simulate_exog(spec, n_total, make_rng(config.seed, 1, i))
                   for i, (lab, spec) in enumerate(sorted(exog_specs.items()))}
    z = special.ndtri(uv)
    x, s2x = simulate_margin(config.margin_x, z[:, 0], exog_values)
    y, s2y = simulate_margin(config.margin_y, z[:, 1], exog_values)
    keep = slice(config.burn_in, None)
    months = parse_month(config.start_month) + np.arange(config.length)
    return SimulatedSystem(
        x=IndexSeries(config.labels[0], months, x[keep]),
        y=IndexSeries(config.labels[1], months, y[keep]),
        u=uv[keep, 0], v=uv[keep, 1], sigma2_x=s2x[keep], sigma2_y=s2y[keep],
        exog={lab: IndexSeries(lab, months, vals[keep]) for lab, vals in exog_values.items()},
    )


def simulate_garch(n, omega, persistence, arch, seed=0, burn_in=BURN_IN):
    """Zero-mean GARCH(1,1) path with normal innovations; returns (eps, sigma2)."""
    params = MarginParams(omega=omega, persistence=persistence, arch=arch)
    z = make_rng(seed, 2).standard_normal(n + burn_in)
    y, s2 = simulate_margin(params, z, {})
    return y[burn_in:], s2[burn_in:]


@dataclass(frozen=True)
class CorpusConfig:
    """Synthetic news corpus.

    ``intensity`` gives each theme's mean monthly story count (Poisson).
    ``balance`` in [-1, 1] tilts non-neutral stories toward positive (+1) or
    negative (-1): a scalar, a per-month array, or a per-theme mapping of
    either.  ``neutral_share`` is the probability that a story is neutral.
    """

    seed: int
    n_months: int
    start_month: str = "1999-01"
    intensity: dict = field(default_factory=lambda: {"employment": 38.0, "housing": 10.0,
                                                     "industry": 13.0, "energy": 45.0})
    balance: object = 0.0
    neutral_share: float = 0.1


def simulate_news_corpus(config: CorpusConfig) -> list[MonthlyNewsCounts]:
    start = parse_month(config.start_month)
    records = []
    for k, theme in enumerate(THEMES):
        rng = make_rng(config.seed, 3, k)
        bal = config.balance[theme] if isinstance(config.balance, dict) else config.balance
        bal = np.broadcast_to(np.asarray(bal, dtype=float), (config.n_months,))
        if np.any(np.abs(bal) > 1):
            raise ValueError("balance must lie in [-1, 1]")
        volume = rng.poisson(config.intensity[theme], size=config.n_months)
        neutral = rng.binomial(volume, config.neutral_share)
        positive = rng.binomial(volume - neutral, (1 + bal) / 2)
        negative = volume - neutral - positive
        for m in range(config.n_months):
            records.append(MonthlyNewsCounts(start + m, theme, int(positive[m]),
                                             int(negative[m]), int(neutral[m])))
    records.sort(key=lambda r: (r.month, THEMES.index(r.theme)))
    return records


# -- config files --------------------------------------------------------------

def _margin_from_dict(d):
    d = dict(d or {})
    exog = [(ExogSpec(**e["spec"]), float(e["beta"])) for e in d.pop("exog", [])]
    return MarginParams(exog=tuple(exog), **d)


def config_from_dict(d) -> SimulationConfig:
    d = dict(d)
    cop = d.pop("copula", None)
    if cop is not None:
        cop = make_copula(cop["family"], *cop["params"])
    return SimulationConfig(
        seed=int(d.pop("seed")), length=int(d.pop("length")),
        margin_x=_margin_from_dict(d.pop("margin_x", None)),
        margin_y=_margin_from_dict(d.pop("margin_y", None)),
        copula=cop, labels=tuple(d.pop("labels", ("x", "y"))), **d,
    )


def load_simulation_config(path) -> SimulationConfig:
    """Read a JSON simulation config.

    Example::

        {"seed": 1, "length": 180,
         "margin_x": {"const": 0.008, "omega": 0.0002, "persistence": 0.76, "arch": 0.2},
         "margin_y": {"const": 0.025, "ar": [0.243, 0.279], "omega": 0.019,
                      "persistence": 0.497, "arch": 0.088},
         "copula": {"family": "clayton", "params": [0.5]}}
    """
    return config_from_dict(json.loads(Path(path).read_text()))
