"""Rescaled bootstrap for survey data and Poisson null simulation for registries.

Every replicate draws from its own generator, spawned from one master seed
by replicate index, so replicate ``b`` is the same no matter how or in what
order replicates are evaluated.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import core
from .core import GroupedDistribution, IndexParams, IndexValue
from .errors import InvalidInput
from .inference import (
    IndexEstimate,
    Method,
    RegistryRates,
    SurveyMicrodata,
    normal_interval,
    psu_group_totals,
    psu_layout,
    survey_totals,
    renyi_from_totals,
)


@dataclass(frozen=True)
class BootstrapConfig:
    replicates: int = 1000
    seed: int = 0
    interval: str = "percentile"
    level: float = 0.95
    workers: int = 1

    def __post_init__(self):
        if self.replicates < 2:
            raise InvalidInput("at least 2 replicates are required")
        if self.interval not in ("percentile", "normal"):
            raise InvalidInput(f"unknown interval type {self.interval!r}")
        if not 0 < self.level < 1:
            raise InvalidInput("level must lie in (0, 1)")


@dataclass(frozen=True)
class NullSimConfig:
    """Null simulation settings.

    ``count_recovery`` is ``"se_inversion"`` (effective counts
    ``(rate / SE)^2``) or ``"age_strata"`` (Poisson counts per age stratum
    from :class:`RegistryRates`).
    """

    replicates: int = 1000
    seed: int = 0
    pooled_rate_rule: str = "population_weighted"
    count_recovery: str = "se_inversion"

    def __post_init__(self):
        if self.replicates < 2:
            raise InvalidInput("at least 2 replicates are required")
        if self.pooled_rate_rule != "population_weighted":
            raise InvalidInput(f"unknown pooled rate rule {self.pooled_rate_rule!r}")
        if self.count_recovery not in ("se_inversion", "age_strata"):
            raise InvalidInput(f"unknown count recovery {self.count_recovery!r}")


def replicate_generators(seed: int, n: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def _map(fn, items, workers):
    if workers <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(fn, items))


class _SurveyResampler:
    """Cluster totals per (PSU, group) and the rescaled draw for one replicate."""

    def __init__(self, data: SurveyMicrodata, params: IndexParams):
        data.check_design()
        layout = psu_layout(data)
        self.t0, self.t1 = psu_group_totals(data, layout)
        self.strata = [np.flatnonzero(layout.stratum_of_psu == s) for s in np.unique(layout.stratum_of_psu)]
        self.n_psu = layout.n_psu
        self.params = params

    def factors(self, rng: np.random.Generator) -> np.ndarray:
        f = np.zeros(self.n_psu)
        for psus in self.strata:
            c = len(psus)
            picks = rng.integers(0, c, size=c - 1)
            f[psus] = np.bincount(picks, minlength=c) * (c / (c - 1))
        return f

    def statistic(self, factors: np.ndarray) -> float:
        u0 = factors @ self.t0
        u1 = factors @ self.t1
        keep = u0 > 0
        return _replicate_ri(u0[keep], u1[keep] / u0[keep], self.params.alpha, self.params.nu)

    def replicates(self, seed: int, n: int, workers: int = 1) -> np.ndarray:
        gens = replicate_generators(seed, n)
        return np.array(_map(lambda g: self.statistic(self.factors(g)), gens, workers))


def _summarize(value: IndexValue, reps: np.ndarray, cfg: BootstrapConfig) -> IndexEstimate:
    se = float(np.std(reps, ddof=1)) if np.all(np.isfinite(reps)) else math.inf
    if cfg.interval == "percentile":
        tail = (1.0 - cfg.level) / 2.0
        lo, hi = np.quantile(reps, [tail, 1.0 - tail])
        interval = (float(lo), float(hi))
    else:
        interval = normal_interval(value.value, se, cfg.level)
    return IndexEstimate(value, se, interval, Method.BOOTSTRAP, cfg.level)


def rescaled_bootstrap(data: SurveyMicrodata, params: IndexParams, cfg: BootstrapConfig = BootstrapConfig()):
    """Rescaled bootstrap over clusters within strata.

    Each replicate draws ``C_s - 1`` clusters with replacement in every
    stratum and scales weights by ``C_s / (C_s - 1)`` times the draw
    multiplicity.  Returns ``(estimate, replicate_values)``.
    """
    resampler = _SurveyResampler(data, params)
    value = renyi_from_totals(survey_totals(data, drop_empty=True), params)
    reps = resampler.replicates(cfg.seed, cfg.replicates, cfg.workers)
    return _summarize(value, reps, cfg), reps


@dataclass(frozen=True)
class DifferenceResult:
    difference: float
    interval: tuple[float, float]
    p_value: float
    replicates: np.ndarray


def bootstrap_difference(
    data_a: SurveyMicrodata, data_b: SurveyMicrodata, params: IndexParams, cfg: BootstrapConfig = BootstrapConfig()
) -> DifferenceResult:
    """Bootstrap distribution of ``RI(a) - RI(b)`` for independent samples.

    The two samples draw from independent child streams of ``cfg.seed``.
    The p-value is two-sided, from where the replicate differences cross 0.
    """
    seed_a, seed_b = (int(s.generate_state(1)[0]) for s in np.random.SeedSequence(cfg.seed).spawn(2))
    ra = _SurveyResampler(data_a, params)
    rb = _SurveyResampler(data_b, params)
    va = renyi_from_totals(survey_totals(data_a, drop_empty=True), params).value
    vb = renyi_from_totals(survey_totals(data_b, drop_empty=True), params).value
    diffs = ra.replicates(seed_a, cfg.replicates, cfg.workers) - rb.replicates(seed_b, cfg.replicates, cfg.workers)
    tail = (1.0 - cfg.level) / 2.0
    lo, hi = np.quantile(diffs, [tail, 1.0 - tail])
    below = int(np.sum(diffs <= 0))
    above = int(np.sum(diffs >= 0))
    p = min(1.0, 2.0 * (1 + min(below, above)) / (cfg.replicates + 1))
    return DifferenceResult(va - vb, (float(lo), float(hi)), p, diffs)


@dataclass(frozen=True)
class NullTestResult:
    observed: IndexValue
    null_values: np.ndarray
    p_value: float


def effective_counts(dist: GroupedDistribution, std_errors) -> np.ndarray:
    """Crude-Poisson inversion ``(rate / SE)^2`` of published rates and SEs."""
    se = np.asarray(std_errors, dtype=float)
    y = dist.means
    if se.shape != y.shape or np.any(~(se > 0)) or np.any(~(y > 0)):
        raise InvalidInput("count recovery needs positive rates and standard errors for every group")
    return (y / se) ** 2


def poisson_null_test(
    dist: GroupedDistribution,
    params: IndexParams,
    cfg: NullSimConfig = NullSimConfig(),
    *,
    std_errors=None,
    registry: RegistryRates | None = None,
) -> NullTestResult:
    """Test independence of rate and SES group by Poisson simulation.

    Under the null every group shares the population-weighted pooled rate
    (age-specific pooled rates with ``count_recovery="age_strata"``).  The
    one-sided p-value counts null replicates at or above the observed index
    with the add-one rule, so it lies in ``[1 / (B + 1), 1]``.
    """
    observed = core.renyi_index(dist, params)
    shares = dist.shares
    alpha, nu = params.alpha, params.nu
    gens = replicate_generators(cfg.seed, cfg.replicates)

    if cfg.count_recovery == "se_inversion":
        if std_errors is None:
            raise InvalidInput("se_inversion count recovery needs standard errors")
        exposure = effective_counts(dist, std_errors) / dist.means
        pooled = dist.population_mean

        def draw(rng):
            return rng.poisson(pooled * exposure) / exposure

    else:
        if registry is None:
            raise InvalidInput("age_strata count recovery needs registry rates")
        if registry.n_groups != len(dist):
            raise InvalidInput("registry and distribution disagree on the number of groups")
        n = registry.denominators
        person_units = n / registry.rate_scale
        pooled_k = (registry.crude_rates * n).sum(axis=0) / n.sum(axis=0)
        expected = pooled_k[None, :] * person_units
        w = registry.age_weights

        def draw(rng):
            return (rng.poisson(expected) / person_units) @ w

    null = np.array([_replicate_ri(shares, draw(g), alpha, nu) for g in gens])
    exceed = int(np.sum(null >= observed.value))
    p = (1 + exceed) / (cfg.replicates + 1)
    return NullTestResult(observed, null, p)


def _replicate_ri(shares, means, alpha, nu) -> float:
    # a replicate with no cases at all has no disparity to measure
    if not np.any(means > 0):
        return 0.0
    return core.renyi_from_arrays(shares, means, alpha, nu)
