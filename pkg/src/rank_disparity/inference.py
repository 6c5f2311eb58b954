"""Analytic standard errors for the rank-dependent Renyi index.

Two designs are covered:

* complex surveys -- the index is rewritten in weighted design totals and
  linearized; per-observation scores feed a with-replacement stratified
  cluster variance of a total;
* registries -- age-adjusted Poisson rates with a delta-method variance
  in the group means (population shares held fixed).
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import core
from .core import GroupedDistribution, IndexKind, IndexParams, IndexValue, is_alpha_one
from .errors import DegenerateTest, DesignError, DomainError, EmptyGroup, InvalidInput


class Method(str, enum.Enum):
    LINEARIZATION = "linearization"
    DELTA_METHOD = "delta_method"
    BOOTSTRAP = "bootstrap"
    NULL_SIMULATION = "null_simulation"


@dataclass(frozen=True)
class IndexEstimate:
    value: IndexValue
    std_error: float
    interval: tuple[float, float]
    method: Method
    level: float = 0.95

    def __post_init__(self):
        if self.std_error < 0:
            raise InvalidInput("standard error must be nonnegative")


def normal_interval(value: float, se: float, level: float) -> tuple[float, float]:
    z = stats.norm.ppf(0.5 + level / 2.0)
    return (value - z * se, value + z * se)


# --------------------------------------------------------------------------
# Survey microdata
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SurveyMicrodata:
    """One row per sampled person.

    Clusters (PSUs) are nested in strata: the pair ``(stratum, cluster)``
    identifies a PSU.  ``group`` holds 1-based SES group indices, lowest SES
    first.
    """

    stratum: np.ndarray
    cluster: np.ndarray
    weight: np.ndarray
    y: np.ndarray
    group: np.ndarray
    n_groups: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        arrays = {}
        for name in ("stratum", "cluster"):
            arrays[name] = np.asarray(getattr(self, name))
        arrays["weight"] = np.asarray(self.weight, dtype=float)
        arrays["y"] = np.asarray(self.y, dtype=float)
        arrays["group"] = np.asarray(self.group, dtype=int)
        n = len(arrays["weight"])
        if n == 0:
            raise InvalidInput("survey microdata has no records")
        if any(len(a) != n for a in arrays.values()):
            raise InvalidInput("microdata columns have different lengths")
        if np.any(~(arrays["weight"] > 0)) or np.any(~np.isfinite(arrays["weight"])):
            raise InvalidInput("sampling weights must be finite and > 0")
        if np.any(~(arrays["y"] >= 0)) or np.any(~np.isfinite(arrays["y"])):
            raise InvalidInput("outcomes must be finite and >= 0")
        g = arrays["group"]
        if np.any(g < 1) or np.any(g > self.n_groups):
            raise InvalidInput(f"group indices must lie in 1..{self.n_groups}")
        if self.labels is not None and len(self.labels) != self.n_groups:
            raise InvalidInput("one label per group is required")
        for name, arr in arrays.items():
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self):
        return len(self.weight)

    @property
    def design(self) -> dict:
        """Stratum label -> sorted cluster labels."""
        out = {}
        for s, c in zip(self.stratum.tolist(), self.cluster.tolist()):
            out.setdefault(s, set()).add(c)
        return {s: sorted(cs, key=str) for s, cs in sorted(out.items(), key=lambda kv: str(kv[0]))}

    def check_design(self):
        bad = [s for s, cs in self.design.items() if len(cs) < 2]
        if bad:
            raise DesignError(f"strata with fewer than 2 clusters: {bad}")

    def with_weights(self, weight) -> "SurveyMicrodata":
        return SurveyMicrodata(
            self.stratum, self.cluster, weight, self.y, self.group, self.n_groups, self.labels
        )


@dataclass(frozen=True)
class PsuLayout:
    """PSU codes for each record plus the stratum each PSU belongs to."""

    psu_of_record: np.ndarray
    stratum_of_psu: np.ndarray
    n_psu: int


def psu_layout(data: SurveyMicrodata) -> PsuLayout:
    # codes depend only on the label sets, never on record order
    s_labels, s_code = np.unique(data.stratum.astype(str), return_inverse=True)
    c_labels, c_code = np.unique(data.cluster.astype(str), return_inverse=True)
    key = s_code.astype(np.int64) * len(c_labels) + c_code
    psu_keys, psu = np.unique(key, return_inverse=True)
    return PsuLayout(psu.ravel(), (psu_keys // len(c_labels)).astype(int), len(psu_keys))


def psu_group_totals(data: SurveyMicrodata, layout: PsuLayout | None = None):
    """Weighted counts and outcome totals per (PSU, group): two ``(n_psu, M)`` arrays."""
    layout = psu_layout(data) if layout is None else layout
    t0 = np.zeros((layout.n_psu, data.n_groups))
    t1 = np.zeros_like(t0)
    np.add.at(t0, (layout.psu_of_record, data.group - 1), data.weight)
    np.add.at(t1, (layout.psu_of_record, data.group - 1), data.weight * data.y)
    return t0, t1


def total_variance(scores, data: SurveyMicrodata, layout: PsuLayout | None = None) -> float:
    """Design variance of ``sum(scores)``: with-replacement stratified clusters.

    ``sum_s C_s / (C_s - 1) * sum_c (z_sc - mean_s z)^2`` with ``z_sc`` the
    PSU totals of the scores.
    """
    layout = psu_layout(data) if layout is None else layout
    z = np.zeros(layout.n_psu)
    np.add.at(z, layout.psu_of_record, np.asarray(scores, dtype=float))
    var = 0.0
    for s in np.unique(layout.stratum_of_psu):
        zs = z[layout.stratum_of_psu == s]
        c = len(zs)
        if c < 2:
            raise DesignError(f"stratum {s} has a single cluster")
        var += c / (c - 1) * math.fsum(((zs - zs.mean()) ** 2).tolist())
    return var


# --------------------------------------------------------------------------
# Totals decomposition
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TotalsDecomposition:
    """Weighted group totals ``U0`` (population) and ``U1`` (outcome).

    ``groups`` lists the 1-based indices of the groups kept (empty groups
    may have been dropped).
    """

    U0: np.ndarray
    U1: np.ndarray
    groups: tuple[int, ...]

    @property
    def U0_total(self) -> float:
        return math.fsum(self.U0.tolist())

    @property
    def V0(self) -> np.ndarray:
        """Population above each group's midpoint: ``U0_j / 2 + sum_{l > j} U0_l``."""
        above = np.concatenate((np.cumsum(self.U0[::-1])[::-1][1:], [0.0]))
        return self.U0 / 2.0 + above

    def distribution(self, labels=None, units="") -> GroupedDistribution:
        return GroupedDistribution.from_arrays(self.U0 / self.U0_total, self.U1 / self.U0, labels, units=units)

    def terms(self, nu: float, alpha: float) -> dict:
        """The log-total terms I, II, III and IV of the index."""
        U0, U1, Vp = self.U0, self.U1, self.V0 ** (nu - 1.0)
        with np.errstate(divide="ignore"):
            ratio = U1 / U0
            out = {
                "I": math.log(math.fsum((U1 * Vp).tolist())),
                "III": math.log(math.fsum((U0 * Vp).tolist())),
            }
            if is_alpha_one(alpha):
                out["IV"] = math.fsum((U0 * np.log(ratio) * Vp).tolist()) / math.fsum((U0 * Vp).tolist())
            else:
                s = math.fsum((U0 * ratio ** (1.0 - alpha) * Vp).tolist())
                out["II"] = math.log(s) if s > 0 else -math.inf
        return out


def survey_totals(data: SurveyMicrodata, drop_empty: bool = False) -> TotalsDecomposition:
    """Weighted totals per group.  Empty groups raise unless ``drop_empty``."""
    U0 = np.zeros(data.n_groups)
    U1 = np.zeros(data.n_groups)
    np.add.at(U0, data.group - 1, data.weight)
    np.add.at(U1, data.group - 1, data.weight * data.y)
    empty = np.flatnonzero(U0 == 0)
    if len(empty):
        if not drop_empty:
            raise EmptyGroup(f"groups with zero weighted count: {(empty + 1).tolist()}")
        warnings.warn(f"dropping empty groups {(empty + 1).tolist()}", stacklevel=2)
    keep = U0 > 0
    return TotalsDecomposition(U0[keep], U1[keep], tuple((np.flatnonzero(keep) + 1).tolist()))


def renyi_from_totals(tot: TotalsDecomposition, params: IndexParams) -> IndexValue:
    """The index assembled from the log-total terms.

    Algebraically ``I - II / (1 - alpha) + alpha III / (1 - alpha)``, or
    ``I - IV - III`` at ``alpha = 1``.
    """
    alpha, nu = params.alpha, params.nu
    if math.isinf(alpha) or math.isinf(nu):
        raise InvalidInput("the totals path needs finite alpha and nu")
    if alpha >= 1 and np.any(tot.U1 == 0):
        return IndexValue(IndexKind.RI, math.inf, params)
    # I - III and II - III are logs of ratios of rank-weighted totals.  Forming
    # them as such avoids the cancellation the term-by-term sum suffers near
    # alpha = 1, where II and III are divided by 1 - alpha.
    Vp = tot.V0 ** (nu - 1.0)
    mass = tot.U0 * Vp
    q = mass / math.fsum(mass.tolist())
    with np.errstate(divide="ignore"):
        log_r = np.log(tot.U1 / tot.U0)
    log_mean = math.log(math.fsum((q * tot.U1 / tot.U0).tolist()))  # I - III
    if is_alpha_one(alpha):
        value = log_mean - math.fsum((q * log_r).tolist())  # (I - III) - IV
    else:
        # (I - III) - (II - III) / (1 - alpha)
        t = (1.0 - alpha) * (log_r - log_mean)
        value = -math.log1p(math.fsum((q * np.expm1(t)).tolist())) / (1.0 - alpha)
    return IndexValue(IndexKind.RI, max(value, 0.0), params)


def _rank_weighted_partial(g, dg_dU0, V, nu):
    """d/dU0_k of ``sum_j g_j V_j^(nu-1)`` where ``dV_j/dU0_k`` is 0, 1/2 or 1."""
    Vp = V ** (nu - 1.0)
    if nu == 1.0:
        return dg_dU0 * Vp
    gq = g * V ** (nu - 2.0)
    lower = np.concatenate(([0.0], np.cumsum(gq)[:-1]))
    return dg_dU0 * Vp + (nu - 1.0) * (0.5 * gq + lower)


def term_partials(tot: TotalsDecomposition, params: IndexParams) -> dict:
    """Analytic partial derivatives of each term in ``U0_k`` and ``U1_k``.

    Returns ``{"I": (d/dU0, d/dU1), ...}`` with the terms of the requested
    alpha branch (II for alpha != 1, IV for alpha == 1).
    """
    alpha, nu = params.alpha, params.nu
    U0, U1, V = tot.U0, tot.U1, tot.V0
    Vp = V ** (nu - 1.0)
    zeros = np.zeros_like(U0)
    out = {}

    s_I = math.fsum((U1 * Vp).tolist())
    out["I"] = (_rank_weighted_partial(U1, zeros, V, nu) / s_I, Vp / s_I)

    s_III = math.fsum((U0 * Vp).tolist())
    d_III = _rank_weighted_partial(U0, np.ones_like(U0), V, nu)
    out["III"] = (d_III / s_III, zeros)

    ratio = U1 / U0
    if is_alpha_one(alpha):
        g = U0 * np.log(ratio)
        n_IV = math.fsum((g * Vp).tolist())
        d_n = _rank_weighted_partial(g, np.log(ratio) - 1.0, V, nu)
        out["IV"] = (d_n / s_III - d_III * n_IV / s_III**2, U0 / U1 * Vp / s_III)
    else:
        pw = ratio ** (1.0 - alpha)
        g = U0 * pw
        s_II = math.fsum((g * Vp).tolist())
        d_0 = _rank_weighted_partial(g, alpha * pw, V, nu)
        out["II"] = (d_0 / s_II, (1.0 - alpha) * ratio ** (-alpha) * Vp / s_II)
    return out


def totals_gradient(tot: TotalsDecomposition, params: IndexParams):
    """Gradient of the index in ``(U0, U1)`` assembled from the term partials."""
    if params.alpha >= 1 and np.any(tot.U1 == 0):
        raise DomainError("index is infinite; its gradient is undefined")
    tp = term_partials(tot, params)
    alpha = params.alpha
    if is_alpha_one(alpha):
        g0 = tp["I"][0] - tp["IV"][0] - tp["III"][0]
        g1 = tp["I"][1] - tp["IV"][1]
    else:
        c = 1.0 - alpha
        g0 = tp["I"][0] - tp["II"][0] / c + alpha * tp["III"][0] / c
        g1 = tp["I"][1] - tp["II"][1] / c
    return g0, g1


def linearization_scores(data: SurveyMicrodata, params: IndexParams, tot=None) -> np.ndarray:
    """Per-observation variance contributions ``w_i (dRI/dU0_g + y_i dRI/dU1_g)``."""
    tot = survey_totals(data, drop_empty=True) if tot is None else tot
    g0, g1 = totals_gradient(tot, params)
    full0 = np.zeros(data.n_groups)
    full1 = np.zeros(data.n_groups)
    idx = np.asarray(tot.groups) - 1
    full0[idx], full1[idx] = g0, g1
    gi = data.group - 1
    return data.weight * (full0[gi] + data.y * full1[gi])


def linearized_variance(data: SurveyMicrodata, params: IndexParams, level: float = 0.95) -> IndexEstimate:
    """Taylor-linearized standard error of the index from survey microdata."""
    data.check_design()
    tot = survey_totals(data, drop_empty=True)
    value = renyi_from_totals(tot, params)
    if value.infinite:
        raise DomainError("index is infinite (zero outcome total with alpha >= 1)")
    scores = linearization_scores(data, params, tot)
    se = math.sqrt(total_variance(scores, data))
    return IndexEstimate(value, se, normal_interval(value.value, se, level), Method.LINEARIZATION, level)


def ratio_standard_errors(data: SurveyMicrodata) -> np.ndarray:
    """Linearized standard errors of the weighted group means ``U1_j / U0_j``."""
    data.check_design()
    layout = psu_layout(data)
    tot = survey_totals(data)
    out = np.empty(data.n_groups)
    for j in range(data.n_groups):
        member = data.group == j + 1
        mean = tot.U1[j] / tot.U0[j]
        scores = np.where(member, data.weight * (data.y - mean) / tot.U0[j], 0.0)
        out[j] = math.sqrt(total_variance(scores, data, layout))
    return out


# --------------------------------------------------------------------------
# Registry rates
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RegistryRates:
    """Age-specific crude rates per SES group.

    ``crude_rates`` and ``denominators`` are ``(M, K)`` arrays (groups by age
    strata) and ``age_weights`` the standard-population weights.  Rates are
    expressed per ``rate_scale`` persons (1e5 for per-100,000 rates), which
    enters the Poisson variance ``scale * rate / n``.
    """

    crude_rates: np.ndarray
    denominators: np.ndarray
    age_weights: np.ndarray
    rate_scale: float = 1.0

    def __post_init__(self):
        u = np.atleast_2d(np.asarray(self.crude_rates, dtype=float))
        n = np.atleast_2d(np.asarray(self.denominators, dtype=float))
        w = np.asarray(self.age_weights, dtype=float).ravel()
        if u.shape != n.shape or u.shape[1] != len(w):
            raise InvalidInput("rates, denominators and age weights disagree in shape")
        if np.any(~(n > 0)):
            raise InvalidInput("age-group denominators must be > 0")
        if np.any(~(u >= 0)):
            raise InvalidInput("crude rates must be >= 0")
        if np.any(w < 0) or abs(math.fsum(w.tolist()) - 1.0) > 1e-12:
            raise InvalidInput("age weights must be nonnegative and sum to 1")
        if not self.rate_scale > 0:
            raise InvalidInput("rate_scale must be > 0")
        object.__setattr__(self, "crude_rates", u)
        object.__setattr__(self, "denominators", n)
        object.__setattr__(self, "age_weights", w)

    @property
    def n_groups(self) -> int:
        return self.crude_rates.shape[0]


def registry_moments(rates: RegistryRates):
    """Age-adjusted group means and their Poisson variances."""
    w = rates.age_weights
    means = rates.crude_rates @ w
    variances = rates.rate_scale * ((rates.crude_rates / rates.denominators) @ (w * w))
    return means, variances


def delta_gradient(dist: GroupedDistribution, params: IndexParams) -> np.ndarray:
    """``dRI/dy_j`` with shares fixed."""
    if math.isinf(params.alpha) or math.isinf(params.nu):
        raise InvalidInput("the delta method needs finite alpha and nu")
    y = dist.means
    if np.any(y <= 0):
        raise DomainError("the delta method needs every group mean > 0")
    q = core._ses_probabilities(dist.shares, params.nu)
    h0 = core.achievement_my(dist, params.with_alpha(0.0)).value
    ha = core.achievement_my(dist, params).value
    alpha = params.alpha
    return q * (1.0 / h0 - 1.0 / (y**alpha * ha ** (1.0 - alpha)))


def delta_method_variance(
    dist: GroupedDistribution, variances, params: IndexParams, level: float = 0.95
) -> IndexEstimate:
    """Delta-method standard error from per-group variances of the means."""
    variances = np.asarray(variances, dtype=float)
    if variances.shape != (len(dist),) or np.any(variances < 0):
        raise InvalidInput("one nonnegative variance per group is required")
    grad = delta_gradient(dist, params)
    value = core.renyi_index(dist, params)
    se = math.sqrt(math.fsum((grad**2 * variances).tolist()))
    return IndexEstimate(value, se, normal_interval(value.value, se, level), Method.DELTA_METHOD, level)


def difference_test(est1: IndexEstimate, est2: IndexEstimate):
    """Two-sided z test for a difference between independent estimates."""
    se = math.hypot(est1.std_error, est2.std_error)
    if se == 0:
        raise DegenerateTest("both standard errors are zero")
    z = (est1.value.value - est2.value.value) / se
    return z, float(2.0 * stats.norm.sf(abs(z)))


@dataclass(frozen=True)
class Comparison:
    """Difference ``est1 - est2`` of two independent estimates with its z test."""

    difference: float
    std_error: float
    interval: tuple[float, float]
    z: float
    p_value: float


def compare_estimates(est1: IndexEstimate, est2: IndexEstimate, level: float = 0.95) -> Comparison:
    z, p = difference_test(est1, est2)
    diff = est1.value.value - est2.value.value
    se = math.hypot(est1.std_error, est2.std_error)
    return Comparison(diff, se, normal_interval(diff, se, level), z, p)
