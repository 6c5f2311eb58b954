"""Rank-dependent Renyi disparity indices and the competing index families.

Every index is evaluated on a :class:`GroupedDistribution`: groups ordered
from lowest to highest socioeconomic status (SES), each with a population
share and an average adverse outcome.  Two aversion parameters drive all
indices:

* ``alpha >= 0`` -- aversion to pure health inequality (power transform);
* ``nu >= 1``    -- aversion to socioeconomic inequality (rank weights
  ``w(R) = nu * (1 - R) ** (nu - 1)``).

``alpha = inf`` and ``nu = inf`` are accepted and always routed to the
closed-form limits, never evaluated as large finite exponents.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateReference,
    DegenerateRegression,
    DomainError,
    InvalidInput,
)

ALPHA_ONE_TOL = 1e-9
SHARE_SUM_TOL = 1e-12
COUNT_SHARE_TOL = 1e-6


def is_alpha_one(alpha: float) -> bool:
    """True when ``alpha`` selects the logarithmic branch."""
    return abs(alpha - 1.0) < ALPHA_ONE_TOL


def _fsum_dot(a, b) -> float:
    return math.fsum(np.multiply(a, b).tolist())


# --------------------------------------------------------------------------
# Domain types
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GroupRecord:
    label: str
    share: float
    mean_outcome: float
    count: int | None = None

    def __post_init__(self):
        if not (self.share > 0 and math.isfinite(self.share)):
            raise InvalidInput(f"group {self.label!r}: share must be > 0, got {self.share}")
        if not (self.mean_outcome >= 0 and math.isfinite(self.mean_outcome)):
            raise InvalidInput(
                f"group {self.label!r}: mean outcome must be finite and >= 0, "
                f"got {self.mean_outcome}"
            )
        if self.count is not None and self.count <= 0:
            raise InvalidInput(f"group {self.label!r}: count must be positive")


@dataclass(frozen=True)
class GroupedDistribution:
    """Ordered SES groups, lowest SES first.

    Shares are normalized to sum to one when the distribution is built; the
    records held afterwards carry the normalized shares.
    """

    groups: tuple[GroupRecord, ...]
    units: str = ""

    def __post_init__(self):
        groups = tuple(self.groups)
        if not groups:
            raise InvalidInput("a distribution needs at least one group")
        total = math.fsum(g.share for g in groups)
        if abs(total - 1.0) > SHARE_SUM_TOL:
            groups = tuple(replace(g, share=g.share / total) for g in groups)
        if not any(g.mean_outcome > 0 for g in groups):
            raise InvalidInput("at least one group must have a positive mean outcome")
        counts = [g.count for g in groups]
        if all(c is not None for c in counts):
            n = sum(counts)
            for g in groups:
                if abs(g.count / n - g.share) > COUNT_SHARE_TOL:
                    raise InvalidInput(
                        f"group {g.label!r}: count {g.count} inconsistent with share {g.share}"
                    )
        object.__setattr__(self, "groups", groups)

    @classmethod
    def from_arrays(cls, shares, means, labels=None, counts=None, units=""):
        shares = np.asarray(shares, dtype=float).ravel()
        means = np.asarray(means, dtype=float).ravel()
        if shares.shape != means.shape:
            raise InvalidInput("shares and means must have the same length")
        if labels is None:
            labels = [str(j + 1) for j in range(len(shares))]
        if counts is None:
            counts = [None] * len(shares)
        records = tuple(
            GroupRecord(str(lab), float(p), float(y), None if c is None else int(c))
            for lab, p, y, c in zip(labels, shares, means, counts)
        )
        return cls(records, units)

    @classmethod
    def from_counts(cls, counts, means, labels=None, units=""):
        counts = np.asarray(counts, dtype=float)
        return cls.from_arrays(counts / counts.sum(), means, labels, counts.astype(int), units)

    def __len__(self):
        return len(self.groups)

    @property
    def shares(self) -> np.ndarray:
        return np.array([g.share for g in self.groups])

    @property
    def means(self) -> np.ndarray:
        return np.array([g.mean_outcome for g in self.groups])

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(g.label for g in self.groups)

    @property
    def population_mean(self) -> float:
        return _fsum_dot(self.shares, self.means)

    def with_means(self, means) -> "GroupedDistribution":
        """Same groups and shares, new mean outcomes."""
        return GroupedDistribution.from_arrays(self.shares, means, self.labels, units=self.units)


class Reference(str, enum.Enum):
    POPULATION_MEAN = "population_mean"
    SES_WEIGHTED_MEAN = "ses_weighted_mean"
    BEST_GROUP_RATE = "best_group_rate"
    FIXED_TARGET = "fixed_target"


@dataclass(frozen=True)
class IndexParams:
    alpha: float = 1.0
    nu: float = 1.0
    reference: Reference = Reference.POPULATION_MEAN
    target: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "nu", float(self.nu))
        object.__setattr__(self, "reference", Reference(self.reference))
        if not self.alpha >= 0:
            raise InvalidInput(f"alpha must be >= 0, got {self.alpha}")
        if not self.nu >= 1:
            raise InvalidInput(f"nu must be >= 1, got {self.nu}")
        if self.reference is Reference.FIXED_TARGET:
            if self.target is None or not self.target > 0 or not math.isfinite(self.target):
                raise InvalidInput("a fixed target reference needs a finite target > 0")

    def with_alpha(self, alpha: float) -> "IndexParams":
        return replace(self, alpha=alpha)


@dataclass(frozen=True)
class RankWeights:
    ranks: np.ndarray
    weights: np.ndarray
    normalizer_W1: float
    second_moment_W2: float

    @property
    def normalized(self) -> np.ndarray:
        """Standardized weights ``w / W1`` (their share-weighted mean is 1)."""
        return self.weights / self.normalizer_W1

    @property
    def rank_variance(self) -> float:
        """Share-weighted variance of the standardized weights."""
        return self.second_moment_W2 / self.normalizer_W1**2 - 1.0


class IndexKind(str, enum.Enum):
    RI = "RI"
    GE = "GE"
    GE_STANDARDIZED = "GEStandardized"
    ATKINSON = "Atkinson"
    ATKINSON_RATIO = "AtkinsonRatio"
    CONCENTRATION_CLASSICAL = "ConcentrationClassical"
    CONCENTRATION_EXTENDED = "ConcentrationExtended"
    CONCENTRATION_TWO_PARAM = "ConcentrationTwoParam"
    ACHIEVEMENT_WAGSTAFF = "AchievementWagstaff"
    ACHIEVEMENT_MY = "AchievementMY"
    SLOPE_REGRESSION = "SlopeRegression"


@dataclass(frozen=True)
class IndexValue:
    kind: IndexKind
    value: float
    params: IndexParams | None = None
    group: str | None = field(default=None, compare=False)

    @property
    def infinite(self) -> bool:
        return math.isinf(self.value)

    def __float__(self):
        return float(self.value)


# --------------------------------------------------------------------------
# Ranks, weights, transforms
# --------------------------------------------------------------------------


def _ranks(shares: np.ndarray) -> np.ndarray:
    return np.cumsum(shares) - shares / 2.0


def rank_positions(dist: GroupedDistribution) -> np.ndarray:
    """Midpoint ranks ``R_j`` of each group in the cumulative SES distribution."""
    if len(dist) == 0:
        raise InvalidInput("empty group list")
    return _ranks(dist.shares)


def _weights(ranks: np.ndarray, nu: float) -> np.ndarray:
    if nu == 1.0:
        return np.ones_like(ranks)
    return nu * (1.0 - ranks) ** (nu - 1.0)


def ses_weights(ranks, nu: float, shares) -> RankWeights:
    """Socioeconomic rank weights ``w_nu(R) = nu (1 - R)^(nu - 1)``."""
    ranks = np.asarray(ranks, dtype=float)
    shares = np.asarray(shares, dtype=float)
    if not nu >= 1 or math.isinf(nu):
        raise InvalidInput(f"nu must be finite and >= 1, got {nu}")
    if np.any(ranks <= 0) or np.any(ranks >= 1):
        raise InvalidInput("ranks must lie in (0, 1)")
    w = _weights(ranks, nu)
    return RankWeights(ranks, w, _fsum_dot(w, shares), _fsum_dot(w * w, shares))


def power_transform(r, alpha: float):
    """Generalized logarithm ``r^(1-alpha)/(1-alpha)``, ``ln r`` at alpha = 1."""
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0) or (alpha >= 1 and np.any(arr <= 0)):
        raise DomainError(f"power transform undefined for r <= 0 with alpha={alpha}")
    if is_alpha_one(alpha):
        out = np.log(arr)
    else:
        out = arr ** (1.0 - alpha) / (1.0 - alpha)
    return float(out) if np.ndim(out) == 0 else out


def inverse_transform(s, alpha: float):
    arr = np.asarray(s, dtype=float)
    if is_alpha_one(alpha):
        out = np.exp(arr)
    else:
        base = (1.0 - alpha) * arr
        if np.any(base <= 0):
            raise DomainError(f"inverse transform undefined for s={s} with alpha={alpha}")
        out = base ** (1.0 / (1.0 - alpha))
    return float(out) if np.ndim(out) == 0 else out


# --------------------------------------------------------------------------
# Array-level kernels (shared with the inference and resampling modules)
# --------------------------------------------------------------------------


def _ses_probabilities(shares: np.ndarray, nu: float) -> np.ndarray:
    """Normalized socioeconomic weights ``pbar_j^(nu)``."""
    if math.isinf(nu):
        out = np.zeros_like(shares)
        out[0] = 1.0
        return out
    w = _weights(_ranks(shares), nu) * shares
    return w / math.fsum(w.tolist())


def _normalized_disparities(q: np.ndarray, means: np.ndarray) -> np.ndarray:
    return means / _fsum_dot(q, means)


def _renyi_kernel(q: np.ndarray, rbar: np.ndarray, alpha: float) -> float:
    """Renyi divergence of ``q * rbar`` from ``q`` (``sum q * rbar == 1``)."""
    keep = q > 0
    q, rbar = q[keep], rbar[keep]
    if math.isinf(alpha):
        m = rbar.min()
        return math.inf if m == 0 else max(-math.log(m), 0.0)
    if is_alpha_one(alpha):
        if np.any(rbar == 0):
            return math.inf
        return max(-_fsum_dot(q, np.log(rbar)), 0.0)
    if alpha > 1 and np.any(rbar == 0):
        return math.inf
    with np.errstate(divide="ignore"):
        t = (1.0 - alpha) * np.log(rbar)
    x = _fsum_dot(q, np.expm1(t))
    return max(-math.log1p(x) / (1.0 - alpha), 0.0)


def _ge_kernel(q: np.ndarray, rbar: np.ndarray, alpha: float) -> float:
    keep = q > 0
    q, rbar = q[keep], rbar[keep]
    if is_alpha_one(alpha):
        return _renyi_kernel(q, rbar, alpha)
    if math.isinf(alpha):
        return 0.0 if np.all(rbar == 1.0) else math.inf
    if alpha > 1 and np.any(rbar == 0):
        return math.inf
    with np.errstate(divide="ignore"):
        t = (1.0 - alpha) * np.log(rbar)
    return max(-_fsum_dot(q, np.expm1(t)) / (1.0 - alpha), 0.0)


def renyi_from_arrays(shares, means, alpha: float, nu: float) -> float:
    """Rank-dependent Renyi index straight from share and mean vectors.

    ``shares`` need not be normalized.  Used by the resampling loops where
    building a :class:`GroupedDistribution` per replicate is wasteful.
    """
    shares = np.asarray(shares, dtype=float)
    shares = shares / math.fsum(shares.tolist())
    means = np.asarray(means, dtype=float)
    q = _ses_probabilities(shares, nu)
    return _renyi_kernel(q, _normalized_disparities(q, means), alpha)


def _achievement(q: np.ndarray, means: np.ndarray, alpha: float) -> float:
    keep = q > 0
    q, y = q[keep], means[keep]
    if math.isinf(alpha):
        return float(y.min())
    if alpha >= 1 and np.any(y <= 0):
        raise DomainError(f"achievement undefined with a zero outcome and alpha={alpha}")
    if is_alpha_one(alpha):
        return math.exp(_fsum_dot(q, np.log(y)))
    # scale so the largest power term is 1
    scale = y.min() if alpha > 1 else y.max()
    if scale == 0:
        return 0.0
    s = _fsum_dot(q, (y / scale) ** (1.0 - alpha))
    return scale * s ** (1.0 / (1.0 - alpha))


# --------------------------------------------------------------------------
# Public operations
# --------------------------------------------------------------------------


def _reference_value(dist: GroupedDistribution, params: IndexParams, q: np.ndarray) -> float:
    y = dist.means
    ref = params.reference
    if ref is Reference.POPULATION_MEAN:
        value = dist.population_mean
    elif ref is Reference.SES_WEIGHTED_MEAN:
        value = _fsum_dot(q, y)
    elif ref is Reference.BEST_GROUP_RATE:
        value = float(y.min())
    else:
        value = float(params.target)
    if not value > 0:
        raise DegenerateReference(f"reference {ref.value} evaluates to {value}")
    return value


def relative_disparities(
    dist: GroupedDistribution, params: IndexParams, weights: RankWeights | None = None
) -> np.ndarray:
    """Normalized relative disparities ``rbar_j``.

    ``r_j = y_j / reference`` is rescaled so that its mean under the
    socioeconomic weights is exactly one; the reference therefore cancels.
    """
    if weights is None:
        q = _ses_probabilities(dist.shares, params.nu)
    else:
        q = weights.normalized * dist.shares
    r = dist.means / _reference_value(dist, params, q)
    return r / _fsum_dot(q, r)


def _value(kind, value, params=None, group=None) -> IndexValue:
    return IndexValue(kind, float(value), params, group)


def renyi_index(dist: GroupedDistribution, params: IndexParams) -> IndexValue:
    """Rank-dependent Renyi index ``RI_alpha^(nu)`` in ``[0, +inf]``.

    Zero group outcomes with ``alpha >= 1`` give ``+inf`` rather than an error.
    """
    if math.isinf(params.alpha):
        return renyi_limit_alpha_inf(dist, params.nu, params)
    q = _ses_probabilities(dist.shares, params.nu)
    rbar = relative_disparities(dist, params) if not math.isinf(params.nu) else np.ones(len(dist))
    return _value(IndexKind.RI, _renyi_kernel(q, rbar, params.alpha), params)


def renyi_limit_alpha_inf(
    dist: GroupedDistribution, nu: float, params: IndexParams | None = None
) -> IndexValue:
    """``RI_inf = -ln(min rbar)``: the index seen from the best-off group."""
    if params is None:
        params = IndexParams(alpha=math.inf, nu=nu)
    q = _ses_probabilities(dist.shares, nu)
    rbar = relative_disparities(dist, params) if not math.isinf(nu) else np.ones(len(dist))
    value = _renyi_kernel(q, rbar, math.inf)
    best = int(np.argmin(np.where(q > 0, dist.means, np.inf)))
    return _value(IndexKind.RI, value, params, dist.labels[best])


def atkinson_standardize(ri: IndexValue) -> IndexValue:
    """``A = 1 - exp(-RI)``, mapping ``[0, inf]`` onto ``[0, 1]``."""
    if ri.kind is not IndexKind.RI:
        raise InvalidInput(f"expected an RI value, got {ri.kind.value}")
    return _value(IndexKind.ATKINSON, -math.expm1(-ri.value), ri.params)


def atkinson_ratio(dist: GroupedDistribution, params: IndexParams) -> IndexValue:
    """``A_alpha / A_inf``: share of the maximum potential improvement attained.

    Defined as 0 when every group is equal (``A_inf == 0``).
    """
    a = atkinson_standardize(renyi_index(dist, params)).value
    a_inf = atkinson_standardize(renyi_limit_alpha_inf(dist, params.nu)).value
    ratio = 0.0 if a_inf == 0 else a / a_inf
    return _value(IndexKind.ATKINSON_RATIO, ratio, params)


def ge_index(dist: GroupedDistribution, params: IndexParams) -> IndexValue:
    """Rank-dependent reference-invariant generalized entropy index."""
    q = _ses_probabilities(dist.shares, params.nu)
    rbar = relative_disparities(dist, params) if not math.isinf(params.nu) else np.ones(len(dist))
    return _value(IndexKind.GE, _ge_kernel(q, rbar, params.alpha), params)


def ge_standardized(dist: GroupedDistribution, params: IndexParams) -> IndexValue:
    """GE mapped to ``[0, 1]`` by ``1 - exp(-GE)``."""
    ge = ge_index(dist, params).value
    return _value(IndexKind.GE_STANDARDIZED, -math.expm1(-ge), params)


def ri_ge_convert(value: IndexValue, direction: str = "ge_to_ri") -> IndexValue:
    """Convert between RI and GE at the same ``alpha``.

    ``direction`` is ``"ge_to_ri"`` or ``"ri_to_ge"``.  At ``alpha = 1`` the
    two indices coincide and the value passes through unchanged.
    """
    params = value.params
    if params is None:
        raise InvalidInput("conversion needs the alpha carried by value.params")
    alpha = params.alpha
    c = 1.0 - alpha
    if direction == "ge_to_ri":
        if value.kind is not IndexKind.GE:
            raise InvalidInput(f"expected a GE value, got {value.kind.value}")
        if is_alpha_one(alpha):
            return _value(IndexKind.RI, value.value, params)
        if not 1.0 - c * value.value > 0:
            raise DomainError(f"GE={value.value} is inconsistent with any RI at alpha={alpha}")
        return _value(IndexKind.RI, -math.log1p(-c * value.value) / c, params)
    if direction == "ri_to_ge":
        if value.kind is not IndexKind.RI:
            raise InvalidInput(f"expected an RI value, got {value.kind.value}")
        if is_alpha_one(alpha):
            return _value(IndexKind.GE, value.value, params)
        return _value(IndexKind.GE, -math.expm1(-c * value.value) / c, params)
    raise InvalidInput(f"unknown direction {direction!r}")


def social_evaluation(dist: GroupedDistribution, params: IndexParams) -> float:
    """Two-parameter social evaluation ``S*(nu, alpha) = sum pbar f_alpha(y)``."""
    q = _ses_probabilities(dist.shares, params.nu)
    return _fsum_dot(q, power_transform(dist.means, params.alpha))


def achievement_my(dist: GroupedDistribution, params: IndexParams) -> IndexValue:
    """Makdissi-Yazbeck achievement: the equally distributed equivalent outcome.

    ``alpha = inf`` gives the best (lowest) group rate and ``nu = inf`` the
    rate of the lowest-SES group.  Ties for the best rate report the first
    tied group.
    """
    y = dist.means
    if math.isinf(params.nu):
        return _value(IndexKind.ACHIEVEMENT_MY, y[0], params, dist.labels[0])
    if math.isinf(params.alpha):
        best = int(np.argmin(y))
        return _value(IndexKind.ACHIEVEMENT_MY, y[best], params, dist.labels[best])
    q = _ses_probabilities(dist.shares, params.nu)
    return _value(IndexKind.ACHIEVEMENT_MY, _achievement(q, y, params.alpha), params)


def renyi_from_achievement(dist: GroupedDistribution, params: IndexParams) -> IndexValue:
    """RI as the log ratio of achievement at ``alpha`` to achievement at 0."""
    h_alpha = achievement_my(dist, params).value
    h_0 = achievement_my(dist, params.with_alpha(0.0)).value
    value = max(math.log(h_0) - math.log(h_alpha), 0.0) if h_alpha > 0 else math.inf
    return _value(IndexKind.RI, value, params)


def concentration_extended(dist: GroupedDistribution, nu: float) -> IndexValue:
    """Wagstaff extended concentration index ``C(nu)``; ``C(2)`` is classical."""
    q = _ses_probabilities(dist.shares, nu)
    ybar = dist.population_mean
    if not ybar > 0:
        raise DegenerateReference("population mean outcome is zero")
    value = 1.0 - _fsum_dot(q, dist.means) / ybar
    return _value(IndexKind.CONCENTRATION_EXTENDED, value, IndexParams(alpha=0.0, nu=nu))


def concentration_classical(dist: GroupedDistribution) -> IndexValue:
    c = concentration_extended(dist, 2.0)
    return _value(IndexKind.CONCENTRATION_CLASSICAL, c.value, c.params)


def concentration_two_param(dist: GroupedDistribution, params: IndexParams) -> IndexValue:
    """``C(nu, alpha) = 1 - H*(nu, alpha) / ybar``; may be negative."""
    ybar = dist.population_mean
    if not ybar > 0:
        raise DegenerateReference("population mean outcome is zero")
    h = achievement_my(dist, params).value
    return _value(IndexKind.CONCENTRATION_TWO_PARAM, 1.0 - h / ybar, params)


def achievement_wagstaff(dist: GroupedDistribution, nu: float) -> IndexValue:
    """Wagstaff achievement ``H(nu)``, the rank-weighted mean outcome."""
    q = _ses_probabilities(dist.shares, nu)
    return _value(
        IndexKind.ACHIEVEMENT_WAGSTAFF, _fsum_dot(q, dist.means), IndexParams(alpha=0.0, nu=nu)
    )


@dataclass(frozen=True)
class RegressionResult:
    """Weighted least-squares fit of transformed outcomes on rank weights."""

    slope: float
    intercept: float
    slope_alpha0: float
    intercept_alpha0: float
    rank_variance: float
    ri: IndexValue


def regression_path(dist: GroupedDistribution, params: IndexParams) -> RegressionResult:
    """Recover RI from the slope and intercept of a weighted rank regression.

    ``slope_alpha0`` is the extended slope index of inequality analogue
    (classical at ``nu = 2``).
    """
    if math.isinf(params.nu) or math.isinf(params.alpha):
        raise InvalidInput("the regression path needs finite alpha and nu")
    if params.nu == 1.0 or len(dist) < 2:
        raise DegenerateRegression("rank regressor has zero variance")
    p = dist.shares
    rw = ses_weights(rank_positions(dist), params.nu, p)
    var = rw.rank_variance
    if not var > 0:
        raise DegenerateRegression("rank regressor has zero variance")
    wbar = rw.normalized
    m2 = rw.second_moment_W2 / rw.normalizer_W1**2

    def fit(alpha):
        f = power_transform(dist.means, alpha)
        s_nu = _fsum_dot(wbar * p, f)
        s_1 = _fsum_dot(p, f)
        b = (s_nu - s_1) / var
        return b, s_1 - b

    b, a = fit(params.alpha)
    b0, a0 = fit(0.0)
    h_alpha = inverse_transform(a + m2 * b, params.alpha)
    h_0 = a0 + m2 * b0
    ri = _value(IndexKind.RI, max(math.log(h_0) - math.log(h_alpha), 0.0), params)
    return RegressionResult(b, a, b0, a0, var, ri)


def convenient_regression(dist: GroupedDistribution, params: IndexParams):
    """Regressor, response and weights whose WLS slope equals ``S*(nu, alpha)``.

    Returns ``(x, z, p)`` with ``x = wbar_nu(R)`` and
    ``z = var(x) f_alpha(y) + S*(1, alpha) x``.
    """
    p = dist.shares
    rw = ses_weights(rank_positions(dist), params.nu, p)
    f = power_transform(dist.means, params.alpha)
    s_1 = _fsum_dot(p, f)
    x = rw.normalized
    return x, rw.rank_variance * f + s_1 * x, p


def slope_index(dist: GroupedDistribution, params: IndexParams) -> IndexValue:
    return _value(IndexKind.SLOPE_REGRESSION, regression_path(dist, params).slope, params)


# Kinds whose value does not depend on alpha
ALPHA_FREE_KINDS = frozenset(
    {IndexKind.CONCENTRATION_CLASSICAL, IndexKind.CONCENTRATION_EXTENDED, IndexKind.ACHIEVEMENT_WAGSTAFF}
)


def evaluate(kind: IndexKind, dist: GroupedDistribution, params: IndexParams) -> IndexValue:
    """Compute any index kind for one parameter pair."""
    kind = IndexKind(kind)
    if kind is IndexKind.RI:
        return renyi_index(dist, params)
    if kind is IndexKind.GE:
        return ge_index(dist, params)
    if kind is IndexKind.GE_STANDARDIZED:
        return ge_standardized(dist, params)
    if kind is IndexKind.ATKINSON:
        return atkinson_standardize(renyi_index(dist, params))
    if kind is IndexKind.ATKINSON_RATIO:
        return atkinson_ratio(dist, params)
    if kind is IndexKind.CONCENTRATION_CLASSICAL:
        return concentration_classical(dist)
    if kind is IndexKind.CONCENTRATION_EXTENDED:
        return concentration_extended(dist, params.nu)
    if kind is IndexKind.CONCENTRATION_TWO_PARAM:
        return concentration_two_param(dist, params)
    if kind is IndexKind.ACHIEVEMENT_WAGSTAFF:
        return achievement_wagstaff(dist, params.nu)
    if kind is IndexKind.ACHIEVEMENT_MY:
        return achievement_my(dist, params)
    return slope_index(dist, params)
