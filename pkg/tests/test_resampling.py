import numpy as np
import pytest

from rank_disparity import core
from rank_disparity.core import GroupedDistribution, IndexParams
from rank_disparity.data_io import DesignSpec, load_fixture, synthesize_microdata
from rank_disparity.errors import DesignError, InvalidInput
from rank_disparity.inference import Method, RegistryRates, SurveyMicrodata, linearized_variance
from rank_disparity.resampling import (
    BootstrapConfig,
    NullSimConfig,
    bootstrap_difference,
    effective_counts,
    poisson_null_test,
    replicate_generators,
    rescaled_bootstrap,
)

PARAMS = IndexParams(alpha=2.0, nu=2.0)


@pytest.fixture(scope="module")
def survey():
    t = load_fixture("nhanes_2009_2010")
    return synthesize_microdata(t.dist, t.std_errors, seed=1)


class TestConfig:
    @pytest.mark.parametrize(
        "kwargs", [dict(replicates=1), dict(interval="bca"), dict(level=1.0), dict(level=0.0)]
    )
    def test_bootstrap_config_invalid(self, kwargs):
        with pytest.raises(InvalidInput):
            BootstrapConfig(**kwargs)

    @pytest.mark.parametrize("kwargs", [dict(replicates=0), dict(pooled_rate_rule="max"), dict(count_recovery="x")])
    def test_null_config_invalid(self, kwargs):
        with pytest.raises(InvalidInput):
            NullSimConfig(**kwargs)

    def test_generators_are_prefix_stable(self):
        a = [g.random() for g in replicate_generators(5, 10)]
        b = [g.random() for g in replicate_generators(5, 20)]
        assert a == b[:10]


class TestRescaledBootstrap:
    def test_same_seed_is_bit_identical(self, survey):
        cfg = BootstrapConfig(200, seed=9)
        _, a = rescaled_bootstrap(survey, PARAMS, cfg)
        _, b = rescaled_bootstrap(survey, PARAMS, cfg)
        np.testing.assert_array_equal(a, b)

    def test_parallel_matches_serial(self, survey):
        _, a = rescaled_bootstrap(survey, PARAMS, BootstrapConfig(100, seed=2))
        _, b = rescaled_bootstrap(survey, PARAMS, BootstrapConfig(100, seed=2, workers=4))
        np.testing.assert_array_equal(a, b)

    def test_record_order_does_not_matter(self, survey):
        perm = np.random.default_rng(0).permutation(len(survey))
        shuffled = SurveyMicrodata(
            survey.stratum[perm], survey.cluster[perm], survey.weight[perm], survey.y[perm], survey.group[perm], 5
        )
        _, a = rescaled_bootstrap(survey, PARAMS, BootstrapConfig(100, seed=4))
        _, b = rescaled_bootstrap(shuffled, PARAMS, BootstrapConfig(100, seed=4))
        np.testing.assert_allclose(np.sort(a), np.sort(b), rtol=1e-12)

    def test_constant_outcome_gives_zero_width(self, survey):
        flat = SurveyMicrodata(survey.stratum, survey.cluster, survey.weight, np.ones(len(survey)), survey.group, 5)
        est, reps = rescaled_bootstrap(flat, PARAMS, BootstrapConfig(100))
        np.testing.assert_allclose(reps, 0.0, atol=1e-14)
        assert est.std_error == pytest.approx(0.0, abs=1e-14)
        assert est.interval == pytest.approx((0.0, 0.0), abs=1e-14)

    def test_intervals(self, survey):
        est, reps = rescaled_bootstrap(survey, PARAMS, BootstrapConfig(400, seed=3))
        assert est.method is Method.BOOTSTRAP
        assert est.interval == pytest.approx(tuple(np.quantile(reps, [0.025, 0.975])))
        normal, _ = rescaled_bootstrap(survey, PARAMS, BootstrapConfig(400, seed=3, interval="normal"))
        half = (normal.interval[1] - normal.interval[0]) / 2
        assert half == pytest.approx(1.959963984540054 * normal.std_error)

    def test_agrees_with_linearization_for_large_clusters(self):
        # with many observations per cluster the index is close to linear over the
        # replicate spread, so both variance estimators target the same quantity
        t = load_fixture("nhanes_2009_2010")
        data = synthesize_microdata(t.dist, design=DesignSpec(4, 2, 1000), seed=0)
        for params in (IndexParams(alpha=1.0, nu=1.0), IndexParams(alpha=2.0, nu=2.0)):
            lin = linearized_variance(data, params)
            boot, _ = rescaled_bootstrap(data, params, BootstrapConfig(1000, seed=0))
            assert boot.std_error == pytest.approx(lin.std_error, rel=0.15)

    def test_singleton_stratum(self):
        d = SurveyMicrodata(np.array([1, 1, 2]), np.array([1, 2, 1]), np.ones(3), np.array([0.0, 1, 1]), np.array([1, 2, 1]), 2)
        with pytest.raises(DesignError):
            rescaled_bootstrap(d, PARAMS, BootstrapConfig(10))


class TestBootstrapDifference:
    def test_same_data_centers_on_zero(self, survey):
        res = bootstrap_difference(survey, survey, PARAMS, BootstrapConfig(500, seed=1))
        assert res.difference == 0.0
        assert res.interval[0] < 0 < res.interval[1]
        assert abs(np.median(res.replicates)) < 0.25 * (res.interval[1] - res.interval[0])
        assert res.p_value > 0.5

    def test_shifted_outcome_is_detected(self):
        t = load_fixture("nhanes_2009_2010")
        a = synthesize_microdata(t.dist, seed=2)
        shifted = t.dist.with_means(t.dist.means * np.array([1.5, 1.5, 1.0, 1.0, 1.0]))
        b = synthesize_microdata(shifted, seed=3)
        res = bootstrap_difference(a, b, PARAMS, BootstrapConfig(1000, seed=5))
        assert res.interval[1] < 0
        assert res.p_value < 0.05

    def test_p_value_bounds(self, survey):
        res = bootstrap_difference(survey, survey, PARAMS, BootstrapConfig(50, seed=0))
        assert 2 / 51 <= res.p_value <= 1.0


@pytest.fixture(scope="module")
def seer():
    return {y: load_fixture(f"seer_{y}") for y in range(2006, 2011)}


class TestPoissonNull:
    def test_effective_counts(self):
        dist = GroupedDistribution.from_arrays([0.5, 0.5], [8.0, 4.0])
        np.testing.assert_allclose(effective_counts(dist, [0.4, 0.5]), [400.0, 64.0])
        with pytest.raises(InvalidInput):
            effective_counts(dist, [0.4, 0.0])

    def test_requires_recovery_inputs(self, seer):
        t = seer[2010]
        with pytest.raises(InvalidInput):
            poisson_null_test(t.dist, PARAMS, NullSimConfig(10))
        with pytest.raises(InvalidInput):
            poisson_null_test(t.dist, PARAMS, NullSimConfig(10, count_recovery="age_strata"))

    def test_p_value_bounds_and_determinism(self, seer):
        t = seer[2008]
        cfg = NullSimConfig(200, seed=3)
        a = poisson_null_test(t.dist, PARAMS, cfg, std_errors=t.std_errors)
        b = poisson_null_test(t.dist, PARAMS, cfg, std_errors=t.std_errors)
        np.testing.assert_array_equal(a.null_values, b.null_values)
        assert 1 / 201 <= a.p_value <= 1.0

    def test_exact_equality_is_never_rejected(self):
        # an observed index of exactly 0 is matched or exceeded by every null replicate
        dist = GroupedDistribution.from_arrays([0.2, 0.3, 0.5], [7.0, 7.0, 7.0])
        res = poisson_null_test(dist, PARAMS, NullSimConfig(200), std_errors=[0.5, 0.4, 0.3])
        assert res.observed.value == 0.0
        assert res.p_value == 1.0

    def test_p_values_are_calibrated_under_the_null(self):
        # data drawn from the null itself should give roughly uniform p-values
        dist = GroupedDistribution.from_arrays([0.2, 0.3, 0.5], [7.0, 7.0, 7.0])
        se = np.array([0.5, 0.4, 0.3])
        exposure = (dist.means / se) ** 2 / dist.means
        rng = np.random.default_rng(0)
        ps = []
        for i in range(60):
            drawn = rng.poisson(7.0 * exposure) / exposure
            obs = dist.with_means(drawn)
            ps.append(poisson_null_test(obs, PARAMS, NullSimConfig(199, seed=i), std_errors=se).p_value)
        assert 0.35 < np.mean(ps) < 0.65
        assert 0.02 < np.mean(np.array(ps) < 0.1) < 0.25

    @pytest.mark.parametrize("year", range(2006, 2011))
    def test_table_rejects_independence(self, seer, year):
        t = seer[year]
        for nu in (1.0, 3.0):
            for alpha in (1.0, 2.0, 4.0):
                res = poisson_null_test(
                    t.dist, IndexParams(alpha=alpha, nu=nu), NullSimConfig(1000, seed=0), std_errors=t.std_errors
                )
                assert res.observed.value > np.quantile(res.null_values, 0.975)
                assert res.p_value < 0.05

    @pytest.mark.parametrize("year", range(2006, 2011))
    def test_doubling_replicates_is_stable(self, seer, year):
        t = seer[year]
        params = IndexParams(alpha=2.0, nu=3.0)
        p1 = poisson_null_test(t.dist, params, NullSimConfig(1000, seed=1), std_errors=t.std_errors).p_value
        p2 = poisson_null_test(t.dist, params, NullSimConfig(2000, seed=1), std_errors=t.std_errors).p_value
        assert abs(p1 - p2) < 0.02

    def test_age_strata_recovery(self):
        # three groups with identical age-specific rates: no disparity to detect
        rates = np.array([[10.0, 40.0]] * 3)
        n = np.array([[2e5, 1e5], [3e5, 2e5], [4e5, 3e5]])
        reg = RegistryRates(rates, n, np.array([0.6, 0.4]), rate_scale=1e5)
        means = rates @ reg.age_weights
        dist = GroupedDistribution.from_arrays(n.sum(axis=1), means)
        res = poisson_null_test(dist, PARAMS, NullSimConfig(200, count_recovery="age_strata"), registry=reg)
        assert res.p_value == 1.0
        assert np.all(res.null_values >= 0)

    def test_age_strata_detects_gradient(self):
        rates = np.array([[20.0, 60.0], [10.0, 40.0], [5.0, 20.0]])
        n = np.array([[2e5, 1e5], [3e5, 2e5], [4e5, 3e5]])
        reg = RegistryRates(rates, n, np.array([0.6, 0.4]), rate_scale=1e5)
        dist = GroupedDistribution.from_arrays(n.sum(axis=1), rates @ reg.age_weights)
        res = poisson_null_test(dist, PARAMS, NullSimConfig(500, count_recovery="age_strata"), registry=reg)
        assert res.p_value < 0.01
        assert res.observed.value == pytest.approx(core.renyi_index(dist, PARAMS).value)
