import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bedcast import planning
from bedcast.errors import DomainError, EmptyInput, EmptySeries, SearchExhausted


def tail_by_pmf(k, mean):
    """Poisson tail by direct pmf summation; the independent oracle."""
    total = 0.0
    p = math.exp(-mean)
    for j in range(k + 1):
        total += p
        p *= mean / (j + 1)
    return 1.0 - total


def brute_force_overflow(rho_values, gamma, alpha, cap=20000):
    for beds in range(1, cap + 1):
        tails = [tail_by_pmf(math.floor(gamma * beds), r) for r in rho_values]
        if sum(tails) / len(tails) <= alpha:
            return beds
    raise RuntimeError("no capacity found")


class TestPoissonTail:
    def test_degenerate(self):
        assert planning.poisson_tail(0, 0.0) == 0.0

    def test_oracle_values(self):
        assert planning.poisson_tail(15, 10.0) == pytest.approx(0.04874, abs=5e-6)
        assert planning.poisson_tail(9, 10.0) == pytest.approx(0.54207, abs=5e-6)

    def test_matches_pmf_summation(self):
        for k in (0, 3, 10, 40):
            for mean in (0.5, 4.0, 12.0, 30.0):
                assert planning.poisson_tail(k, mean) == pytest.approx(
                    tail_by_pmf(k, mean), abs=1e-10
                )

    def test_complement_identity(self):
        for mean in (0.1, 2.0, 9.5):
            for k in (0, 2, 7):
                pmf_sum = 1.0 - tail_by_pmf(k, mean)
                assert planning.poisson_tail(k, mean) + pmf_sum == pytest.approx(1.0, abs=1e-10)

    def test_domain(self):
        with pytest.raises(DomainError):
            planning.poisson_tail(-1, 2.0)
        with pytest.raises(DomainError):
            planning.poisson_tail(2, -0.5)


class TestBOverflow:
    def test_spec_points(self):
        rho = np.full(20, 10.0)
        assert planning.b_overflow(rho, 1.0, 0.05) == 15
        assert planning.b_overflow(rho, 0.85, 0.05) == 18

    def test_matches_brute_force_on_varying_series(self):
        rng = np.random.default_rng(5)
        for _ in range(8):
            rho = rng.uniform(2.0, 30.0, size=15)
            for gamma in (0.85, 1.0):
                for alpha in (0.01, 0.05):
                    assert planning.b_overflow(rho, gamma, alpha) == brute_force_overflow(
                        rho, gamma, alpha
                    )

    def test_alpha_monotonicity(self):
        rho = np.full(10, 17.0)
        assert planning.b_overflow(rho, 1.0, 0.01) >= planning.b_overflow(rho, 1.0, 0.05)

    def test_gamma_monotonicity(self):
        rho = np.full(10, 17.0)
        assert planning.b_overflow(rho, 0.85, 0.05) >= planning.b_overflow(rho, 1.0, 0.05)

    def test_per_day_mode_at_least_averaged(self):
        rho = np.concatenate([np.full(50, 5.0), np.full(5, 25.0)])
        averaged = planning.b_overflow(rho, 1.0, 0.05)
        worst_day = planning.b_overflow(rho, 1.0, 0.05, per_day=True)
        assert worst_day >= averaged

    def test_search_exhausted(self):
        with pytest.raises(SearchExhausted):
            planning.b_overflow(np.full(5, 10.0), 1e-4, 0.05)

    def test_parameter_validation(self):
        rho = np.full(3, 5.0)
        with pytest.raises(DomainError):
            planning.b_overflow(rho, 1.5, 0.05)
        with pytest.raises(DomainError):
            planning.b_overflow(rho, 1.0, 0.0)

    def test_empty_series(self):
        with pytest.raises(EmptySeries):
            planning.b_overflow(np.array([]), 1.0, 0.05)

    @given(st.floats(0.5, 40.0), st.sampled_from([0.85, 1.0]), st.sampled_from([0.01, 0.05]))
    @settings(max_examples=40, deadline=None)
    def test_constant_series_equals_brute_force(self, rho_bar, gamma, alpha):
        rho = np.full(4, rho_bar)
        assert planning.b_overflow(rho, gamma, alpha) == brute_force_overflow(rho, gamma, alpha)


class TestBAverageAndMax:
    def test_perfect_square(self):
        assert planning.b_average(2.0, 12.5) == 30

    def test_small_values(self):
        assert planning.b_average(1.0, 1.0) == 2

    def test_domain(self):
        with pytest.raises(DomainError):
            planning.b_average(0.0, 5.0)

    def test_b_max_constant_equals_b_average(self):
        assert planning.b_max(np.full(10, 25.0)) == planning.b_average(5.0, 5.0) == 30

    def test_b_max_peak(self):
        assert planning.b_max(np.array([2.0, 16.0, 1.0])) == 20

    def test_b_max_empty(self):
        with pytest.raises(EmptySeries):
            planning.b_max(np.array([]))

    def test_peak_product_heuristic(self):
        counts = np.array([2, 10, 0])
        mean_los = np.array([3.0, 13.4, np.nan])
        assert planning.peak_product_heuristic(counts, mean_los) == 134


class TestUtilizationStats:
    def test_no_overload(self):
        stats = planning.utilization_stats([10, 20], 20)
        assert stats.mean_pct == 75.0
        assert stats.pct_days_over_100 == 0.0
        assert stats.excess_mean_pct is None
        assert stats.excess_sd_pct is None

    def test_overload_half_days(self):
        stats = planning.utilization_stats([25, 15], 20)
        assert stats.mean_pct == 100.0
        assert stats.pct_days_over_100 == 50.0
        assert stats.excess_mean_pct == 25.0
        assert stats.excess_sd_pct == 0.0

    def test_shortfall_below_seventy(self):
        stats = planning.utilization_stats([10, 20], 20)  # 50% and 100%
        assert stats.pct_days_under_70 == 50.0
        assert stats.shortfall_mean_pct == 20.0

    def test_population_sd(self):
        stats = planning.utilization_stats([10, 30], 20)  # 50%, 150%
        assert stats.sd_pct == 50.0

    def test_capacity_validated(self):
        with pytest.raises(DomainError):
            planning.utilization_stats([1], 0)

    @given(st.lists(st.integers(0, 60), min_size=1, max_size=50), st.integers(1, 40))
    @settings(max_examples=60, deadline=None)
    def test_percentage_ranges(self, census, capacity):
        stats = planning.utilization_stats(census, capacity)
        assert 0 <= stats.pct_days_over_100 <= 100
        assert 0 <= stats.pct_days_under_70 <= 100
        if stats.excess_mean_pct is not None:
            assert stats.excess_mean_pct > 0
        if stats.shortfall_mean_pct is not None:
            assert 0 < stats.shortfall_mean_pct <= 70


class TestWeightedAggregate:
    def test_single_site(self):
        assert planning.weighted_aggregate([(80.0, 5.0)]) == (80.0, 0.0)

    def test_weighted_mean(self):
        mean, _ = planning.weighted_aggregate([(80.0, 1.0), (90.0, 3.0)])
        assert mean == 87.5

    def test_equal_weights_sd(self):
        mean, sd = planning.weighted_aggregate([(70.0, 2.0), (90.0, 2.0)])
        assert mean == 80.0
        assert sd == 10.0

    def test_empty(self):
        with pytest.raises(EmptyInput):
            planning.weighted_aggregate([])

    def test_nonpositive_weights(self):
        with pytest.raises(DomainError):
            planning.weighted_aggregate([(80.0, 0.0)])
