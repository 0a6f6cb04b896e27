import numpy as np
import pytest

from bedcast import diagnostics
from bedcast.errors import DomainError, TooFewBins, TooFewSamples, ZeroMean


class TestKsExponential:
    def test_exponential_data_not_rejected(self):
        passed = 0
        for seed in range(5):
            rng = np.random.default_rng(seed)
            result = diagnostics.ks_exponential(rng.exponential(3.0, 5000))
            passed += result.p_value > 0.01
        assert passed >= 4

    def test_constant_interarrivals_rejected(self):
        result = diagnostics.ks_exponential(np.full(500, 2.0))
        assert result.p_value < 1e-6

    def test_too_few(self):
        with pytest.raises(TooFewSamples):
            diagnostics.ks_exponential(np.ones(5))

    def test_positive_required(self):
        with pytest.raises(DomainError):
            diagnostics.ks_exponential(np.array([1.0] * 20 + [0.0]))

    def test_p_value_range(self):
        rng = np.random.default_rng(1)
        result = diagnostics.ks_exponential(rng.uniform(0.1, 5.0, 300))
        assert 0.0 <= result.p_value <= 1.0
        assert result.n == 300


class TestDispersionIndex:
    def test_constant_counts(self):
        result = diagnostics.dispersion_index(np.full(50, 4))
        assert result.statistic == 0.0

    def test_alternating_counts(self):
        result = diagnostics.dispersion_index(np.array([0, 10] * 20))
        assert result.statistic == pytest.approx(5.0)

    def test_poisson_counts_near_one(self):
        rng = np.random.default_rng(2)
        result = diagnostics.dispersion_index(rng.poisson(5.0, 10_000))
        assert abs(result.statistic - 1.0) < 0.05
        assert result.p_value > 0.001

    def test_zero_mean(self):
        with pytest.raises(ZeroMean):
            diagnostics.dispersion_index(np.zeros(10))

    def test_permutation_invariant(self):
        rng = np.random.default_rng(3)
        counts = rng.poisson(4.0, 200)
        shuffled = rng.permutation(counts)
        a = diagnostics.dispersion_index(counts)
        b = diagnostics.dispersion_index(shuffled)
        assert a.statistic == pytest.approx(b.statistic)
        assert a.p_value == pytest.approx(b.p_value)


class TestChi2PoissonGof:
    def test_poisson_counts_accepted(self):
        passed = 0
        for seed in range(5):
            rng = np.random.default_rng(seed)
            result = diagnostics.chi2_poisson_gof(rng.poisson(5.0, 5000))
            passed += result.p_value > 0.01
        assert passed >= 4

    def test_seasonal_counts_rejected(self):
        rng = np.random.default_rng(7)
        t = np.arange(3000)
        rates = 5.0 * (1 + 0.8 * np.sin(2 * np.pi * t / 365))
        counts = rng.poisson(rates)
        result = diagnostics.chi2_poisson_gof(counts)
        assert result.p_value < 1e-4

    def test_too_few_bins(self):
        with pytest.raises(TooFewBins):
            diagnostics.chi2_poisson_gof(np.array([0, 1] * 3))

    def test_permutation_invariant(self):
        rng = np.random.default_rng(4)
        counts = rng.poisson(6.0, 400)
        a = diagnostics.chi2_poisson_gof(counts)
        b = diagnostics.chi2_poisson_gof(rng.permutation(counts))
        assert a.statistic == pytest.approx(b.statistic)

    def test_merged_bins_have_enough_mass(self):
        rng = np.random.default_rng(5)
        result = diagnostics.chi2_poisson_gof(rng.poisson(2.0, 300))
        assert 0.0 <= result.p_value <= 1.0


class TestInterarrivalTimes:
    def test_gaps_are_positive_and_counted(self):
        counts = np.array([2, 0, 3, 1])
        gaps = diagnostics.interarrival_times(counts)
        assert len(gaps) == counts.sum() - 1
        assert np.all(gaps > 0)

    def test_uniform_rate_gaps_average_inverse_rate(self):
        rng = np.random.default_rng(6)
        counts = rng.poisson(4.0, 2000)
        gaps = diagnostics.interarrival_times(counts)
        assert abs(gaps.mean() - 0.25) < 0.01
