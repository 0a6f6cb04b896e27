import numpy as np
import pytest

from bedcast import scenario
from bedcast.errors import DomainError, FamilyMismatch
from bedcast.losfit import LosFamily, LosModel, conditional_survival
from bedcast.occupancy import expected_occupancy
from bedcast.scenario import ScenarioSpec


def lognormal_model(n, mu=10.0, sigma2=25.0, s_max=40):
    return LosModel(LosFamily.LOGNORMAL, None, np.full(n, mu), np.full(n, sigma2), s_max, 0.0)


class TestApplyScenario:
    def test_identity_is_bit_exact(self):
        lam = np.linspace(1.0, 3.0, 50)
        model = lognormal_model(50)
        lam2, model2 = scenario.apply_scenario(lam, model, ScenarioSpec())
        assert np.array_equal(lam2, lam)
        assert np.array_equal(model2.mu_t, model.mu_t)
        assert np.array_equal(model2.sigma2_t, model.sigma2_t)
        assert lam2 is not lam  # inputs are never mutated

    def test_multipliers_apply_in_window_only(self):
        lam = np.full(10, 2.0)
        model = lognormal_model(10)
        lam2, model2 = scenario.apply_scenario(
            lam, model, ScenarioSpec(beta_lambda=1.5, date_range=(2, 5))
        )
        assert lam2.tolist() == [2, 2, 3, 3, 3, 3, 2, 2, 2, 2]
        assert np.array_equal(model2.mu_t, model.mu_t)

    def test_composition_is_multiplicative(self):
        lam = np.linspace(1.0, 2.0, 30)
        model = lognormal_model(30)
        s1 = ScenarioSpec(beta_lambda=1.5, beta_mu=0.8, beta_sigma2=1.2)
        s2 = ScenarioSpec(beta_lambda=2.0, beta_mu=1.25, beta_sigma2=0.5)
        lam_a, model_a = scenario.apply_scenario(*scenario.apply_scenario(lam, model, s1), s2)
        combined = ScenarioSpec(
            beta_lambda=1.5 * 2.0, beta_mu=0.8 * 1.25, beta_sigma2=1.2 * 0.5
        )
        lam_b, model_b = scenario.apply_scenario(lam, model, combined)
        assert np.allclose(lam_a, lam_b, rtol=1e-12)
        assert np.allclose(model_a.mu_t, model_b.mu_t, rtol=1e-12)
        assert np.allclose(model_a.sigma2_t, model_b.sigma2_t, rtol=1e-12)

    def test_zero_variance_gives_step_survival(self):
        lam = np.ones(20)
        model = lognormal_model(20, mu=10.0)
        _, model0 = scenario.apply_scenario(lam, model, ScenarioSpec(beta_sigma2=0.0))
        assert conditional_survival(model0, 9, 0) == 1.0
        assert conditional_survival(model0, 11, 0) == 0.0

    def test_variance_scaling_needs_lognormal(self):
        lam = np.ones(10)
        model = LosModel(LosFamily.EXPONENTIAL, None, np.full(10, 8.0), np.ones(10), 30, 0.0)
        with pytest.raises(FamilyMismatch):
            scenario.apply_scenario(lam, model, ScenarioSpec(beta_sigma2=0.5))
        with pytest.raises(FamilyMismatch):
            scenario.apply_scenario(lam, model, ScenarioSpec(beta_sigma2=0.0))

    def test_mean_scaling_allowed_for_any_family(self):
        lam = np.ones(10)
        model = LosModel(LosFamily.EXPONENTIAL, None, np.full(10, 8.0), np.ones(10), 30, 0.0)
        _, model2 = scenario.apply_scenario(lam, model, ScenarioSpec(beta_mu=2.0))
        assert np.allclose(model2.mu_t, 16.0)

    def test_rate_scaling_scales_occupancy_exactly(self):
        lam = np.linspace(0.5, 2.5, 80)
        model = lognormal_model(80)
        lam2, model2 = scenario.apply_scenario(lam, model, ScenarioSpec(beta_lambda=1.7))
        base = expected_occupancy(lam, model).rho
        scaled = expected_occupancy(lam2, model2).rho
        assert np.allclose(scaled, 1.7 * base, rtol=1e-12)

    def test_bad_window(self):
        with pytest.raises(DomainError):
            scenario.apply_scenario(np.ones(5), lognormal_model(5), ScenarioSpec(date_range=(3, 9)))

    def test_spec_validation(self):
        with pytest.raises(DomainError):
            ScenarioSpec(beta_lambda=0.0)
        with pytest.raises(DomainError):
            ScenarioSpec(beta_sigma2=-0.1)
        with pytest.raises(DomainError):
            ScenarioSpec(beta_mu=float("nan"))


@pytest.fixture(scope="module")
def site():
    t = np.arange(730)
    lam = 2.0 * (1 + 0.35 * np.sin(2 * np.pi * t / 365))
    model = lognormal_model(730, mu=12.0, sigma2=(1.5 * 12.0) ** 2, s_max=84)
    return lam, model


class TestVarianceSensitivity:
    def test_baseline_beta_is_zero_change(self, site):
        lam, model = site
        table = scenario.variance_sensitivity(lam, model, betas=(1.0,))
        for strategy in table.strategies:
            assert table.pct_change[strategy][1.0] == 0.0
            assert table.beds[strategy][1.0] == table.baseline[strategy]

    def test_direction_pattern(self, site):
        lam, model = site
        table = scenario.variance_sensitivity(lam, model)
        for strategy in ("b_0.05", "b_0.01"):
            for beta in (0.0, 0.2, 0.5):
                assert table.pct_change[strategy][beta] >= 0.0
            for beta in (1.5, 1.8):
                assert table.pct_change[strategy][beta] <= 0.0

    def test_requires_lognormal(self):
        lam = np.ones(40)
        model = LosModel(LosFamily.GAMMA, 2.0, np.full(40, 8.0), np.ones(40), 30, 0.0)
        with pytest.raises(FamilyMismatch):
            scenario.variance_sensitivity(lam, model)

    def test_unknown_strategy(self, site):
        lam, model = site
        with pytest.raises(DomainError):
            scenario.variance_sensitivity(lam, model, betas=(1.0,), strategies=("b_best",))
