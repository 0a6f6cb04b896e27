import numpy as np
import pytest

from bedcast import projection
from bedcast.errors import EmptyRuns, MissingBirths, MissingHistory, ZeroYearTotal
from bedcast.losfit import LosFamily
from bedcast.projection import ProjectionConfig, SiteHistory, YearHistory


def year_history(total, profile=None, mean_los=8.0):
    lam = np.full(365, total / 365.0) if profile is None else np.asarray(profile, dtype=float)
    return YearHistory(
        admissions=float(total),
        lambda_daily=lam,
        mu_daily=np.full(365, mean_los),
        sigma2_daily=np.full(365, 4.0),
        mean_los=mean_los,
    )


def make_history(site_totals: dict[str, dict[int, float]], family=LosFamily.EXPONENTIAL):
    return {
        sid: SiteHistory(
            site_id=sid,
            years={y: year_history(t) for y, t in totals.items()},
            family=family,
            kappa=None,
            s_max=30,
        )
        for sid, totals in site_totals.items()
    }


def flat_births(years, value=20000.0):
    return {y: value for y in years}


def config(history, y_future=(2024, 2026), births=None, **kwargs):
    years = sorted(next(iter(history.values())).years)
    return ProjectionConfig(
        y_future=y_future,
        y_ref_omega=tuple(years),
        y_ref_nu=tuple(years),
        births=births or flat_births(range(y_future[0], y_future[1] + 1)),
        **kwargs,
    )


class TestProjectAdmissions:
    def test_flat_births_identity(self):
        history = make_history({"A": {2021: 900, 2022: 1100}})
        cfg = config(history)
        a_hat = projection.project_admissions(cfg, history)
        assert all(v == pytest.approx(1000.0) for v in a_hat.values())

    def test_reference_births_ratio(self):
        history = make_history({"A": {2021: 1000}})
        births = {2024: 19337.0, 2030: 21049.0}
        births.update({y: 20000.0 for y in range(2025, 2030)})
        cfg = config(history, y_future=(2024, 2030), births=births)
        a_hat = projection.project_admissions(cfg, history)
        assert a_hat[2030] == pytest.approx(1088.53, abs=0.01)

    def test_drift_only(self):
        history = make_history({"A": {2021: 1000}})
        births = {2024: 15000.0, 2025: 17000.0, 2026: 19000.0, 2027: 23000.0}
        cfg = config(history, y_future=(2024, 2027), births=births, eta=0.0, psi=1.02)
        a_hat = projection.project_admissions(cfg, history)
        assert a_hat[2027] == pytest.approx(1061.208, abs=1e-3)

    def test_missing_births(self):
        history = make_history({"A": {2021: 1000}})
        with pytest.raises(MissingBirths):
            ProjectionConfig(
                y_future=(2024, 2026),
                y_ref_omega=(2021,),
                y_ref_nu=(2021,),
                births={2024: 1.0, 2026: 1.0},
            )

    def test_missing_history(self):
        history = make_history({"A": {2021: 1000}})
        cfg = ProjectionConfig(
            y_future=(2024, 2024),
            y_ref_omega=(2019, 2021),
            y_ref_nu=(2021,),
            births={2024: 1.0},
        )
        with pytest.raises(MissingHistory):
            projection.project_admissions(cfg, history)

    def test_scaling_one_year_scales_that_projection(self):
        history = make_history({"A": {2021: 1000}})
        births = {2024: 10000.0, 2025: 12000.0, 2026: 9000.0}
        cfg = config(history, births=births)
        base = projection.project_admissions(cfg, history)
        births2 = dict(births)
        births2[2025] *= 3.0
        cfg2 = config(history, births=births2)
        tripled = projection.project_admissions(cfg2, history)
        assert tripled[2025] == pytest.approx(3.0 * base[2025])
        assert tripled[2026] == pytest.approx(base[2026])


class TestSiteShares:
    def test_symmetric(self):
        history = make_history({"A": {2021: 500, 2022: 700}, "B": {2021: 500, 2022: 700}})
        shares = projection.site_shares(history, (2021, 2022))
        assert shares == {"A": pytest.approx(0.5), "B": pytest.approx(0.5)}

    def test_single_site(self):
        history = make_history({"A": {2021: 500}})
        assert projection.site_shares(history, (2021,)) == {"A": pytest.approx(1.0)}

    def test_mean_of_yearly_shares(self):
        history = make_history({"A": {2021: 200, 2022: 400}, "B": {2021: 800, 2022: 600}})
        shares = projection.site_shares(history, (2021, 2022))
        assert shares["A"] == pytest.approx(0.3)
        assert shares["B"] == pytest.approx(0.7)

    def test_shares_sum_to_one(self):
        rng = np.random.default_rng(0)
        totals = {f"S{i}": {2021: rng.uniform(100, 900), 2022: rng.uniform(100, 900)} for i in range(5)}
        shares = projection.site_shares(make_history(totals), (2021, 2022))
        assert sum(shares.values()) == pytest.approx(1.0, abs=1e-12)

    def test_zero_year_total(self):
        history = make_history({"A": {2021: 0}})
        with pytest.raises(ZeroYearTotal):
            projection.site_shares(history, (2021,))


class TestResampleProfile:
    def test_unit_mass_year(self):
        profile = np.zeros(365)
        profile[100] = 7.0
        site = SiteHistory("A", {2021: year_history(7, profile)}, LosFamily.EXPONENTIAL, None, 30)
        _, p = projection.resample_profile(site, (2021,), np.random.default_rng(0))
        assert p[100] == 1.0
        assert p.sum() == pytest.approx(1.0, abs=1e-12)

    def test_zero_year_uniform_fallback(self):
        site = SiteHistory("A", {2021: year_history(0, np.zeros(365))}, LosFamily.EXPONENTIAL, None, 30)
        _, p = projection.resample_profile(site, (2021,), np.random.default_rng(0))
        assert np.allclose(p, 1.0 / 365.0)

    def test_uniform_year(self):
        site = SiteHistory("A", {2021: year_history(365)}, LosFamily.EXPONENTIAL, None, 30)
        _, p = projection.resample_profile(site, (2021,), np.random.default_rng(0))
        assert np.allclose(p, 1.0 / 365.0, atol=1e-15)
        assert p.sum() == pytest.approx(1.0, abs=1e-12)

    def test_year_sampled_from_reference_set(self):
        site = SiteHistory(
            "A", {y: year_history(100 + y) for y in (2019, 2020, 2021)},
            LosFamily.EXPONENTIAL, None, 30,
        )
        rng = np.random.default_rng(1)
        seen = {projection.resample_profile(site, (2019, 2021), rng)[0] for _ in range(50)}
        assert seen <= {2019, 2021}
        assert len(seen) == 2


class TestProjectRun:
    def test_annual_total_matches_target_exactly(self):
        rng = np.random.default_rng(2)
        profile = rng.uniform(0.5, 3.0, 365)
        history = {
            "A": SiteHistory("A", {2021: year_history(800, profile)}, LosFamily.EXPONENTIAL, None, 25)
        }
        cfg = config(history, runs=1)
        runs = projection.project_run(cfg, history, 0)
        a_hat = projection.project_admissions(cfg, history)
        shares = projection.site_shares(history, cfg.y_ref_omega)
        for item in runs:
            target = shares[item.site_id] * a_hat[item.year]
            assert abs(item.lambda_hat.sum() - target) <= 1e-9

    def test_determinism(self):
        history = make_history({"A": {2021: 600, 2022: 700}, "B": {2021: 400, 2022: 300}})
        cfg = config(history, seed=5)
        first = projection.project_run(cfg, history, 3)
        second = projection.project_run(cfg, history, 3)
        for a, b in zip(first, second):
            assert np.array_equal(a.lambda_hat, b.lambda_hat)
            assert np.array_equal(a.rho, b.rho)
            assert a.beds == b.beds
            assert (a.arrivals_year, a.los_year) == (b.arrivals_year, b.los_year)

    def test_flat_inputs_single_reference_year(self):
        history = make_history({"A": {2021: 730}})
        cfg = config(history)
        for r in range(3):
            for item in projection.project_run(cfg, history, r):
                assert item.lambda_hat.sum() == pytest.approx(730.0, abs=1e-9)
                assert item.arrivals_year == 2021

    def test_beds_keys(self):
        history = make_history({"A": {2021: 500}})
        cfg = config(history)
        item = projection.project_run(cfg, history, 0)[0]
        assert set(item.beds) == {"b_max", "b_0.05", "b_0.01"}


class TestSummaries:
    def test_identical_runs(self):
        history = make_history({"A": {2021: 500}})
        cfg = config(history, y_future=(2024, 2024), births={2024: 1.0}, runs=4)
        runs = [projection.project_run(cfg, history, r) for r in range(4)]
        stats = projection.summarize_runs(runs)[("A", 2024)]["b_0.05"]
        assert stats.median == stats.mean
        assert stats.q25 == stats.q75
        assert stats.sd == 0.0

    def test_quantile_interpolation(self):
        runs = []
        for value in (1, 2, 3, 4):
            runs.append([projection.SiteYearRun("A", 2024, 2021, 2021,
                                                np.zeros(1), np.zeros(1), {"b": value})])
        stats = projection.summarize_runs(runs)[("A", 2024)]["b"]
        assert stats.median == 2.5

    def test_population_sd(self):
        runs = []
        for value in (10, 10, 40):
            runs.append([projection.SiteYearRun("A", 2024, 2021, 2021,
                                                np.zeros(1), np.zeros(1), {"b": value})])
        stats = projection.summarize_runs(runs)[("A", 2024)]["b"]
        assert stats.mean == pytest.approx(20.0)
        assert stats.sd == pytest.approx(14.142, abs=1e-3)

    def test_empty_runs(self):
        with pytest.raises(EmptyRuns):
            projection.summarize_runs([])

    def test_full_projection_reproducible(self):
        history = make_history({"A": {2021: 500, 2022: 600}})
        cfg = config(history, runs=5, seed=9)
        first = projection.project(cfg, history)
        second = projection.project(cfg, history)
        assert first.b_average == second.b_average
        for key in first.strategies:
            for name in first.strategies[key]:
                assert first.strategies[key][name] == second.strategies[key][name]

    def test_b_average_deterministic_and_positive(self):
        history = make_history({"A": {2021: 500, 2022: 600}})
        cfg = config(history, runs=2)
        summary = projection.project(cfg, history)
        for (sid, year), beds in summary.b_average.items():
            assert beds >= 1
