import numpy as np
import pytest

from evtcv import (
    CvPlan,
    FreshParabola,
    GevParams,
    GpdParams,
    ModelSpec,
    compare_models,
    fit_gev_mle,
    histogram_with_fit,
    return_level_data,
    run_blocking,
    sample_gev,
    worst_case_quantile,
)
from evtcv.distributions import gev_logpdf
from evtcv.fitting import FitResult

TABLE_GEV = GevParams(xi=-0.422, mu=20.734, sigma=0.508)
FIG_GPD = GpdParams(xi=-0.43, sigma=3.57, u=15.0)

# frozen closed-form values, cross-checked by the bisection oracle in
# test_distributions.py
GEV_Q95 = 21.594077778122593
GPD_Q95 = 21.01274010053218


def fake_fit(params, n=100):
    return FitResult(params=params, log_likelihood=-1.0, converged=True, n_samples=n)


class TestReturnLevels:
    def test_empirical_series_is_sorted_input(self, rng):
        values = rng.uniform(10, 30, 200)
        data = return_level_data(values, fake_fit(TABLE_GEV))
        np.testing.assert_array_equal(data.empirical_quantiles, np.sort(values))
        np.testing.assert_allclose(
            data.probabilities, np.arange(1, 201) / 201.0
        )

    def test_single_point_at_half(self):
        data = return_level_data(np.array([12.0]), fake_fit(TABLE_GEV))
        assert data.probabilities.tolist() == [0.5]
        assert data.empirical_quantiles.tolist() == [12.0]

    def test_permutation_invariant(self, rng):
        values = rng.uniform(0, 5, 50)
        a = return_level_data(values, fake_fit(TABLE_GEV))
        b = return_level_data(rng.permutation(values), fake_fit(TABLE_GEV))
        np.testing.assert_array_equal(a.empirical_quantiles, b.empirical_quantiles)

    def test_self_consistency_on_model_draws(self):
        draws = sample_gev(TABLE_GEV, 10_000, seed=31)
        fit = fit_gev_mle(draws)
        data = return_level_data(draws, fit)
        band = (data.probabilities >= 0.05) & (data.probabilities <= 0.95)
        gap = np.abs(data.theoretical_quantiles - data.empirical_quantiles)
        rel = gap[band] / np.abs(data.empirical_quantiles[band])
        assert rel.max() < 0.05

    def test_thinning_keeps_monotonicity(self, rng):
        values = rng.uniform(10, 30, 5000)
        data = return_level_data(values, fake_fit(TABLE_GEV), n_points=40)
        assert data.probabilities.size <= 40
        assert np.all(np.diff(data.empirical_quantiles) >= 0)
        assert np.all(np.diff(data.theoretical_quantiles) >= 0)


class TestHistogram:
    def test_density_normalization(self, rng):
        values = rng.uniform(5, 25, 4000)
        hist = histogram_with_fit(values, fake_fit(TABLE_GEV), n_bins=24)
        total = np.sum(hist.empirical_density * hist.bin_widths)
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_fitted_density_matches_logpdf(self, rng):
        values = rng.uniform(19, 22, 500)
        hist = histogram_with_fit(values, fake_fit(TABLE_GEV), n_bins=10)
        np.testing.assert_allclose(
            hist.fitted_density,
            np.exp(gev_logpdf(TABLE_GEV, hist.bin_centers)),
            rtol=1e-12,
        )

    def test_mean_metric_carried_from_extremes(self):
        plan = CvPlan(n_repetitions=20, train_fraction=0.5, seed=41)
        sample = run_blocking(FreshParabola(40), ModelSpec("linear"), plan)
        fit = fit_gev_mle(sample.values, None) if sample.values.size >= 20 else None
        hist = histogram_with_fit(sample, fake_fit(TABLE_GEV), n_bins=8)
        assert hist.mean_metric == pytest.approx(sample.mean_metric)


class TestWorstCaseQuantile:
    def test_table_gev_value(self):
        statement = worst_case_quantile(fake_fit(TABLE_GEV), 0.95)
        assert statement.value == pytest.approx(GEV_Q95, rel=1e-10)
        assert "95.0%" in statement.text

    def test_fig_gpd_value(self):
        statement = worst_case_quantile(fake_fit(FIG_GPD), 0.95)
        assert statement.value == pytest.approx(GPD_Q95, rel=1e-10)

    def test_exp_minus_one_returns_location(self):
        statement = worst_case_quantile(fake_fit(TABLE_GEV), np.exp(-1))
        assert statement.value == pytest.approx(TABLE_GEV.mu, rel=1e-12)

    def test_life_expectancy_style_params(self):
        # frozen via the scipy quantile oracle
        fit = fake_fit(GevParams(xi=-0.296, mu=18.217, sigma=1.559))
        statement = worst_case_quantile(fit, 0.95)
        assert statement.value == pytest.approx(21.29747819321009, rel=1e-10)

    def test_strictly_increasing_in_confidence(self):
        levels = np.linspace(0.05, 0.99, 25)
        values = [worst_case_quantile(fake_fit(TABLE_GEV), c).value for c in levels]
        assert np.all(np.diff(values) > 0)

    def test_context_threaded_into_text(self):
        statement = worst_case_quantile(
            fake_fit(FIG_GPD), 0.95, {"model": "linear", "error_kind": "absolute"}
        )
        assert "linear" in statement.text and "absolute" in statement.text

    def test_rejects_bad_confidence(self):
        with pytest.raises(ValueError):
            worst_case_quantile(fake_fit(TABLE_GEV), 1.0)


@pytest.fixture(scope="module")
def rows():
    plan = CvPlan(n_repetitions=60, train_fraction=0.5, seed=51)
    return compare_models(
        FreshParabola(100),
        [ModelSpec("linear"), ModelSpec("decision_tree"), ModelSpec("random_forest")],
        plan,
    )


class TestCompareModels:
    def test_two_rows_per_model(self, rows):
        assert len(rows) == 6
        assert [r.dataset_role for r in rows[:2]] == ["training", "validation"]

    def test_interpolator_training_row_is_na(self, rows):
        tree_training = next(
            r for r in rows
            if r.model.kind == "decision_tree" and r.dataset_role == "training"
        )
        assert tree_training.fit is None
        assert "DegenerateSample" in tree_training.fit_error
        assert tree_training.five_number == (0.0,) * 5

    def test_forest_validation_location_exceeds_training(self, rows):
        forest = {r.dataset_role: r for r in rows if r.model.kind == "random_forest"}
        assert forest["training"].fit is not None
        assert forest["validation"].fit is not None
        assert forest["validation"].fit.params.mu > forest["training"].fit.params.mu

    def test_quantile_dominates_mean_metric(self, rows):
        for row in rows:
            if row.fit is None or not row.fit.converged:
                continue
            q95 = worst_case_quantile(row.fit, 0.95).value
            assert q95 >= row.mean_metric

    def test_five_number_is_ordered(self, rows):
        for row in rows:
            fn = row.five_number
            assert fn[0] <= fn[1] <= fn[2] <= fn[3] <= fn[4]

    def test_full_zoo_gives_two_rows_per_model(self):
        specs = [ModelSpec(kind) for kind in
                 ("linear", "lasso", "knn", "decision_tree",
                  "random_forest", "gradient_boosting")]
        plan = CvPlan(n_repetitions=25, train_fraction=0.5, seed=52)
        zoo_rows = compare_models(FreshParabola(60), specs, plan)
        assert len(zoo_rows) == 12
        assert {r.model.kind for r in zoo_rows} == {s.kind for s in specs}
