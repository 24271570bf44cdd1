import math

import numpy as np
import pytest

from evtcv import (
    BootstrapCi,
    ConfidenceInterval,
    FitOptions,
    GevParams,
    GpdParams,
    bootstrap_ci,
    fit_gev_mle,
    fit_gpd_mle,
    gev_cdf,
    gev_logpdf,
    gpd_logpdf,
    gumbel_hypothesis_check,
    sample_gev,
    sample_gpd,
)
from evtcv import _kernels
from evtcv.errors import (
    BootstrapDegenerate,
    DegenerateSample,
    ThresholdViolation,
    TooFewSamples,
)

from helpers import random_gev_params, random_gpd_params


class TestKernelParity:
    """The jitted objectives must agree with the public log-densities."""

    def test_gev_objective_matches_logpdf(self, rng):
        for _ in range(20):
            p = random_gev_params(rng)
            data = sample_gev(p, 200, seed=rng.integers(1 << 30))
            theta = np.array([p.xi, p.mu, math.log(p.sigma)])
            expected = -np.sum(gev_logpdf(p, data))
            got = _kernels.neg_log_likelihood(_kernels.OBJ_GEV, theta, data)
            assert got == pytest.approx(expected, rel=1e-12)

    def test_gev_objective_infinite_outside_support(self):
        data = np.linspace(-5.0, 5.0, 50)
        theta = np.array([-0.5, 0.0, math.log(1.0)])  # support caps at z=2
        assert _kernels.neg_log_likelihood(_kernels.OBJ_GEV, theta, data) == math.inf

    def test_gpd_objective_matches_logpdf(self, rng):
        for _ in range(20):
            p = random_gpd_params(rng)
            data = sample_gpd(p, 200, seed=rng.integers(1 << 30))
            theta = np.array([p.xi, math.log(p.sigma)])
            expected = -np.sum(gpd_logpdf(p, data))
            got = _kernels.neg_log_likelihood(_kernels.OBJ_GPD, theta, data - p.u)
            assert got == pytest.approx(expected, rel=1e-12)

    def test_gumbel_objective_matches_logpdf(self, rng):
        p = GevParams(0.0, 3.0, 2.0)
        data = sample_gev(p, 500, seed=1)
        theta = np.array([p.mu, math.log(p.sigma)])
        expected = -np.sum(gev_logpdf(p, data))
        got = _kernels.neg_log_likelihood(_kernels.OBJ_GUMBEL, theta, data)
        assert got == pytest.approx(expected, rel=1e-12)


class TestFitGev:
    def test_recovers_parameters_from_large_sample(self):
        truth = GevParams(xi=-0.3, mu=20.0, sigma=0.5)
        fit = fit_gev_mle(sample_gev(truth, 10_000, seed=42))
        assert fit.converged
        assert fit.n_samples == 10_000
        assert fit.params.xi == pytest.approx(truth.xi, abs=0.05)
        assert fit.params.mu == pytest.approx(truth.mu, abs=0.05)
        assert fit.params.sigma == pytest.approx(truth.sigma, abs=0.05)

    def test_degenerate_sample_rejected(self):
        with pytest.raises(DegenerateSample):
            fit_gev_mle(np.zeros(100))

    def test_too_few_samples(self):
        with pytest.raises(TooFewSamples):
            fit_gev_mle(np.arange(10.0))

    def test_non_finite_rejected(self):
        bad = np.r_[np.ones(30), np.nan]
        with pytest.raises(ValueError):
            fit_gev_mle(bad)

    def test_idempotent_restart_from_optimum(self):
        sample = sample_gev(GevParams(-0.2, 5.0, 1.0), 2000, seed=7)
        first = fit_gev_mle(sample)
        p = first.params
        again = fit_gev_mle(sample, FitOptions(start=(p.xi, p.mu, p.sigma)))
        assert again.log_likelihood >= first.log_likelihood - 1e-6

    def test_stationary_optimum(self):
        sample = sample_gev(GevParams(-0.25, 10.0, 2.0), 5000, seed=3)
        fit = fit_gev_mle(sample)
        p = fit.params

        def nll(xi, mu, sigma):
            return -np.sum(gev_logpdf(GevParams(xi, mu, sigma), sample))

        grad = []
        for i, scale in enumerate((max(abs(p.xi), 0.1), abs(p.mu), p.sigma)):
            h = 1e-5 * scale
            args = [p.xi, p.mu, p.sigma]
            hi = list(args); hi[i] += h
            lo = list(args); lo[i] -= h
            grad.append((nll(*hi) - nll(*lo)) / (2 * h) * scale / fit.n_samples)
        assert np.linalg.norm(grad) < 1e-3

    def test_shift_scale_equivariance(self):
        sample = sample_gev(GevParams(-0.3, 2.0, 0.7), 1000, seed=11)
        base = fit_gev_mle(sample).params
        a, b = 3.5, -40.0
        moved = fit_gev_mle(a * sample + b).params
        assert moved.xi == pytest.approx(base.xi, abs=1e-6)
        assert moved.mu == pytest.approx(a * base.mu + b, rel=1e-6)
        assert moved.sigma == pytest.approx(a * base.sigma, rel=1e-6)


class TestFitGpd:
    def test_recovers_parameters(self):
        truth = GpdParams(xi=-0.43, sigma=3.57, u=15.0)
        fit = fit_gpd_mle(sample_gpd(truth, 5000, seed=7), u=15.0)
        assert fit.converged
        assert fit.params.xi == pytest.approx(truth.xi, abs=0.05)
        assert fit.params.sigma == pytest.approx(truth.sigma, abs=0.05)
        assert fit.params.u == 15.0

    def test_exponential_data_gives_xi_near_zero(self, rng):
        draws = 2.0 + np.random.default_rng(5).exponential(1.0, 10_000)
        fit = fit_gpd_mle(draws, u=2.0)
        assert abs(fit.params.xi) < 0.05
        assert fit.params.sigma == pytest.approx(1.0, abs=0.05)

    def test_threshold_violation(self):
        values = np.r_[np.linspace(16, 20, 30), 14.0]
        with pytest.raises(ThresholdViolation):
            fit_gpd_mle(values, u=15.0)

    def test_value_equal_to_threshold_rejected(self):
        values = np.r_[np.linspace(16, 20, 30), 15.0]
        with pytest.raises(ThresholdViolation):
            fit_gpd_mle(values, u=15.0)

    def test_shift_scale_equivariance(self):
        truth = GpdParams(xi=-0.2, sigma=1.5, u=4.0)
        sample = sample_gpd(truth, 1500, seed=13)
        base = fit_gpd_mle(sample, u=4.0).params
        a, b = 2.5, 10.0
        moved = fit_gpd_mle(a * sample + b, u=a * 4.0 + b).params
        assert moved.xi == pytest.approx(base.xi, abs=1e-6)
        assert moved.sigma == pytest.approx(a * base.sigma, rel=1e-6)


class TestBootstrapCi:
    def test_deterministic_per_seed(self):
        sample = sample_gev(GevParams(-0.3, 20.0, 0.5), 400, seed=2)
        one = bootstrap_ci(sample, fit_gev_mle, n_bootstrap=150, seed=9)
        two = bootstrap_ci(sample, fit_gev_mle, n_bootstrap=150, seed=9)
        assert one == two
        assert isinstance(one, BootstrapCi)
        assert set(one.intervals) == {"xi", "mu", "sigma"}

    def test_interval_covers_point_estimate(self):
        sample = sample_gev(GevParams(-0.3, 20.0, 0.5), 1000, seed=4)
        fit = fit_gev_mle(sample)
        cis = bootstrap_ci(sample, fit_gev_mle, n_bootstrap=200, seed=1)
        for name in ("xi", "mu", "sigma"):
            assert cis[name].contains(getattr(fit.params, name))

    def test_gpd_interval_names_exclude_threshold(self):
        sample = sample_gpd(GpdParams(-0.3, 2.0, 5.0), 500, seed=3)
        cis = bootstrap_ci(sample, lambda s: fit_gpd_mle(s, 5.0), n_bootstrap=120, seed=2)
        assert set(cis.intervals) == {"xi", "sigma"}

    def test_degenerate_sample_raises_bootstrap_degenerate(self):
        with pytest.raises(BootstrapDegenerate):
            bootstrap_ci(np.ones(50), fit_gev_mle, n_bootstrap=100, seed=0)

    def test_mostly_constant_sample_fails_replicates(self):
        # resamples that miss the single distinct value degenerate (~36%)
        sample = np.r_[np.ones(19), 2.0]
        with pytest.raises(BootstrapDegenerate):
            bootstrap_ci(sample, fit_gev_mle, n_bootstrap=150, seed=0)

    def test_requires_minimum_replicates(self):
        sample = sample_gev(GevParams(-0.3, 20.0, 0.5), 200, seed=2)
        with pytest.raises(ValueError):
            bootstrap_ci(sample, fit_gev_mle, n_bootstrap=50)


class TestGumbelCheck:
    def test_gumbel_sample_prefers_gumbel(self):
        sample = sample_gev(GevParams(0.0, 0.0, 1.0), 5000, seed=21)
        fit = fit_gev_mle(sample)
        ci = bootstrap_ci(sample, fit_gev_mle, n_bootstrap=150, seed=5)
        verdict = gumbel_hypothesis_check(sample, fit, ci["xi"])
        assert ci["xi"].contains(0.0)
        assert verdict.preferred == "gumbel"
        assert verdict.lr_statistic is not None
        assert verdict.lr_statistic < verdict.critical_value
        assert verdict.critical_value == pytest.approx(3.841, abs=5e-3)
        assert verdict.gev_fit.gumbel_flag == "xi_ci_includes_zero"
        assert verdict.gumbel_fit.params.xi == 0.0

    def test_heavy_tail_keeps_gev(self):
        sample = sample_gev(GevParams(0.4, 0.0, 1.0), 5000, seed=22)
        fit = fit_gev_mle(sample)
        ci = bootstrap_ci(sample, fit_gev_mle, n_bootstrap=150, seed=6)
        verdict = gumbel_hypothesis_check(sample, fit, ci["xi"])
        assert verdict.preferred == "gev"

    def test_ci_excluding_zero_skips_refit(self):
        sample = sample_gev(GevParams(-0.422, 20.734, 0.508), 3000, seed=23)
        fit = fit_gev_mle(sample)
        ci = ConfidenceInterval(lower=-0.458, upper=-0.399, level=0.95, n_bootstrap=1000)
        verdict = gumbel_hypothesis_check(sample, fit, ci)
        assert verdict.preferred == "gev"
        assert verdict.reason == "xi_ci_excludes_zero"
        assert verdict.gumbel_fit is None
        assert verdict.lr_statistic is None
        assert verdict.gev_fit.gumbel_flag == "xi_ci_excludes_zero"


class TestSamplers:
    def test_single_draw_inside_support(self):
        p = GevParams(-0.5, 0.0, 1.0)
        value = sample_gev(p, 1, seed=0)
        assert value.shape == (1,)
        assert value[0] <= -1.0 / p.xi  # upper endpoint mu - sigma/xi = 2

    def test_deterministic(self):
        p = GevParams(0.2, 1.0, 2.0)
        np.testing.assert_array_equal(sample_gev(p, 50, seed=9), sample_gev(p, 50, seed=9))

    def test_empirical_cdf_matches_model(self):
        p = GevParams(-0.3, 20.0, 0.5)
        draws = np.sort(sample_gev(p, 100_000, seed=17))
        ecdf = np.arange(1, draws.size + 1) / draws.size
        sup = np.max(np.abs(ecdf - gev_cdf(p, draws)))
        assert sup < 0.01

    def test_rejects_nonpositive_n(self):
        with pytest.raises(ValueError):
            sample_gev(GevParams(0.0, 0.0, 1.0), 0, seed=0)
