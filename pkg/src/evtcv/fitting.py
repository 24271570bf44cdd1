"""Maximum-likelihood fitting of the GEV/GPD families.

The optimizer is a derivative-free simplex search over unconstrained
coordinates, with the scale kept positive through a log reparameterization
(sigma = exp(s)); out-of-support proposals get an infinite objective and
are rejected by the simplex moves.  Confidence intervals use the
percentile bootstrap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import chi2

from . import _kernels
from .distributions import GevParams, GpdParams, gev_quantile, gpd_quantile
from .errors import (
    BootstrapDegenerate,
    DegenerateSample,
    ThresholdViolation,
    TooFewSamples,
)

__all__ = [
    "MIN_FIT_N",
    "FitOptions",
    "FitResult",
    "ConfidenceInterval",
    "BootstrapCi",
    "GumbelVerdict",
    "fit_gev_mle",
    "fit_gpd_mle",
    "bootstrap_ci",
    "gumbel_hypothesis_check",
    "sample_gev",
    "sample_gpd",
]

MIN_FIT_N = 20

# Euler-Mascheroni, for the Gumbel moment start
_EULER = 0.5772156649015329

# shape values for restarts when the first simplex run stalls
_RETRY_SHAPES = (-0.4, -0.1, 0.1, 0.4, 0.8)


@dataclass(frozen=True)
class FitOptions:
    """Optimizer budget and sample-size guard for the MLE routines."""

    max_evals: int = 10_000
    tol: float = 1e-10
    min_fit_n: int = MIN_FIT_N
    start: tuple | None = None  # (xi, mu, sigma) for GEV, (xi, sigma) for GPD


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    level: float = 0.95
    n_bootstrap: int = 0

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise ValueError(f"lower={self.lower} > upper={self.upper}")
        if not 0.0 < self.level < 1.0:
            raise ValueError(f"level must be in (0,1), got {self.level}")

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    @property
    def half_width(self) -> float:
        return 0.5 * (self.upper - self.lower)


@dataclass(frozen=True)
class FitResult:
    params: GevParams | GpdParams
    log_likelihood: float
    converged: bool
    n_samples: int
    gumbel_flag: str = "not_applicable"  # | xi_ci_excludes_zero | xi_ci_includes_zero


@dataclass(frozen=True)
class BootstrapCi:
    """Per-parameter percentile intervals plus the dropped-replicate count."""

    intervals: dict[str, ConfidenceInterval]
    n_requested: int
    n_failed: int

    def __getitem__(self, name: str) -> ConfidenceInterval:
        return self.intervals[name]


@dataclass(frozen=True)
class GumbelVerdict:
    preferred: str  # "gev" | "gumbel"
    reason: str
    gev_fit: FitResult
    gumbel_fit: FitResult | None = None
    lr_statistic: float | None = None
    critical_value: float | None = None


def _check_sample(sample, options: FitOptions) -> np.ndarray:
    x = np.ascontiguousarray(sample, dtype=float)
    if x.ndim != 1:
        raise ValueError("sample must be one-dimensional")
    if not np.isfinite(x).all():
        raise ValueError("sample contains non-finite values")
    if x.size < options.min_fit_n:
        raise TooFewSamples(
            f"need at least {options.min_fit_n} values, got {x.size}"
        )
    if np.ptp(x) == 0.0:
        raise DegenerateSample(
            "all sample values are identical; no tail distribution can be fitted"
        )
    return x


def _minimize(obj: int, data: np.ndarray, starts, options: FitOptions):
    """Run the simplex from each start until one converges; keep the best."""
    best = None
    for theta0 in starts:
        x, f, _, conv = _kernels.nelder_mead(
            obj,
            data,
            np.asarray(theta0, dtype=float),
            options.max_evals,
            options.tol,
            options.tol,
        )
        if best is None or f < best[1]:
            best = (x, f, conv)
        if conv and math.isfinite(f):
            return x, f, True
    return best


def _gumbel_moment_start(x: np.ndarray) -> tuple[float, float]:
    sigma0 = math.sqrt(6.0) * float(np.std(x)) / math.pi
    sigma0 = max(sigma0, 1e-12)
    mu0 = float(np.mean(x)) - _EULER * sigma0
    return mu0, sigma0


def fit_gev_mle(sample, options: FitOptions | None = None) -> FitResult:
    """Fit (xi, mu, sigma) by maximum likelihood.

    Raises DegenerateSample for constant input and TooFewSamples below the
    configured minimum; a stalled optimizer is reported via
    ``converged=False`` rather than an exception.
    """
    options = options or FitOptions()
    x = _check_sample(sample, options)
    mu0, sigma0 = _gumbel_moment_start(x)
    if options.start is not None:
        xi, mu, sigma = options.start
        starts = [(xi, mu, math.log(sigma))]
    else:
        starts = [(0.1, mu0, math.log(sigma0))]
        starts += [(xi0, mu0, math.log(sigma0)) for xi0 in _RETRY_SHAPES]
    theta, f, conv = _minimize(_kernels.OBJ_GEV, x, starts, options)
    params = GevParams(xi=float(theta[0]), mu=float(theta[1]), sigma=math.exp(theta[2]))
    return FitResult(
        params=params,
        log_likelihood=-f,
        converged=bool(conv and math.isfinite(f)),
        n_samples=x.size,
    )


def fit_gpd_mle(exceedances, u: float, options: FitOptions | None = None) -> FitResult:
    """Fit (xi, sigma) to exceedances over the fixed threshold u."""
    options = options or FitOptions()
    x = _check_sample(exceedances, options)
    if np.any(x <= u):
        raise ThresholdViolation(
            f"{int(np.sum(x <= u))} of {x.size} values are not above u={u}"
        )
    excess = x - u
    sigma0 = max(float(np.mean(excess)), 1e-12)
    if options.start is not None:
        xi, sigma = options.start
        starts = [(xi, math.log(sigma))]
    else:
        starts = [(0.1, math.log(sigma0))]
        starts += [(xi0, math.log(sigma0)) for xi0 in _RETRY_SHAPES]
    theta, f, conv = _minimize(_kernels.OBJ_GPD, excess, starts, options)
    params = GpdParams(xi=float(theta[0]), sigma=math.exp(theta[1]), u=float(u))
    return FitResult(
        params=params,
        log_likelihood=-f,
        converged=bool(conv and math.isfinite(f)),
        n_samples=x.size,
    )


def _fit_gumbel(sample, options: FitOptions) -> FitResult:
    x = np.ascontiguousarray(sample, dtype=float)
    mu0, sigma0 = _gumbel_moment_start(x)
    theta, f, conv = _minimize(
        _kernels.OBJ_GUMBEL, x, [(mu0, math.log(sigma0))], options
    )
    params = GevParams(xi=0.0, mu=float(theta[0]), sigma=math.exp(theta[1]))
    return FitResult(
        params=params,
        log_likelihood=-f,
        converged=bool(conv and math.isfinite(f)),
        n_samples=x.size,
    )


def _free_param_names(params) -> list[str]:
    if isinstance(params, GpdParams):
        return ["xi", "sigma"]  # u is the fixed threshold, not estimated
    return ["xi", "mu", "sigma"]


def bootstrap_ci(
    sample,
    fit,
    n_bootstrap: int = 1000,
    level: float = 0.95,
    seed: int = 0,
    max_failure_share: float = 0.2,
) -> BootstrapCi:
    """Percentile-bootstrap confidence intervals for the fitted parameters.

    ``fit`` is the fitting procedure (sample -> FitResult); it must succeed
    on the original sample.  Replicates are resampled with replacement,
    refitted, and the empirical (1-level)/2 and 1-(1-level)/2 quantiles of
    each parameter are returned.  Replicates whose fit raises or fails to
    converge are dropped and counted; more than ``max_failure_share`` of
    them raises BootstrapDegenerate.  Each replicate draws from its own
    RNG stream keyed by (seed, replicate index), so the result does not
    depend on execution order.
    """
    if n_bootstrap < 100:
        raise ValueError(f"n_bootstrap must be >= 100, got {n_bootstrap}")
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0,1), got {level}")
    x = np.ascontiguousarray(sample, dtype=float)
    try:
        original = fit(x)
    except DegenerateSample as exc:
        raise BootstrapDegenerate(
            f"cannot resample a degenerate sample: {exc}"
        ) from exc
    names = _free_param_names(original.params)

    draws: dict[str, list[float]] = {name: [] for name in names}
    n_failed = 0
    n = x.size
    for i in range(n_bootstrap):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))
        resample = x[rng.integers(0, n, n)]
        try:
            result = fit(resample)
        except (DegenerateSample, TooFewSamples, ThresholdViolation):
            n_failed += 1
            continue
        if not result.converged:
            n_failed += 1
            continue
        for name in names:
            draws[name].append(getattr(result.params, name))

    if n_failed > max_failure_share * n_bootstrap:
        raise BootstrapDegenerate(
            f"{n_failed} of {n_bootstrap} bootstrap replicates failed to fit"
        )
    alpha = 0.5 * (1.0 - level)
    n_ok = n_bootstrap - n_failed
    intervals = {}
    for name in names:
        lo, hi = np.quantile(np.asarray(draws[name]), [alpha, 1.0 - alpha])
        intervals[name] = ConfidenceInterval(
            lower=float(lo), upper=float(hi), level=level, n_bootstrap=n_ok
        )
    return BootstrapCi(intervals=intervals, n_requested=n_bootstrap, n_failed=n_failed)


def gumbel_hypothesis_check(
    sample,
    gev_fit: FitResult,
    ci_xi: ConfidenceInterval,
    alpha: float = 0.05,
    options: FitOptions | None = None,
) -> GumbelVerdict:
    """Decide between the full GEV and its xi=0 (Gumbel) limit.

    When the shape interval excludes zero the GEV is kept outright.
    Otherwise the two-parameter Gumbel model is fitted and a likelihood-
    ratio test (statistic 2*(ll_gev - ll_gumbel) against chi-square with
    one degree of freedom) picks the model: failing to reject xi=0 means
    the simpler Gumbel form is preferred.
    """
    if not gev_fit.converged:
        raise ValueError("gumbel_hypothesis_check requires a converged GEV fit")
    options = options or FitOptions()
    if not ci_xi.contains(0.0):
        return GumbelVerdict(
            preferred="gev",
            reason="xi_ci_excludes_zero",
            gev_fit=replace(gev_fit, gumbel_flag="xi_ci_excludes_zero"),
        )
    gumbel_fit = _fit_gumbel(sample, options)
    lr = 2.0 * (gev_fit.log_likelihood - gumbel_fit.log_likelihood)
    crit = float(chi2.ppf(1.0 - alpha, df=1))
    preferred = "gumbel" if lr < crit else "gev"
    return GumbelVerdict(
        preferred=preferred,
        reason="likelihood_ratio_test",
        gev_fit=replace(gev_fit, gumbel_flag="xi_ci_includes_zero"),
        gumbel_fit=gumbel_fit,
        lr_statistic=float(lr),
        critical_value=crit,
    )


def _uniform_open(rng: np.random.Generator, n: int) -> np.ndarray:
    u = rng.random(n)
    # random() yields [0, 1); nudge exact zeros into the open interval
    return np.where(u == 0.0, np.nextafter(0.0, 1.0), u)


def sample_gev(p: GevParams, n: int, seed) -> np.ndarray:
    """n i.i.d. GEV draws via the inverse CDF; deterministic per seed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    return np.asarray(gev_quantile(p, _uniform_open(rng, n)))


def sample_gpd(p: GpdParams, n: int, seed) -> np.ndarray:
    """n i.i.d. GPD draws via the inverse CDF; deterministic per seed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    return np.asarray(gpd_quantile(p, _uniform_open(rng, n)))
