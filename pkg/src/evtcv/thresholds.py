"""Parameter-stability analysis over candidate exceedance thresholds.

Fits the GPD above each candidate u and looks for the smallest u whose
shape estimates stay flat (within one CI half-width, scaled by
STABILITY_TOL) across all higher candidates.  Exceedances are fitted as
raw values above the fixed threshold, i.e. excesses shifted once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoValidThreshold
from .fitting import (
    MIN_FIT_N,
    ConfidenceInterval,
    FitOptions,
    bootstrap_ci,
    fit_gpd_mle,
)

__all__ = [
    "STABILITY_TOL",
    "StabilityOptions",
    "StabilityCurve",
    "ThresholdSuggestion",
    "default_threshold_grid",
    "stability_curve",
    "suggest_threshold",
]

# stability = staying within one CI half-width of the candidate's estimate
STABILITY_TOL = 1.0

# a qualifying stable region must cover at least this many grid points;
# a bare tail point trivially "agrees with itself" and proves nothing
MIN_STABLE_POINTS = 3


@dataclass(frozen=True)
class StabilityOptions:
    n_bootstrap: int = 200
    level: float = 0.95
    seed: int = 0
    min_fit_n: int = MIN_FIT_N
    fit_options: FitOptions = FitOptions()


@dataclass(frozen=True)
class StabilityCurve:
    thresholds: np.ndarray
    xi_estimates: np.ndarray  # nan where invalid
    sigma_estimates: np.ndarray
    xi_cis: tuple  # ConfidenceInterval | None per threshold
    n_exceedances: np.ndarray
    valid: np.ndarray

    @property
    def n_valid(self) -> int:
        return int(self.valid.sum())


@dataclass(frozen=True)
class ThresholdSuggestion:
    u: float
    stable: bool
    rationale: str
    curve: StabilityCurve


def default_threshold_grid(errors, size: int = 20,
                           lo: float = 0.70, hi: float = 0.99) -> np.ndarray:
    """Quantile-spaced candidate thresholds between the lo and hi quantiles."""
    errors = np.asarray(errors, dtype=float)
    grid = np.quantile(errors, np.linspace(lo, hi, size))
    return np.unique(grid)


def stability_curve(errors, thresholds, options: StabilityOptions | None = None) -> StabilityCurve:
    """GPD fit (with bootstrap shape CI) per candidate threshold.

    Candidates leaving fewer than ``options.min_fit_n`` exceedances, or
    whose fit does not converge, are marked invalid instead of raising.
    """
    options = options or StabilityOptions()
    errors = np.asarray(errors, dtype=float)
    thresholds = np.asarray(thresholds, dtype=float)
    if thresholds.size == 0:
        raise ValueError("empty threshold grid")
    if np.any(np.diff(thresholds) <= 0):
        raise ValueError("thresholds must be strictly ascending")

    k = thresholds.size
    xi = np.full(k, np.nan)
    sigma = np.full(k, np.nan)
    cis: list[ConfidenceInterval | None] = [None] * k
    n_exc = np.zeros(k, dtype=int)
    valid = np.zeros(k, dtype=bool)

    for i, u in enumerate(thresholds):
        exceedances = errors[errors > u]
        n_exc[i] = exceedances.size
        if exceedances.size < options.min_fit_n:
            continue
        def fit(sample, u=u):
            return fit_gpd_mle(sample, u, options.fit_options)
        result = fit(exceedances)
        if not result.converged:
            continue
        ci = bootstrap_ci(
            exceedances,
            fit,
            n_bootstrap=options.n_bootstrap,
            level=options.level,
            seed=options.seed,
        )
        xi[i] = result.params.xi
        sigma[i] = result.params.sigma
        cis[i] = ci["xi"]
        valid[i] = True

    if not valid.any():
        raise NoValidThreshold(
            "no candidate threshold leaves enough exceedances for a fit"
        )
    return StabilityCurve(
        thresholds=thresholds,
        xi_estimates=xi,
        sigma_estimates=sigma,
        xi_cis=tuple(cis),
        n_exceedances=n_exc,
        valid=valid,
    )


def suggest_threshold(curve: StabilityCurve, tol: float = STABILITY_TOL) -> ThresholdSuggestion:
    """Smallest threshold opening a stable shape region.

    A candidate qualifies when every valid higher candidate stays within
    ``tol`` CI half-widths of its shape estimate and the region spans at
    least MIN_STABLE_POINTS grid points.  Without a qualifying candidate
    the one minimizing the downstream shape spread is returned with
    ``stable=False`` (fluctuating shape estimates mean lower thresholds
    admit too many non-extreme values).
    """
    valid_idx = np.flatnonzero(curve.valid)
    if valid_idx.size < 3:
        raise NoValidThreshold(
            f"need at least 3 valid thresholds, have {valid_idx.size}"
        )
    xi = curve.xi_estimates
    for pos, i in enumerate(valid_idx):
        downstream = valid_idx[pos:]
        if downstream.size < MIN_STABLE_POINTS:
            break
        half_width = curve.xi_cis[i].half_width
        if np.all(np.abs(xi[downstream] - xi[i]) <= tol * half_width):
            return ThresholdSuggestion(
                u=float(curve.thresholds[i]),
                stable=True,
                rationale=(
                    f"shape estimates for all {downstream.size} candidates at or above "
                    f"u={curve.thresholds[i]:.6g} stay within {tol:g} CI half-width "
                    f"({half_width:.4g}) of xi={xi[i]:.4g}"
                ),
                curve=curve,
            )

    spreads = []
    for pos, i in enumerate(valid_idx):
        downstream = valid_idx[pos:]
        if downstream.size < MIN_STABLE_POINTS:
            break
        spreads.append((float(np.ptp(xi[downstream])), i))
    best_spread, best_i = min(spreads)
    return ThresholdSuggestion(
        u=float(curve.thresholds[best_i]),
        stable=False,
        rationale=(
            "no candidate opens a stable shape region; "
            f"u={curve.thresholds[best_i]:.6g} minimizes the downstream shape "
            f"spread ({best_spread:.4g}); shape fluctuation with the threshold "
            "suggests lower candidates include too many non-extreme values"
        ),
        curve=curve,
    )
