"""Goodness-of-fit and model-comparison data products.

Everything here returns plain data (quantile series, histogram tables,
per-model summary rows) meant to be serialized and plotted elsewhere; no
rendering happens in this package.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cv import CvPlan, ExtremesSample, run_extremes
from .distributions import (
    GevParams,
    GpdParams,
    gev_logpdf,
    gev_quantile,
    gpd_logpdf,
    gpd_quantile,
)
from .errors import NumericError
from .fitting import FitOptions, FitResult, fit_gev_mle
from .models import ModelSpec

__all__ = [
    "ReturnLevelData",
    "HistogramData",
    "QuantileStatement",
    "ModelComparisonRow",
    "return_level_data",
    "histogram_with_fit",
    "worst_case_quantile",
    "compare_models",
]


def _quantile_fn(params):
    return gev_quantile if isinstance(params, GevParams) else gpd_quantile


def _logpdf_fn(params):
    return gev_logpdf if isinstance(params, GevParams) else gpd_logpdf


def _values_of(extremes) -> np.ndarray:
    values = getattr(extremes, "values", extremes)
    return np.asarray(values, dtype=float)


@dataclass(frozen=True)
class ReturnLevelData:
    """Theoretical vs empirical quantiles at shared plotting positions."""

    probabilities: np.ndarray
    theoretical_quantiles: np.ndarray
    empirical_quantiles: np.ndarray
    params: GevParams | GpdParams


@dataclass(frozen=True)
class HistogramData:
    bin_centers: np.ndarray
    bin_widths: np.ndarray
    empirical_density: np.ndarray
    fitted_density: np.ndarray
    mean_metric: float | None


@dataclass(frozen=True)
class QuantileStatement:
    """A worst-case quantile plus enough metadata to render a sentence."""

    value: float
    confidence: float
    params: GevParams | GpdParams
    context: dict

    @property
    def text(self) -> str:
        subject = self.context.get("model") or "the model"
        kind = self.context.get("error_kind") or "prediction"
        return (
            f"with {self.confidence:.1%} confidence, {subject} gives {kind} "
            f"errors not larger than {self.value:.4g}"
        )


@dataclass(frozen=True)
class ModelComparisonRow:
    model: ModelSpec
    dataset_role: str  # training | validation
    extremes: ExtremesSample
    five_number: tuple  # (min, q1, median, q3, max)
    mean_metric: float
    fit: FitResult | None
    fit_error: str | None = None  # cause recorded when fit is None


def return_level_data(extremes, fit: FitResult, n_points: int = 0) -> ReturnLevelData:
    """Return-level series on plotting positions i/(m+1).

    ``n_points > 0`` thins the series evenly to at most that many points.
    """
    if not fit.converged:
        raise ValueError("return_level_data requires a converged fit")
    values = np.sort(_values_of(extremes))
    m = values.size
    if m == 0:
        raise ValueError("empty extremes sample")
    probs = np.arange(1, m + 1) / (m + 1.0)
    if 0 < n_points < m:
        pick = np.unique(np.linspace(0, m - 1, n_points).round().astype(int))
        probs = probs[pick]
        values = values[pick]
    theoretical = np.asarray(_quantile_fn(fit.params)(fit.params, probs))
    return ReturnLevelData(
        probabilities=probs,
        theoretical_quantiles=theoretical,
        empirical_quantiles=values,
        params=fit.params,
    )


def histogram_with_fit(extremes, fit: FitResult, n_bins: int = 30) -> HistogramData:
    """Density-normalized histogram with the fitted pdf at bin centers."""
    if not fit.converged:
        raise ValueError("histogram_with_fit requires a converged fit")
    values = _values_of(extremes)
    density, edges = np.histogram(values, bins=n_bins, density=True)
    centers = 0.5 * (edges[:-1] + edges[1:])
    fitted = np.exp(np.asarray(_logpdf_fn(fit.params)(fit.params, centers)))
    mean_metric = getattr(extremes, "mean_metric", None)
    return HistogramData(
        bin_centers=centers,
        bin_widths=np.diff(edges),
        empirical_density=density,
        fitted_density=fitted,
        mean_metric=mean_metric,
    )


def worst_case_quantile(fit: FitResult, confidence: float, context: dict | None = None) -> QuantileStatement:
    """Fitted-distribution quantile at the given confidence level."""
    if not fit.converged:
        raise ValueError("worst_case_quantile requires a converged fit")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must lie strictly inside (0, 1)")
    value = float(_quantile_fn(fit.params)(fit.params, confidence))
    return QuantileStatement(
        value=value,
        confidence=confidence,
        params=fit.params,
        context=dict(context or {}),
    )


def _five_number(values: np.ndarray) -> tuple:
    q = np.quantile(values, [0.0, 0.25, 0.5, 0.75, 1.0])
    return tuple(float(v) for v in q)


def compare_models(data, specs, plan: CvPlan,
                   fit_options: FitOptions | None = None,
                   threads: int = 1) -> list[ModelComparisonRow]:
    """Blocking-run summary per (model, dataset role), with GEV fits.

    Each repetition trains once and scores both the training and the
    validation portion, so the two roles compare identical splits.  Rows
    whose extremes cannot be fitted (e.g. an interpolating model with all
    training errors zero) carry the failure cause instead of a fit.
    """
    specs = list(specs)
    if not specs:
        raise ValueError("compare_models needs at least one model spec")
    if plan.mode != "block_maxima":
        raise ValueError("compare_models uses the blocking pipeline")
    rows = []
    for spec in specs:
        by_role = run_extremes(data, spec, plan,
                               roles=("training", "validation"), threads=threads)
        for role in ("training", "validation"):
            extremes = by_role[role]
            fit = None
            fit_error = None
            try:
                fit = fit_gev_mle(extremes.values, fit_options)
            except NumericError as exc:
                fit_error = f"{type(exc).__name__}: {exc}"
            rows.append(
                ModelComparisonRow(
                    model=spec,
                    dataset_role=role,
                    extremes=extremes,
                    five_number=_five_number(extremes.values),
                    mean_metric=extremes.mean_metric,
                    fit=fit,
                    fit_error=fit_error,
                )
            )
    return rows
