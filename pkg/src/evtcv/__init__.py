"""evtcv: worst-case regression error estimation via Monte-Carlo CV + EVT.

Collect extreme prediction errors with repeated random train/validation
splits (block maxima or threshold exceedances), fit GEV/GPD tail models
by maximum likelihood with bootstrap confidence intervals, and turn the
fits into worst-case error quantiles and goodness-of-fit data products.
"""

from .cv import (
    CvPlan,
    ExtremesSample,
    FixedData,
    FreshParabola,
    as_source,
    mc_split,
    run_blocking,
    run_extremes,
    run_threshold,
    split_errors,
)
from .data import (
    PreprocessLog,
    PreprocessSpec,
    TabularDataset,
    dump_csv,
    load_csv,
    synthetic_parabola,
)
from .diagnostics import (
    HistogramData,
    ModelComparisonRow,
    QuantileStatement,
    ReturnLevelData,
    compare_models,
    histogram_with_fit,
    return_level_data,
    worst_case_quantile,
)
from .distributions import (
    GUMBEL_EPS,
    GevParams,
    GpdParams,
    gev_cdf,
    gev_logpdf,
    gev_quantile,
    gev_support,
    gpd_cdf,
    gpd_logpdf,
    gpd_quantile,
    gpd_support,
)
from .fitting import (
    MIN_FIT_N,
    BootstrapCi,
    ConfidenceInterval,
    FitOptions,
    FitResult,
    GumbelVerdict,
    bootstrap_ci,
    fit_gev_mle,
    fit_gpd_mle,
    gumbel_hypothesis_check,
    sample_gev,
    sample_gpd,
)
from .models import MODEL_KINDS, ModelSpec, TrainedModel, predict, predict_batch, train
from .thresholds import (
    STABILITY_TOL,
    StabilityCurve,
    StabilityOptions,
    ThresholdSuggestion,
    default_threshold_grid,
    stability_curve,
    suggest_threshold,
)

__version__ = "0.1.0"
