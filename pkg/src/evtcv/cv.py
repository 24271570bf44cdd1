"""Monte-Carlo cross-validation engine collecting extreme prediction errors.

Each repetition j draws its own RNG streams from (seed, j), so runs are
reproducible and independent of how many worker threads execute them.
Two collection modes: per-split maximum errors (block maxima) or all
errors exceeding a fixed threshold, pooled across splits.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .data import TabularDataset, synthetic_parabola
from .errors import AllSplitsFailed, EmptySplit, EvtcvError, NoExceedances
from .models import ModelSpec, TrainedModel, predict_batch, train

__all__ = [
    "CvPlan",
    "ExtremesSample",
    "FixedData",
    "FreshParabola",
    "as_source",
    "mc_split",
    "split_errors",
    "run_blocking",
    "run_threshold",
]

ERROR_KINDS = ("absolute", "squared")
MODES = ("block_maxima", "threshold")

# sample labels: (mode, error_kind) -> kind
_KIND_LABELS = {
    ("block_maxima", "absolute"): "B1",
    ("block_maxima", "squared"): "B2",
    ("threshold", "absolute"): "B3",
    ("threshold", "squared"): "B4",
}


@dataclass(frozen=True)
class CvPlan:
    """Configuration of a Monte-Carlo CV run."""

    n_repetitions: int
    train_fraction: float = 0.8
    error_kind: str = "absolute"
    mode: str = "block_maxima"
    threshold: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.n_repetitions < 1:
            raise ValueError("n_repetitions must be >= 1")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie strictly inside (0, 1)")
        if self.error_kind not in ERROR_KINDS:
            raise ValueError(f"error_kind must be one of {ERROR_KINDS}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.mode == "threshold":
            if self.threshold is None or not np.isfinite(self.threshold):
                raise ValueError("threshold mode requires a finite threshold")

    @property
    def kind_label(self) -> str:
        return _KIND_LABELS[(self.mode, self.error_kind)]

    def to_dict(self) -> dict:
        return {
            "n_repetitions": self.n_repetitions,
            "train_fraction": self.train_fraction,
            "error_kind": self.error_kind,
            "mode": self.mode,
            "threshold": self.threshold,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class ExtremesSample:
    """Collected extremes plus the provenance needed to report on them."""

    values: np.ndarray
    kind: str  # B1 | B2 | B3 | B4
    plan: CvPlan
    model: ModelSpec
    per_split_means: np.ndarray
    n_failed_splits: int
    source: str
    dataset_role: str = "validation"
    threshold: float | None = None
    n_total_evaluations: int = 0

    @property
    def mean_metric(self) -> float:
        """Mean of the per-split MAE/MSE values."""
        return float(np.mean(self.per_split_means))

    @property
    def n_exceedances(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class FixedData:
    """One fixed table, re-split on every repetition."""

    dataset: TabularDataset

    def realize(self, rng) -> TabularDataset:
        return self.dataset

    def describe(self) -> str:
        return f"fixed({self.dataset.provenance}, rows={self.dataset.n_rows})"


@dataclass(frozen=True)
class FreshParabola:
    """Fresh synthetic rows for every repetition (n_rows = twice the block size)."""

    n_rows: int

    def realize(self, rng) -> TabularDataset:
        return synthetic_parabola(self.n_rows, rng)

    def describe(self) -> str:
        return f"synthetic_parabola(rows_per_split={self.n_rows})"


def as_source(data):
    if isinstance(data, TabularDataset):
        return FixedData(data)
    if hasattr(data, "realize") and hasattr(data, "describe"):
        return data
    raise TypeError("data must be a TabularDataset or a data source")


def mc_split(data: TabularDataset, fraction: float, rng) -> tuple[TabularDataset, TabularDataset]:
    """Random disjoint train/validation partition; deterministic per stream."""
    n = data.n_rows
    n_train = int(n * fraction)
    if n_train < 1 or n - n_train < 1:
        raise EmptySplit(
            f"fraction {fraction} leaves an empty part for {n} rows"
        )
    perm = rng.permutation(n)
    train_idx = np.sort(perm[:n_train])
    val_idx = np.sort(perm[n_train:])
    return data.take(train_idx), data.take(val_idx)


def split_errors(model: TrainedModel, part: TabularDataset, kind: str) -> np.ndarray:
    """Per-row absolute or squared prediction errors on one split."""
    diff = predict_batch(model, part.features) - part.target
    return np.abs(diff) if kind == "absolute" else diff * diff


def _one_split(source, spec: ModelSpec, plan: CvPlan, j: int, roles):
    """Returns {role: errors} for repetition j, or the error that failed it."""
    data_rng = np.random.default_rng(np.random.SeedSequence(plan.seed, spawn_key=(j, 0)))
    part_rng = np.random.default_rng(np.random.SeedSequence(plan.seed, spawn_key=(j, 1)))
    model_seed = np.random.SeedSequence(plan.seed, spawn_key=(j, 2))
    try:
        dataset = source.realize(data_rng)
        train_part, val_part = mc_split(dataset, plan.train_fraction, part_rng)
        model = train(spec, train_part, seed=model_seed)
        out = {}
        for role in roles:
            part = train_part if role == "training" else val_part
            out[role] = split_errors(model, part, plan.error_kind)
        return out
    except EvtcvError as exc:
        return exc


def _run_splits(source, spec, plan, roles, threads):
    jobs = range(plan.n_repetitions)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda j: _one_split(source, spec, plan, j, roles), jobs))
    else:
        results = [_one_split(source, spec, plan, j, roles) for j in jobs]
    return results


def _collect(source, spec, plan, roles, threads):
    results = _run_splits(source, spec, plan, roles, threads)
    per_role = {role: [] for role in roles}
    n_failed = 0
    failures = []
    for res in results:
        if isinstance(res, EvtcvError):
            n_failed += 1
            failures.append(res)
            continue
        for role in roles:
            per_role[role].append(res[role])
    if n_failed == plan.n_repetitions:
        raise AllSplitsFailed(
            f"all {plan.n_repetitions} repetitions failed; first cause: {failures[0]}"
        )
    return per_role, n_failed


def _assemble(plan, spec, source, role, split_error_lists, n_failed):
    means = np.array([e.mean() for e in split_error_lists])
    n_total = int(sum(e.size for e in split_error_lists))
    if plan.mode == "block_maxima":
        values = np.array([e.max() for e in split_error_lists])
        threshold = None
    else:
        pooled = [e[e > plan.threshold] for e in split_error_lists]
        values = np.concatenate(pooled) if pooled else np.empty(0)
        if values.size == 0:
            raise NoExceedances(
                f"no errors exceed the threshold u={plan.threshold}"
            )
        threshold = plan.threshold
    return ExtremesSample(
        values=values,
        kind=plan.kind_label,
        plan=plan,
        model=spec,
        per_split_means=means,
        n_failed_splits=n_failed,
        source=source.describe(),
        dataset_role=role,
        threshold=threshold,
        n_total_evaluations=n_total,
    )


def run_extremes(data, model: ModelSpec, plan: CvPlan,
                 roles=("validation",), threads: int = 1) -> dict[str, ExtremesSample]:
    """Run the engine once, scoring every requested dataset role.

    Training a repetition once and scoring both portions keeps the
    training-vs-validation comparison on identical splits.
    """
    source = as_source(data)
    per_role, n_failed = _collect(source, model, plan, roles, threads)
    return {
        role: _assemble(plan, model, source, role, per_role[role], n_failed)
        for role in roles
    }


def run_blocking(data, model: ModelSpec, plan: CvPlan, threads: int = 1) -> ExtremesSample:
    """Per-split maximum errors, one value per successful repetition."""
    if plan.mode != "block_maxima":
        raise ValueError("run_blocking requires plan.mode == 'block_maxima'")
    return run_extremes(data, model, plan, threads=threads)["validation"]


def run_threshold(data, model: ModelSpec, plan: CvPlan, threads: int = 1) -> ExtremesSample:
    """All errors above plan.threshold, pooled over every repetition."""
    if plan.mode != "threshold":
        raise ValueError("run_threshold requires plan.mode == 'threshold'")
    return run_extremes(data, model, plan, threads=threads)["validation"]
