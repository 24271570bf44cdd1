"""Dataset container, synthetic data generation and CSV ingestion.

The CSV pipeline applies, in order: drop named columns, drop non-numeric
columns, drop rows with missing values, z-score the features (population
standard deviation, never the target).  Normalization statistics are
computed on the full table before any cross-validation split; the
preprocessing log carries a leakage note for that.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyAfterPreprocessing, MissingTargetColumn, ParseError

__all__ = [
    "TabularDataset",
    "PreprocessSpec",
    "PreprocessLog",
    "synthetic_parabola",
    "load_csv",
    "dump_csv",
]

MISSING_TOKENS = frozenset({"", "na", "nan"})


@dataclass(frozen=True)
class TabularDataset:
    """Feature matrix plus target vector; immutable and finite by construction."""

    features: np.ndarray  # (n_rows, n_features) float64
    target: np.ndarray  # (n_rows,) float64
    feature_names: list[str]
    target_name: str = "y"
    provenance: str = "unspecified"

    def __post_init__(self):
        features = np.ascontiguousarray(self.features, dtype=float)
        target = np.ascontiguousarray(self.target, dtype=float)
        if features.ndim != 2:
            raise ValueError("features must be a 2-d matrix")
        if target.ndim != 1 or target.size != features.shape[0]:
            raise ValueError("target length must match the feature rows")
        if features.shape[0] < 1:
            raise ValueError("dataset needs at least one row")
        if features.shape[1] != len(self.feature_names):
            raise ValueError("feature_names length must match the feature columns")
        if not np.isfinite(features).all() or not np.isfinite(target).all():
            raise ValueError("dataset contains missing or non-finite values")
        features.setflags(write=False)
        target.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "target", target)

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def take(self, indices) -> "TabularDataset":
        """Row subset (used by the cross-validation splitter)."""
        idx = np.asarray(indices, dtype=int)
        return TabularDataset(
            features=self.features[idx],
            target=self.target[idx],
            feature_names=self.feature_names,
            target_name=self.target_name,
            provenance=self.provenance,
        )


@dataclass(frozen=True)
class PreprocessSpec:
    target_column: str
    drop_columns: tuple[str, ...] = ()
    drop_non_numeric: bool = True
    drop_rows_with_missing: bool = True
    zscore_normalize: bool = True
    delimiter: str = ","

    def __post_init__(self):
        if self.target_column in self.drop_columns:
            raise ValueError("the target column cannot be dropped")


@dataclass
class PreprocessLog:
    """Row/column counts after each pipeline stage, for the run report."""

    stages: list[dict] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def record(self, stage: str, n_rows: int, n_features: int, detail: str = ""):
        self.stages.append(
            {"stage": stage, "n_rows": n_rows, "n_features": n_features, "detail": detail}
        )

    def to_dict(self) -> dict:
        return {"stages": list(self.stages), "notes": list(self.notes)}


def synthetic_parabola(n: int, rng) -> TabularDataset:
    """Parabola-plus-noise benchmark rows: x ~ U(-5,5), y = x^2 + U(-5,5)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(rng)
    x = rng.uniform(-5.0, 5.0, size=n)
    eps = rng.uniform(-5.0, 5.0, size=n)
    return TabularDataset(
        features=x[:, None],
        target=x * x + eps,
        feature_names=["x"],
        target_name="y",
        provenance=f"synthetic_parabola(n={n})",
    )


def _is_missing(cell: str) -> bool:
    return cell.strip().lower() in MISSING_TOKENS


def _parse_cell(cell: str) -> float | None:
    if _is_missing(cell):
        return None
    try:
        return float(cell)
    except ValueError:
        return None


def load_csv(path, spec: PreprocessSpec) -> tuple[TabularDataset, PreprocessLog]:
    """Read a delimited text file with a header row and preprocess it.

    Feature columns are kept only if every non-missing cell parses as a
    number; unparsable cells in the target column count as missing, so the
    row is dropped at the missing-value stage.
    """
    log = PreprocessLog()
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter=spec.delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("file is empty", line=1) from None
        header = [h.strip() for h in header]
        rows: list[list[str]] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"expected {len(header)} fields, found {len(row)}", line=lineno
                )
            rows.append(row)

    if spec.target_column not in header:
        raise MissingTargetColumn(
            f"target column {spec.target_column!r} not found in header"
        )
    if not rows:
        raise EmptyAfterPreprocessing("no data rows in file")
    log.record("parsed", len(rows), len(header) - 1)

    target_pos = header.index(spec.target_column)
    # stage 1: drop named columns
    dropped_named = [
        i for i, name in enumerate(header) if name in set(spec.drop_columns)
    ]
    keep = [i for i in range(len(header)) if i not in dropped_named]
    log.record(
        "drop_columns",
        len(rows),
        len(keep) - 1,
        detail=",".join(header[i] for i in dropped_named),
    )

    # stage 2: drop non-numeric feature columns
    if spec.drop_non_numeric:
        numeric_keep = []
        dropped_nn = []
        for i in keep:
            if i == target_pos:
                numeric_keep.append(i)
                continue
            ok = all(
                _is_missing(row[i]) or _parse_cell(row[i]) is not None for row in rows
            )
            (numeric_keep if ok else dropped_nn).append(i)
        keep = numeric_keep
        log.record(
            "drop_non_numeric",
            len(rows),
            len(keep) - 1,
            detail=",".join(header[i] for i in dropped_nn),
        )
    if len(keep) <= 1:
        raise EmptyAfterPreprocessing("no feature columns left after preprocessing")

    # stage 3: numeric conversion + drop rows with missing values
    values = np.empty((len(rows), len(keep)))
    missing = np.zeros(len(rows), dtype=bool)
    for r, row in enumerate(rows):
        for c, i in enumerate(keep):
            parsed = _parse_cell(row[i])
            if parsed is None:
                missing[r] = True
                values[r, c] = np.nan
            else:
                values[r, c] = parsed
    if spec.drop_rows_with_missing:
        values = values[~missing]
        log.record("drop_rows_with_missing", values.shape[0], len(keep) - 1,
                   detail=f"dropped {int(missing.sum())} rows")
    elif missing.any():
        raise ParseError(
            f"{int(missing.sum())} rows contain missing values and "
            "drop_rows_with_missing is disabled"
        )
    if values.shape[0] < 1:
        raise EmptyAfterPreprocessing("all rows dropped during preprocessing")

    target_col = keep.index(target_pos)
    feature_cols = [c for c in range(len(keep)) if c != target_col]
    features = values[:, feature_cols]
    target = values[:, target_col]
    feature_names = [header[keep[c]] for c in feature_cols]

    # stage 4: z-score features on the full table (target untouched)
    if spec.zscore_normalize:
        mean = features.mean(axis=0)
        std = features.std(axis=0)  # population convention
        scale = np.where(std > 0.0, std, 1.0)
        features = (features - mean) / scale
        log.record("zscore_normalize", features.shape[0], features.shape[1])
        log.notes.append(
            "normalization statistics computed on the full dataset before any "
            "train/validation split (known leakage caveat)"
        )

    dataset = TabularDataset(
        features=features,
        target=target,
        feature_names=feature_names,
        target_name=spec.target_column,
        provenance=f"file({path})",
    )
    return dataset, log


def dump_csv(dataset: TabularDataset, path, delimiter: str = ",") -> None:
    """Write the dataset back out in the same delimited format."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, delimiter=delimiter)
        writer.writerow(list(dataset.feature_names) + [dataset.target_name])
        for i in range(dataset.n_rows):
            writer.writerow(
                [repr(float(v)) for v in dataset.features[i]]
                + [repr(float(dataset.target[i]))]
            )
