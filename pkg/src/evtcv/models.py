"""Self-contained regression model zoo used by the CV engine.

Six model kinds with fixed hyperparameter semantics: ordinary least
squares, lasso (coordinate descent), k-nearest neighbours, CART, bagged
forest and gradient boosting.  Ensembles draw bootstrap indices from the
seed handed to :func:`train`, so a full pipeline run is reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .data import TabularDataset
from .errors import NonFiniteInput, ShapeMismatch

__all__ = ["MODEL_KINDS", "ModelSpec", "TrainedModel", "train", "predict", "predict_batch"]

MODEL_KINDS = (
    "linear",
    "lasso",
    "knn",
    "decision_tree",
    "random_forest",
    "gradient_boosting",
)

_DEFAULT_HYPERPARAMS = {
    "linear": {},
    "lasso": {"alpha": 1.0},
    "knn": {"k": 3},
    "decision_tree": {},
    "random_forest": {"n_trees": 100},
    "gradient_boosting": {"n_estimators": 100, "learning_rate": 0.1, "max_depth": 3},
}

_LASSO_TOL = 1e-6
_LASSO_MAX_SWEEPS = 10_000


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    hyperparams: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        merged = dict(_DEFAULT_HYPERPARAMS[self.kind])
        unknown = set(self.hyperparams) - set(merged)
        if unknown:
            raise ValueError(f"unknown hyperparameters for {self.kind}: {sorted(unknown)}")
        merged.update(self.hyperparams)
        for name, value in merged.items():
            if name != "alpha" and value <= 0:
                raise ValueError(f"{self.kind}.{name} must be positive")
            if name == "alpha" and value < 0:
                raise ValueError("lasso.alpha must be >= 0")
        object.__setattr__(self, "hyperparams", merged)


@dataclass(frozen=True)
class TrainedModel:
    spec: ModelSpec
    n_features: int
    state: object


def _check_training_data(data: TabularDataset):
    if data.n_rows < 2:
        raise ShapeMismatch("training needs at least 2 rows")
    if data.n_features < 1:
        raise ShapeMismatch("training needs at least 1 feature")
    if not np.isfinite(data.features).all() or not np.isfinite(data.target).all():
        raise NonFiniteInput("training data contains non-finite values")


def _fit_linear(X, y):
    A = np.column_stack([X, np.ones(X.shape[0])])
    beta, *_ = np.linalg.lstsq(A, y, rcond=None)
    return beta[:-1], float(beta[-1])


def _soft_threshold(rho, alpha):
    if rho > alpha:
        return rho - alpha
    if rho < -alpha:
        return rho + alpha
    return 0.0


def _fit_lasso(X, y, alpha):
    # coordinate descent on (1/2n)||y - Xw - b||^2 + alpha*||w||_1
    n, k = X.shape
    col_sq = np.einsum("ij,ij->j", X, X) / n
    w = np.zeros(k)
    b = float(np.mean(y))
    r = y - b
    for _ in range(_LASSO_MAX_SWEEPS):
        max_delta = 0.0
        for j in range(k):
            if col_sq[j] == 0.0:
                continue
            rho = float(X[:, j] @ r) / n + col_sq[j] * w[j]
            w_new = _soft_threshold(rho, alpha) / col_sq[j]
            delta = w_new - w[j]
            if delta != 0.0:
                r = r - delta * X[:, j]
                w[j] = w_new
            if abs(delta) > max_delta:
                max_delta = abs(delta)
        b_shift = float(np.mean(r))
        if b_shift != 0.0:
            b += b_shift
            r = r - b_shift
        if abs(b_shift) > max_delta:
            max_delta = abs(b_shift)
        if max_delta < _LASSO_TOL:
            break
    return w, b


def _fit_forest(X, y, n_trees, rng):
    n = X.shape[0]
    boot = rng.integers(0, n, size=(n_trees, n))
    return [
        _kernels.tree_build(X[boot[t]], np.ascontiguousarray(y[boot[t]]), -1, 2)[:5]
        for t in range(n_trees)
    ]


def _fit_boosting(X, y, n_estimators, learning_rate, max_depth):
    f0 = float(np.mean(y))
    current = np.full(y.shape, f0)
    trees = []
    for _ in range(n_estimators):
        residual = y - current
        tree = _kernels.tree_build(X, residual, max_depth, 2)[:5]
        trees.append(tree)
        current = current + learning_rate * _kernels.tree_predict(*tree, X)
    return f0, trees


def train(spec: ModelSpec, data: TabularDataset, seed=0) -> TrainedModel:
    """Fit the requested model; deterministic given (spec, data, seed)."""
    _check_training_data(data)
    X = data.features
    y = data.target
    hp = spec.hyperparams
    if spec.kind == "linear":
        state = _fit_linear(X, y)
    elif spec.kind == "lasso":
        state = _fit_lasso(X, y, hp["alpha"])
    elif spec.kind == "knn":
        state = (X, y, int(hp["k"]))
    elif spec.kind == "decision_tree":
        state = _kernels.tree_build(X, y, -1, 2)[:5]
    elif spec.kind == "random_forest":
        rng = np.random.default_rng(seed)
        state = _fit_forest(X, y, int(hp["n_trees"]), rng)
    else:
        state = _fit_boosting(
            X, y, int(hp["n_estimators"]), hp["learning_rate"], int(hp["max_depth"])
        )
    return TrainedModel(spec=spec, n_features=data.n_features, state=state)


def predict_batch(model: TrainedModel, X) -> np.ndarray:
    """Predictions for a feature matrix, one value per row."""
    X = np.ascontiguousarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ShapeMismatch(
            f"expected (*, {model.n_features}) features, got {X.shape}"
        )
    if not np.isfinite(X).all():
        raise NonFiniteInput("feature matrix contains non-finite values")
    kind = model.spec.kind
    if kind in ("linear", "lasso"):
        coef, intercept = model.state
        return X @ coef + intercept
    if kind == "knn":
        Xtr, ytr, k = model.state
        # squared Euclidean distances, ties broken by lowest training-row index
        d = ((X[:, None, :] - Xtr[None, :, :]) ** 2).sum(axis=2)
        order = np.argsort(d, axis=1, kind="stable")
        k_eff = min(k, Xtr.shape[0])
        return ytr[order[:, :k_eff]].mean(axis=1)
    if kind == "decision_tree":
        return _kernels.tree_predict(*model.state, X)
    if kind == "random_forest":
        total = np.zeros(X.shape[0])
        for tree in model.state:
            total += _kernels.tree_predict(*tree, X)
        return total / len(model.state)
    f0, trees = model.state
    lr = model.spec.hyperparams["learning_rate"]
    out = np.full(X.shape[0], f0)
    for tree in trees:
        out += lr * _kernels.tree_predict(*tree, X)
    return out


def predict(model: TrainedModel, x) -> float:
    """Prediction for a single feature vector."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != model.n_features:
        raise ShapeMismatch(f"expected {model.n_features} features, got shape {x.shape}")
    return float(predict_batch(model, x[None, :])[0])
