"""Statistical baselines: linear regression and boosted regression trees.

Both models are written out in full here. OLS solves the least-squares
problem through a pivoted QR factorization with an explicit rank check that
names the dependent columns. The GBDT fits squared-loss gradient boosting
with greedy variance-reduction splits on midpoints between distinct sorted
values; with subsample = 1 (the default) the fit is fully deterministic.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.random import default_rng
from scipy import linalg

from .dataset import Dataset, split
from .encoding import design_matrix, encode_matrix, fit_encoding
from .errors import DatasetError, RankError
from .evaluation import MetricPair, evaluate


@dataclass(frozen=True)
class LinearModel:
    intercept: float
    coefficients: np.ndarray
    columns: tuple[str, ...]


def fit_ols(X: np.ndarray, y: np.ndarray,
            columns: Sequence[str] | None = None) -> LinearModel:
    """Least-squares fit of y on X plus an intercept.

    Raises RankError naming the dependent columns when the design (with
    intercept) is rank deficient.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or len(X) != len(y):
        raise DatasetError(f"bad shapes for fit_ols: X {X.shape}, y {y.shape}")
    n, p = X.shape
    names = tuple(columns) if columns is not None else tuple(f"x{j}" for j in range(p))
    if len(names) != p:
        raise DatasetError(f"{p} columns but {len(names)} column names")
    if n < p + 2:
        raise DatasetError(f"need at least {p + 2} rows to fit {p} predictors, got {n}")
    A = np.hstack([np.ones((n, 1)), X])
    full_names = ("intercept", *names)
    Q, R, pivots = linalg.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    tol = max(A.shape) * np.finfo(float).eps * (diag[0] if diag.size else 0.0)
    rank = int(np.sum(diag > tol))
    if rank < p + 1:
        offending = [full_names[j] for j in sorted(pivots[rank:])]
        raise RankError(offending)
    w_pivoted = linalg.solve_triangular(R, Q.T @ y)
    w = np.empty(p + 1)
    w[pivots] = w_pivoted
    return LinearModel(intercept=float(w[0]), coefficients=w[1:], columns=names)


def predict_ols(model: LinearModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != len(model.coefficients):
        raise DatasetError(f"X has {X.shape} but model expects "
                           f"{len(model.coefficients)} columns")
    return model.intercept + X @ model.coefficients


@dataclass(frozen=True)
class GbdtHyper:
    n_trees: int = 200
    max_depth: int = 3
    learning_rate: float = 0.05
    min_leaf: int = 5
    subsample: float = 1.0

    def __post_init__(self):
        if self.n_trees < 1:
            raise DatasetError("n_trees must be at least 1")
        if self.max_depth < 1:
            raise DatasetError("max_depth must be at least 1")
        if not 0.0 < self.learning_rate <= 1.0:
            raise DatasetError("learning_rate must be in (0, 1]")
        if self.min_leaf < 1:
            raise DatasetError("min_leaf must be at least 1")
        if not 0.0 < self.subsample <= 1.0:
            raise DatasetError("subsample must be in (0, 1]")


@dataclass
class _Node:
    feature: int = -1
    threshold: float = 0.0
    value: float = 0.0
    left: "_Node | None" = None
    right: "_Node | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


@dataclass
class GbdtModel:
    base_prediction: float
    trees: list
    hyper: GbdtHyper
    column_gains: np.ndarray
    # training MSE before any tree and after each boosting step
    train_losses: list[float] = field(default_factory=list)
    column_variables: tuple[str, ...] | None = None


def _best_split(X: np.ndarray, residual: np.ndarray, min_leaf: int):
    """Best (gain, feature, threshold) across all columns, or None.

    Gain is the reduction in sum of squared errors from splitting; computed
    with prefix sums over each sorted column, all columns at once.
    Candidate thresholds are midpoints between distinct neighbouring sorted
    values; both sides must keep at least min_leaf rows. Ties prefer the
    lowest column index, then the smallest threshold.
    """
    n, p = X.shape
    sizes = np.arange(min_leaf, n - min_leaf + 1)
    if sizes.size == 0:
        return None
    order = np.argsort(X, axis=0, kind="stable")
    cs = np.take_along_axis(X, order, axis=0)
    prefix = np.cumsum(residual[order], axis=0)
    total = prefix[-1, :]
    left = prefix[sizes - 1, :]
    gains = (left ** 2 / sizes[:, None]
             + (total - left) ** 2 / (n - sizes)[:, None]
             - total ** 2 / n)
    gains[cs[sizes - 1, :] >= cs[sizes, :]] = -np.inf
    # transpose so the flat argmax scans column-major: ties resolve to the
    # lowest column, then the smallest left size (smallest threshold)
    feature, offset = divmod(int(np.argmax(gains.T)), len(sizes))
    gain = float(gains[offset, feature])
    if gain <= 1e-12 or not np.isfinite(gain):
        return None
    i = int(sizes[offset])
    threshold = float((cs[i - 1, feature] + cs[i, feature]) / 2.0)
    return gain, feature, threshold


def _build_tree(X: np.ndarray, residual: np.ndarray, depth: int,
                hyper: GbdtHyper, gains_out: np.ndarray) -> _Node:
    n, p = X.shape
    if depth == 0 or n < 2 * hyper.min_leaf:
        return _Node(value=float(np.mean(residual)))
    best = _best_split(X, residual, hyper.min_leaf)
    if best is None:
        return _Node(value=float(np.mean(residual)))
    gain, feature, threshold = best
    gains_out[feature] += gain
    mask = X[:, feature] <= threshold
    return _Node(
        feature=feature,
        threshold=threshold,
        left=_build_tree(X[mask], residual[mask], depth - 1, hyper, gains_out),
        right=_build_tree(X[~mask], residual[~mask], depth - 1, hyper, gains_out),
    )


def _tree_predict(root: _Node, X: np.ndarray) -> np.ndarray:
    out = np.empty(len(X))
    stack = [(root, np.arange(len(X)))]
    while stack:
        node, idx = stack.pop()
        if len(idx) == 0:
            continue
        if node.is_leaf:
            out[idx] = node.value
        else:
            mask = X[idx, node.feature] <= node.threshold
            stack.append((node.left, idx[mask]))
            stack.append((node.right, idx[~mask]))
    return out


def fit_gbdt(X: np.ndarray, y: np.ndarray, hyper: GbdtHyper | None = None,
             seed: int = 0,
             column_variables: Sequence[str] | None = None) -> GbdtModel:
    """Squared-loss gradient boosting with per-column split-gain tracking."""
    hyper = hyper or GbdtHyper()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or len(X) != len(y):
        raise DatasetError(f"bad shapes for fit_gbdt: X {X.shape}, y {y.shape}")
    n, p = X.shape
    if n < 2 * hyper.min_leaf:
        raise DatasetError(f"need at least {2 * hyper.min_leaf} rows, got {n}")
    if column_variables is not None and len(column_variables) != p:
        raise DatasetError(f"{p} columns but {len(column_variables)} column labels")

    rng = default_rng(seed)
    base = float(np.mean(y))
    prediction = np.full(n, base)
    gains = np.zeros(p)
    trees = []
    losses = [float(np.mean((y - prediction) ** 2))]
    for _ in range(hyper.n_trees):
        residual = y - prediction
        if hyper.subsample < 1.0:
            size = max(2 * hyper.min_leaf, int(round(hyper.subsample * n)))
            rows = np.sort(rng.choice(n, size=min(size, n), replace=False))
        else:
            rows = np.arange(n)
        tree = _build_tree(X[rows], residual[rows], hyper.max_depth, hyper, gains)
        trees.append(tree)
        prediction = prediction + hyper.learning_rate * _tree_predict(tree, X)
        losses.append(float(np.mean((y - prediction) ** 2)))
    return GbdtModel(base_prediction=base, trees=trees, hyper=hyper,
                     column_gains=gains, train_losses=losses,
                     column_variables=tuple(column_variables) if column_variables else None)


def predict_gbdt(model: GbdtModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != len(model.column_gains):
        raise DatasetError(f"X has {X.shape} but model expects "
                           f"{len(model.column_gains)} columns")
    out = np.full(len(X), model.base_prediction)
    for tree in model.trees:
        out = out + model.hyper.learning_rate * _tree_predict(tree, X)
    return out


def importance_gbdt(model: GbdtModel) -> dict[str, float]:
    """Split-gain importance, aggregated to parent variables and normalized
    to sum 1. A model that never split yields a uniform vector (with a
    warning)."""
    gains = model.column_gains
    if model.column_variables is not None:
        keys = list(dict.fromkeys(model.column_variables))
        totals = {k: 0.0 for k in keys}
        for parent, gain in zip(model.column_variables, gains):
            totals[parent] += float(gain)
    else:
        totals = {f"x{j}": float(g) for j, g in enumerate(gains)}
    grand = sum(totals.values())
    if grand <= 0.0:
        warnings.warn("model contains no splits; importance is uniform")
        return {k: 1.0 / len(totals) for k in totals}
    return {k: v / grand for k, v in totals.items()}


@dataclass(frozen=True)
class FractionResult:
    fraction: float
    repeat: int
    metrics: MetricPair | None
    status: str = "ok"


def fraction_sweep(dataset: Dataset, fractions: Sequence[float], kind: str,
                   seed: int = 0, repeats: int = 1,
                   hyper: GbdtHyper | None = None) -> list[FractionResult]:
    """Train/evaluate one model kind over a grid of train fractions.

    Fit failures are recorded per cell so one bad configuration does not
    abort the sweep; degenerate fractions raise up front.
    """
    if kind not in ("lr", "gbdt"):
        raise DatasetError(f"unknown model kind {kind!r}")
    if repeats < 1:
        raise DatasetError("repeats must be at least 1")
    n = len(dataset)
    for fraction in fractions:
        n_train = int(round(fraction * n))
        if n_train <= 0 or n_train >= n:
            raise DatasetError(f"fraction {fraction} degenerate for n={n}")
    spec = fit_encoding(dataset)
    results = []
    for fraction in fractions:
        for repeat in range(repeats):
            train, test = split(dataset, fraction, seed=seed + repeat)
            try:
                if kind == "lr":
                    X_train, names, _ = design_matrix(train, spec)
                    X_test, _, _ = design_matrix(test, spec)
                    model = fit_ols(X_train, train.labels(), columns=names)
                    predicted = predict_ols(model, X_test)
                else:
                    parents = spec.column_variables()
                    model = fit_gbdt(encode_matrix(train, spec), train.labels(),
                                     hyper=hyper, seed=seed + repeat,
                                     column_variables=parents)
                    predicted = predict_gbdt(model, encode_matrix(test, spec))
            except (RankError, DatasetError) as exc:
                results.append(FractionResult(fraction=fraction, repeat=repeat,
                                              metrics=None,
                                              status=f"failed: {exc}"))
                continue
            results.append(FractionResult(
                fraction=fraction, repeat=repeat,
                metrics=evaluate(test.labels(), predicted)))
    return results
