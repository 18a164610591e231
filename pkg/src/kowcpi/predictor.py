"""Point predictors on lagged values: ridge least squares, a bagged CART forest,
and externally supplied predictions."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.tree import DecisionTreeRegressor

from .rng import stream

KINDS = ("lag-least-squares", "random-forest", "external")


@dataclass(frozen=True)
class PredictorSpec:
    kind: str = "random-forest"
    d: int = 10
    ridge: float = 0.0
    trees: int = 10
    max_depth: int = 8
    min_leaf: int = 3
    path: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"predictor kind must be one of {KINDS}, got {self.kind!r}")
        if self.d < 1:
            raise ValueError(f"lag count d must be >= 1, got {self.d}")
        if self.trees < 1:
            raise ValueError(f"trees must be >= 1, got {self.trees}")
        if self.ridge < 0:
            raise ValueError(f"ridge penalty must be >= 0, got {self.ridge}")
        if self.kind == "external" and not self.path:
            raise ValueError("external predictor needs a path")


def lag_matrix(series, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Rows X[k] = (y[k+d-1], ..., y[k]) (most recent first) with target y[k+d]."""
    y = np.asarray(series, dtype=float)
    if y.shape[0] <= d:
        raise ValueError(f"series of length {y.shape[0]} too short for {d} lags")
    X = np.lib.stride_tricks.sliding_window_view(y, d)[:-1, ::-1]
    return np.ascontiguousarray(X), y[d:].copy()


class LagLeastSquares:
    def __init__(self, d: int, ridge: float = 0.0):
        self.d = d
        self.ridge = ridge

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        xm, ym = X.mean(axis=0), y.mean()
        Xc, yc = X - xm, y - ym
        if self.ridge > 0:
            A = Xc.T @ Xc + self.ridge * np.eye(X.shape[1])
            self.coef_ = np.linalg.solve(A, Xc.T @ yc)
        else:
            self.coef_ = np.linalg.lstsq(Xc, yc, rcond=None)[0]
        self.intercept_ = float(ym - xm @ self.coef_)
        return self

    def predict_many(self, X) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.coef_ + self.intercept_

    def in_sample_predictions(self, X) -> np.ndarray:
        return self.predict_many(X)


class BaggedForest:
    """Bootstrap ensemble of CART regressors with ceil(d/3) features tried per split.

    Keeps each tree's bootstrap indices so out-of-bag predictions are exact.
    """

    def __init__(self, trees=10, max_depth=8, min_leaf=3, seed=0):
        self.trees = trees
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.seed = seed

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        m, d = X.shape
        rng = stream(self.seed, "predictor-bootstrap")
        self.estimators_ = []
        self.samples_ = []
        for _ in range(self.trees):
            idx = rng.integers(0, m, size=m)
            tree = DecisionTreeRegressor(
                max_depth=self.max_depth,
                min_samples_leaf=self.min_leaf,
                max_features=max(1, math.ceil(d / 3)),
                random_state=int(rng.integers(0, 2**31 - 1)),
            )
            tree.fit(X[idx], y[idx])
            self.estimators_.append(tree)
            self.samples_.append(idx)
        self._train_X = X
        return self

    def predict_many(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        out = np.zeros(X.shape[0])
        for tree in self.estimators_:
            out += tree.predict(X)
        return out / len(self.estimators_)

    def in_sample_predictions(self, X=None) -> np.ndarray:
        """Out-of-bag predictions on the training rows.

        Rows that landed in every bootstrap sample fall back to the full-ensemble prediction.
        """
        X = self._train_X
        m = X.shape[0]
        total = np.zeros(m)
        count = np.zeros(m)
        for tree, idx in zip(self.estimators_, self.samples_):
            oob = np.ones(m, dtype=bool)
            oob[idx] = False
            if oob.any():
                total[oob] += tree.predict(X[oob])
                count[oob] += 1
        full = self.predict_many(X)
        return np.where(count > 0, total / np.maximum(count, 1), full)


class FittedPredictor:
    def __init__(self, spec: PredictorSpec, model):
        self.spec = spec
        self.model = model

    @property
    def d(self) -> int:
        return self.spec.d

    def predict(self, x) -> float:
        x = np.asarray(x, dtype=float).ravel()
        if x.shape[0] != self.d:
            raise ValueError(f"feature vector has length {x.shape[0]}, expected d={self.d}")
        return float(self.model.predict_many(x[None, :])[0])

    def predict_many(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.d:
            raise ValueError(f"feature matrix has {X.shape[1]} columns, expected d={self.d}")
        return self.model.predict_many(X)

    def training_residuals(self, X, y) -> np.ndarray:
        """Residuals on the training rows (out-of-bag for the forest)."""
        return np.asarray(y, dtype=float) - self.model.in_sample_predictions(X)


def fit(spec: PredictorSpec, series, seed: int = 0) -> FittedPredictor:
    y = np.asarray(series, dtype=float)
    if spec.kind == "external":
        raise ValueError("external predictions are loaded with load_external, not fitted")
    if y.shape[0] <= spec.d + 10:
        raise ValueError(f"need more than d+10 = {spec.d + 10} training values, got {y.shape[0]}")
    X, target = lag_matrix(y, spec.d)
    if spec.kind == "lag-least-squares":
        model = LagLeastSquares(spec.d, spec.ridge).fit(X, target)
    else:
        model = BaggedForest(spec.trees, spec.max_depth, spec.min_leaf, seed).fit(X, target)
    return FittedPredictor(spec, model)


def load_external(path) -> dict[int, float]:
    """Read a ``t,yhat`` CSV into a time-indexed mapping."""
    path = Path(path)
    out: dict[int, float] = {}
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"t", "yhat"} <= set(reader.fieldnames):
            raise ValueError(f"{path}: expected header 't,yhat', got {reader.fieldnames}")
        for lineno, row in enumerate(reader, start=2):
            try:
                t, v = int(row["t"]), float(row["yhat"])
            except (TypeError, ValueError):
                raise ValueError(f"{path}:{lineno}: malformed row {row}") from None
            if not math.isfinite(v):
                raise ValueError(f"{path}:{lineno}: non-finite prediction")
            if t in out:
                raise ValueError(f"{path}:{lineno}: duplicate t={t}")
            out[t] = v
    return out
