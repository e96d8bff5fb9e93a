"""Random forest: bootstrap-trained Gini trees averaged over the ensemble.

Each tree sees a seeded bootstrap sample and draws ceil(sqrt(p)) candidate
features per split; the ensemble probability is the mean of per-tree leaf
class fractions. Per-tree child seeds make parallel and serial training
agree bit-for-bit, and tree order never affects predictions.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dataset import FeatureMatrix, FeatureSchema
from .errors import DegenerateLabelError, SchemaError
from .seeding import child_seed
from .trees import DecisionTree, grow_classification_tree


@dataclass(frozen=True)
class RfParams:
    n_trees: int = 100
    min_samples_leaf: int = 1
    max_depth: int = 0  # 0 = unlimited
    bootstrap: bool = True
    n_candidates: int = 0  # 0 = ceil(sqrt(p))
    seed: int = 0


@dataclass
class RfModel:
    kind = "rf"
    trees: list[DecisionTree]
    schema: FeatureSchema
    params: RfParams = field(default=None)

    def _values(self, X) -> np.ndarray:
        if isinstance(X, FeatureMatrix):
            if X.schema.names != self.schema.names:
                raise SchemaError("feature matrix schema differs from training schema")
            return X.values
        X = np.asarray(X, dtype=np.float64)
        if X.shape[1] != self.schema.width:
            raise SchemaError(f"expected {self.schema.width} features, got {X.shape[1]}")
        return X

    def predict_proba(self, X) -> np.ndarray:
        values = self._values(X)
        total = np.zeros(values.shape[0], dtype=np.float64)
        for tree in self.trees:
            total += tree.predict(values)
        return total / len(self.trees)

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X) > 0.5).astype(np.int64)


def _fit_tree(values, labels, params: RfParams, n_candidates: int, index: int) -> DecisionTree:
    rng = np.random.default_rng(child_seed(params.seed, "rf-tree", index))
    n = values.shape[0]
    rows = rng.integers(0, n, size=n) if params.bootstrap else np.arange(n)
    return grow_classification_tree(
        values[rows], labels[rows], rng,
        n_candidates=n_candidates,
        min_samples_leaf=params.min_samples_leaf,
        max_depth=params.max_depth,
    )


def train_rf(
    X: FeatureMatrix, y, params: RfParams = RfParams(),
    allow_constant: bool = False, workers: int = 1,
) -> RfModel:
    values = X.values if isinstance(X, FeatureMatrix) else np.asarray(X, dtype=np.float64)
    schema = X.schema if isinstance(X, FeatureMatrix) else FeatureSchema(
        names=tuple(f"f{i}" for i in range(values.shape[1]))
    )
    labels = np.asarray(getattr(y, "values", y), dtype=np.int64)
    if not np.isfinite(values).all():
        raise ValueError("training matrix contains non-finite values")
    if set(np.unique(labels)) - {0, 1}:
        raise ValueError("labels must be binary 0/1")
    if np.unique(labels).size < 2 and not allow_constant:
        raise DegenerateLabelError(
            "labels contain a single class; pass allow_constant=True to fit a constant model"
        )
    p = values.shape[1]
    n_candidates = params.n_candidates or math.ceil(math.sqrt(p))

    indices = range(params.n_trees)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            trees = list(
                pool.map(lambda i: _fit_tree(values, labels, params, n_candidates, i), indices)
            )
    else:
        trees = [_fit_tree(values, labels, params, n_candidates, i) for i in indices]
    return RfModel(trees=trees, schema=schema, params=params)
