"""Gradient-boosted tree ensemble with second-order logistic boosting.

The margin is base_score + learning_rate * sum of raw tree outputs; the
class-1 probability is the logistic of the margin. Trees fit per-round
gradients g = p - y and hessians h = p(1 - p) with exact greedy split
search, so training is deterministic for fixed data and parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import FeatureMatrix, FeatureSchema
from .errors import DegenerateLabelError, SchemaError
from .trees import DecisionTree, grow_boosted_tree


@dataclass(frozen=True)
class GbtParams:
    n_trees: int = 100
    max_depth: int = 6
    learning_rate: float = 0.3
    reg_lambda: float = 1.0
    min_child_weight: float = 1.0
    seed: int = 0


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass
class GbtModel:
    kind = "gbt"
    trees: list[DecisionTree]
    learning_rate: float
    base_score: float
    schema: FeatureSchema
    params: GbtParams = field(default=None)

    def _values(self, X) -> np.ndarray:
        if isinstance(X, FeatureMatrix):
            if X.schema.names != self.schema.names:
                raise SchemaError("feature matrix schema differs from training schema")
            return X.values
        X = np.asarray(X, dtype=np.float64)
        if X.shape[1] != self.schema.width:
            raise SchemaError(
                f"expected {self.schema.width} features, got {X.shape[1]}"
            )
        return X

    def margin(self, X) -> np.ndarray:
        values = self._values(X)
        out = np.full(values.shape[0], self.base_score, dtype=np.float64)
        for tree in self.trees:
            out += self.learning_rate * tree.predict(values)
        return out

    def predict_proba(self, X) -> np.ndarray:
        return sigmoid(self.margin(X))

    def predict(self, X) -> np.ndarray:
        return (self.margin(X) > 0.0).astype(np.int64)


def train_gbt(
    X: FeatureMatrix, y, params: GbtParams = GbtParams(), allow_constant: bool = False
) -> GbtModel:
    values = X.values if isinstance(X, FeatureMatrix) else np.asarray(X, dtype=np.float64)
    schema = X.schema if isinstance(X, FeatureMatrix) else FeatureSchema(
        names=tuple(f"f{i}" for i in range(values.shape[1]))
    )
    labels = np.asarray(getattr(y, "values", y), dtype=np.float64)
    if not np.isfinite(values).all():
        raise ValueError("training matrix contains non-finite values")
    if set(np.unique(labels)) - {0.0, 1.0}:
        raise ValueError("labels must be binary 0/1")
    if np.unique(labels).size < 2 and not allow_constant:
        raise DegenerateLabelError(
            "labels contain a single class; pass allow_constant=True to fit a constant model"
        )

    prior = float(np.clip(labels.mean(), 1e-6, 1.0 - 1e-6))
    base_score = float(np.log(prior / (1.0 - prior)))
    margin = np.full(labels.shape[0], base_score, dtype=np.float64)
    trees: list[DecisionTree] = []
    for _ in range(params.n_trees):
        prob = sigmoid(margin)
        g = prob - labels
        h = prob * (1.0 - prob)
        tree = grow_boosted_tree(
            values, g, h,
            max_depth=params.max_depth,
            reg_lambda=params.reg_lambda,
            min_child_weight=params.min_child_weight,
        )
        margin += params.learning_rate * tree.predict(values)
        trees.append(tree)
    return GbtModel(
        trees=trees,
        learning_rate=params.learning_rate,
        base_score=base_score,
        schema=schema,
        params=params,
    )
