"""Brute-force k-nearest-neighbor classifier on Euclidean distance.

Stores the training matrix verbatim. Vote ties resolve to the class with
the smaller summed neighbor distance, then to the lower label id;
equidistant neighbors at the k boundary resolve to the lower row index so
predictions are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import FeatureMatrix, FeatureSchema
from .errors import ParameterError, SchemaError


@dataclass
class KnnModel:
    kind = "knn"
    X_train: np.ndarray
    y_train: np.ndarray
    k: int
    schema: FeatureSchema

    def _values(self, X) -> np.ndarray:
        if isinstance(X, FeatureMatrix):
            if X.schema.names != self.schema.names:
                raise SchemaError("feature matrix schema differs from training schema")
            return X.values
        X = np.asarray(X, dtype=np.float64)
        if X.shape[1] != self.schema.width:
            raise SchemaError(f"expected {self.schema.width} features, got {X.shape[1]}")
        return X

    def _neighbors(self, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(indices, squared distances) of the k nearest per query row."""
        sq_train = (self.X_train**2).sum(axis=1)
        out_idx = np.empty((values.shape[0], self.k), dtype=np.int64)
        out_d2 = np.empty((values.shape[0], self.k), dtype=np.float64)
        n = self.X_train.shape[0]
        row_ids = np.arange(n)
        chunk = max(1, int(4e7) // max(n, 1))
        for start in range(0, values.shape[0], chunk):
            block = values[start : start + chunk]
            d2 = (block**2).sum(axis=1)[:, None] + sq_train[None, :] - 2.0 * block @ self.X_train.T
            np.maximum(d2, 0.0, out=d2)
            order = np.lexsort((np.broadcast_to(row_ids, d2.shape), d2), axis=1)[:, : self.k]
            out_idx[start : start + chunk] = order
            out_d2[start : start + chunk] = np.take_along_axis(d2, order, axis=1)
        return out_idx, out_d2

    def predict_proba(self, X) -> np.ndarray:
        idx, _ = self._neighbors(self._values(X))
        return self.y_train[idx].mean(axis=1)

    def predict(self, X) -> np.ndarray:
        idx, d2 = self._neighbors(self._values(X))
        votes1 = self.y_train[idx].sum(axis=1)
        votes0 = self.k - votes1
        out = np.where(votes1 > votes0, 1, 0).astype(np.int64)
        tied = votes1 == votes0
        if tied.any():
            dist = np.sqrt(d2[tied])
            labels = self.y_train[idx[tied]]
            sum1 = (dist * labels).sum(axis=1)
            sum0 = (dist * (1 - labels)).sum(axis=1)
            # smaller summed distance wins; exact tie -> lower label id (0)
            out[np.flatnonzero(tied)] = np.where(sum1 < sum0, 1, 0)
        return out


def train_knn(X: FeatureMatrix, y, k: int = 5) -> KnnModel:
    values = X.values if isinstance(X, FeatureMatrix) else np.asarray(X, dtype=np.float64)
    schema = X.schema if isinstance(X, FeatureMatrix) else FeatureSchema(
        names=tuple(f"f{i}" for i in range(values.shape[1]))
    )
    labels = np.asarray(getattr(y, "values", y), dtype=np.int64)
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if k > values.shape[0]:
        raise ParameterError(f"k={k} exceeds the {values.shape[0]} stored rows")
    return KnnModel(X_train=values.copy(), y_train=labels.copy(), k=k, schema=schema)
