"""Model-level operations: evaluation, importance scoring, serialization.

Model documents are versioned plain-text artifacts: a header, the
hyperparameters, then one node table per tree (or the stored rows for
KNN). Floats are written with repr so a round-trip reproduces bit-identical
predictions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import FeatureMatrix, FeatureSchema
from .errors import CorruptDocumentError, MethodMismatchError, VersionError
from .gbt import GbtModel, GbtParams
from .knn import KnnModel
from .rf import RfModel, RfParams
from .seeding import rng_for
from .trees import LEAF, DecisionTree

TrainedModel = GbtModel | RfModel | KnnModel

DOCUMENT_HEADER = "explia-model v1"

GAIN = "gain"
PERMUTATION = "permutation"


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    tn: int
    fp: int
    fn: int
    tp: int

    @property
    def confusion(self) -> np.ndarray:
        return np.array([[self.tn, self.fp], [self.fn, self.tp]], dtype=np.int64)

    def as_entries(self, prefix: str = "") -> dict[str, object]:
        return {
            f"{prefix}accuracy": self.accuracy,
            f"{prefix}precision": self.precision,
            f"{prefix}recall": self.recall,
            f"{prefix}f1": self.f1,
            f"{prefix}confusion.tn": self.tn,
            f"{prefix}confusion.fp": self.fp,
            f"{prefix}confusion.fn": self.fn,
            f"{prefix}confusion.tp": self.tp,
        }


@dataclass(frozen=True)
class ImportanceVector:
    scores: np.ndarray
    method: str  # gain | permutation
    model_kind: str
    schema: FeatureSchema

    def ranking(self) -> np.ndarray:
        """Feature indices by descending score; ties to the lower index."""
        order = np.lexsort((np.arange(self.scores.size), -self.scores))
        return order

    def top(self, k: int) -> list[str]:
        return [self.schema.names[i] for i in self.ranking()[:k]]


def predict_proba(model: TrainedModel, X) -> np.ndarray:
    return model.predict_proba(X)


def evaluate(model: TrainedModel, X, y) -> Metrics:
    """Classify at the 0.5 probability threshold and tabulate the confusion."""
    labels = np.asarray(getattr(y, "values", y), dtype=np.int64)
    predicted = model.predict(X)
    tp = int(((predicted == 1) & (labels == 1)).sum())
    tn = int(((predicted == 0) & (labels == 0)).sum())
    fp = int(((predicted == 1) & (labels == 0)).sum())
    fn = int(((predicted == 0) & (labels == 1)).sum())
    n = labels.size
    accuracy = (tp + tn) / n if n else 0.0
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return Metrics(accuracy, precision, recall, f1, tn, fp, fn, tp)


def importance_gain(model: TrainedModel) -> ImportanceVector:
    """Total split gain per feature over all trees, normalized to sum 1.

    Features absent from every tree score exactly 0.
    """
    if not isinstance(model, (GbtModel, RfModel)):
        raise MethodMismatchError(
            f"gain importance needs a tree ensemble, got {model.kind}"
        )
    p = model.schema.width
    totals = np.zeros(p, dtype=np.float64)
    for tree in model.trees:
        totals += tree.gain_by_feature(p)
    total = totals.sum()
    if total > 0:
        totals = totals / total
    return ImportanceVector(scores=totals, method=GAIN, model_kind=model.kind, schema=model.schema)


def importance_permutation(
    model: TrainedModel, X, y, repeats: int = 3, seed: int = 0
) -> ImportanceVector:
    """Accuracy drop from seeded shuffles of one column at a time.

    Scores may be negative when a feature was actively misleading.
    """
    values = X.values if isinstance(X, FeatureMatrix) else np.asarray(X, dtype=np.float64)
    labels = np.asarray(getattr(y, "values", y), dtype=np.int64)
    baseline = float((model.predict(values) == labels).mean())
    p = values.shape[1]
    scores = np.zeros(p, dtype=np.float64)
    for j in range(p):
        drop = 0.0
        for r in range(repeats):
            rng = rng_for(seed, "perm-imp", j, r)
            shuffled = values.copy()
            shuffled[:, j] = shuffled[rng.permutation(values.shape[0]), j]
            drop += float((model.predict(shuffled) == labels).mean())
        scores[j] = baseline - drop / repeats
    return ImportanceVector(
        scores=scores, method=PERMUTATION, model_kind=model.kind, schema=model.schema
    )


# ---------------------------------------------------------------- documents


def _tree_lines(index: int, tree: DecisionTree) -> list[str]:
    lines = [f"tree {index} nodes {tree.n_nodes}"]
    for i in range(tree.n_nodes):
        if tree.feature[i] == LEAF:
            lines.append(f"{i} leaf {float(tree.value[i])!r} {float(tree.cover[i])!r}")
        else:
            lines.append(
                f"{i} split {int(tree.feature[i])} {float(tree.threshold[i])!r} "
                f"{int(tree.left[i])} {int(tree.right[i])} "
                f"{float(tree.gain[i])!r} {float(tree.cover[i])!r}"
            )
    return lines


def _parse_trees(lines: list[str], pos: int, count: int) -> tuple[list[DecisionTree], int]:
    trees = []
    for t in range(count):
        if pos >= len(lines):
            raise CorruptDocumentError(f"missing tree {t}")
        head = lines[pos].split()
        if len(head) != 4 or head[0] != "tree" or int(head[1]) != t:
            raise CorruptDocumentError(f"bad tree header at line {pos + 1}: {lines[pos]!r}")
        n_nodes = int(head[3])
        pos += 1
        feature = np.full(n_nodes, LEAF, dtype=np.int32)
        threshold = np.full(n_nodes, np.nan)
        left = np.full(n_nodes, LEAF, dtype=np.int32)
        right = np.full(n_nodes, LEAF, dtype=np.int32)
        value = np.full(n_nodes, np.nan)
        gain = np.zeros(n_nodes)
        cover = np.zeros(n_nodes)
        for i in range(n_nodes):
            if pos >= len(lines):
                raise CorruptDocumentError(f"tree {t}: truncated at node {i}")
            parts = lines[pos].split()
            pos += 1
            try:
                if int(parts[0]) != i:
                    raise CorruptDocumentError(f"tree {t}: node {i} out of order")
                if parts[1] == "leaf":
                    value[i] = float(parts[2])
                    cover[i] = float(parts[3])
                elif parts[1] == "split":
                    feature[i] = int(parts[2])
                    threshold[i] = float(parts[3])
                    left[i] = int(parts[4])
                    right[i] = int(parts[5])
                    gain[i] = float(parts[6])
                    cover[i] = float(parts[7])
                else:
                    raise CorruptDocumentError(f"tree {t}: unknown node kind {parts[1]!r}")
            except (IndexError, ValueError) as exc:
                raise CorruptDocumentError(f"tree {t}: bad node line {lines[pos - 1]!r}") from exc
        trees.append(
            DecisionTree(feature=feature, threshold=threshold, left=left,
                         right=right, value=value, gain=gain, cover=cover)
        )
    return trees, pos


def serialize(model: TrainedModel) -> str:
    lines = [DOCUMENT_HEADER, f"kind = {model.kind}"]
    lines.append("schema = " + "|".join(model.schema.names))
    if isinstance(model, GbtModel):
        lines.append(f"learning_rate = {model.learning_rate!r}")
        lines.append(f"base_score = {model.base_score!r}")
        lines.append(f"n_trees = {len(model.trees)}")
        for i, tree in enumerate(model.trees):
            lines.extend(_tree_lines(i, tree))
    elif isinstance(model, RfModel):
        lines.append(f"n_trees = {len(model.trees)}")
        for i, tree in enumerate(model.trees):
            lines.extend(_tree_lines(i, tree))
    elif isinstance(model, KnnModel):
        lines.append(f"k = {model.k}")
        lines.append(f"n_rows = {model.X_train.shape[0]}")
        for i in range(model.X_train.shape[0]):
            cells = " ".join(repr(float(v)) for v in model.X_train[i])
            lines.append(f"{i} {int(model.y_train[i])} {cells}")
    else:
        raise MethodMismatchError(f"cannot serialize model kind {type(model)!r}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def _header_value(lines: list[str], pos: int, key: str) -> tuple[str, int]:
    if pos >= len(lines) or not lines[pos].startswith(f"{key} = "):
        raise CorruptDocumentError(f"expected '{key} = ...' at line {pos + 1}")
    return lines[pos][len(key) + 3 :], pos + 1


def deserialize(document: str) -> TrainedModel:
    lines = [line for line in document.splitlines() if line.strip()]
    if not lines:
        raise CorruptDocumentError("empty document")
    if lines[0] != DOCUMENT_HEADER:
        raise VersionError(f"unsupported document header {lines[0]!r}")
    kind, pos = _header_value(lines, 1, "kind")
    schema_text, pos = _header_value(lines, pos, "schema")
    schema = FeatureSchema(names=tuple(schema_text.split("|")))
    if kind == "gbt":
        lr, pos = _header_value(lines, pos, "learning_rate")
        base, pos = _header_value(lines, pos, "base_score")
        n_trees, pos = _header_value(lines, pos, "n_trees")
        trees, pos = _parse_trees(lines, pos, int(n_trees))
        model = GbtModel(
            trees=trees, learning_rate=float(lr), base_score=float(base),
            schema=schema, params=GbtParams(n_trees=int(n_trees)),
        )
    elif kind == "rf":
        n_trees, pos = _header_value(lines, pos, "n_trees")
        trees, pos = _parse_trees(lines, pos, int(n_trees))
        model = RfModel(trees=trees, schema=schema, params=RfParams(n_trees=int(n_trees)))
    elif kind == "knn":
        k, pos = _header_value(lines, pos, "k")
        n_rows, pos = _header_value(lines, pos, "n_rows")
        n = int(n_rows)
        X = np.empty((n, schema.width), dtype=np.float64)
        y = np.empty(n, dtype=np.int64)
        for i in range(n):
            if pos >= len(lines):
                raise CorruptDocumentError(f"knn rows truncated at {i}")
            parts = lines[pos].split()
            pos += 1
            try:
                if int(parts[0]) != i or len(parts) != schema.width + 2:
                    raise CorruptDocumentError(f"bad knn row at line {pos}")
                y[i] = int(parts[1])
                X[i] = [float(v) for v in parts[2:]]
            except (IndexError, ValueError) as exc:
                raise CorruptDocumentError(f"bad knn row at line {pos}") from exc
        model = KnnModel(X_train=X, y_train=y, k=int(k), schema=schema)
    else:
        raise CorruptDocumentError(f"unknown model kind {kind!r}")
    if pos >= len(lines) or lines[pos] != "end":
        raise CorruptDocumentError("document is missing its 'end' marker")
    return model
