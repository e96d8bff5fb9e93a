"""Explanation orchestration: dispatch, global summaries, force breakdowns.

Tree ensembles route to the polynomial path algorithm; KNN routes to
permutation sampling (per-instance child seeds keep batches order
independent). The global summary aggregates mean |phi| per feature per
predicted class over an evaluation set; the force breakdown linearizes
one explanation into a base-to-output trajectory for plotting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import FeatureMatrix
from .gbt import GbtModel
from .knn import KnnModel
from .rf import RfModel
from .seeding import child_seed
from .shapley import ShapValues, shap_sampling
from .treeshap import shap_tree_batch

DEFAULT_SIGNIFICANCE_FLOOR = 0.001  # fraction of total mean |phi|


def explain_instances(
    model, X, background, sampling_permutations: int = 200, seed: int = 0
) -> list[ShapValues]:
    """Shapley values for each row of X under whichever method fits the model."""
    rows = X.values if isinstance(X, FeatureMatrix) else np.atleast_2d(np.asarray(X, dtype=np.float64))
    if isinstance(model, (GbtModel, RfModel)):
        return shap_tree_batch(model, rows, background)
    if isinstance(model, KnnModel):
        out = []
        for i in range(rows.shape[0]):
            sv = shap_sampling(
                model.predict_proba,
                rows[i],
                background,
                n_permutations=sampling_permutations,
                seed=child_seed(seed, "shap-sample", i),
            )
            out.append(
                ShapValues(
                    phi=sv.phi, base_value=sv.base_value, output_space=sv.output_space,
                    instance_hash=sv.instance_hash, feature_names=model.schema.names,
                    standard_error=sv.standard_error,
                )
            )
        return out
    raise TypeError(f"unsupported model type {type(model)!r}")


@dataclass(frozen=True)
class GlobalShapSummary:
    mean_abs: np.ndarray          # combined over all evaluated rows
    mean_abs_class0: np.ndarray   # rows the model predicts benign
    mean_abs_class1: np.ndarray   # rows the model predicts attack
    ranking: np.ndarray           # feature indices, descending mean |phi|
    significant: np.ndarray       # indices above the floor, in ranking order
    floor: float
    feature_names: tuple[str, ...]
    n_rows: int

    def top(self, k: int) -> list[str]:
        return [self.feature_names[i] for i in self.ranking[:k]]


def shap_global(
    model,
    X_eval,
    background,
    floor: float = DEFAULT_SIGNIFICANCE_FLOOR,
    sampling_permutations: int = 200,
    seed: int = 0,
) -> GlobalShapSummary:
    """Mean |phi| per feature over an evaluation set, split by predicted class."""
    rows = X_eval.values if isinstance(X_eval, FeatureMatrix) else np.atleast_2d(
        np.asarray(X_eval, dtype=np.float64)
    )
    if rows.shape[0] == 0:
        raise ValueError("evaluation set is empty")
    shap_values = explain_instances(
        model, rows, background, sampling_permutations=sampling_permutations, seed=seed
    )
    phi = np.vstack([sv.phi for sv in shap_values])
    predicted = model.predict(rows)
    mean_abs = np.abs(phi).mean(axis=0)
    p = phi.shape[1]

    def class_mean(cls: int) -> np.ndarray:
        mask = predicted == cls
        return np.abs(phi[mask]).mean(axis=0) if mask.any() else np.zeros(p)

    ranking = np.lexsort((np.arange(p), -mean_abs))
    total = mean_abs.sum()
    cut = floor * total
    significant = np.array([i for i in ranking if mean_abs[i] > cut], dtype=np.int64)
    names = tuple(getattr(model.schema, "names", tuple(f"f{i}" for i in range(p))))
    return GlobalShapSummary(
        mean_abs=mean_abs,
        mean_abs_class0=class_mean(0),
        mean_abs_class1=class_mean(1),
        ranking=ranking,
        significant=significant,
        floor=floor,
        feature_names=names,
        n_rows=rows.shape[0],
    )


@dataclass(frozen=True)
class ForceBreakdown:
    """One explanation as a cumulative trajectory from base to output.

    Positive contributions push toward class 1 (attack) in the
    explanation's output space; negatives push toward benign. Features are
    ordered by signed phi, largest first.
    """

    feature_indices: tuple[int, ...]
    phi: np.ndarray               # signed, in trajectory order
    trajectory: np.ndarray        # len = n features + 1, starts at base
    base_value: float
    output: float
    output_space: str
    positive: tuple[int, ...]     # features pushing toward class 1
    negative: tuple[int, ...]
    feature_names: tuple[str, ...] = ()


def force_breakdown(shap: ShapValues) -> ForceBreakdown:
    p = shap.phi.size
    order = np.lexsort((np.arange(p), -shap.phi))
    phi_sorted = shap.phi[order]
    trajectory = shap.base_value + np.concatenate([[0.0], np.cumsum(phi_sorted)])
    positive = tuple(int(i) for i in order[phi_sorted > 0])
    negative = tuple(int(i) for i in order[phi_sorted < 0])
    return ForceBreakdown(
        feature_indices=tuple(int(i) for i in order),
        phi=phi_sorted,
        trajectory=trajectory,
        base_value=float(shap.base_value),
        output=float(shap.output),
        output_space=shap.output_space,
        positive=positive,
        negative=negative,
        feature_names=shap.feature_names,
    )
