"""Local surrogate explanations: sparse weighted ridge around one instance.

Perturbations are Gaussian draws around the explained instance, scaled per
feature (unit scale in standardized space); each is weighted by
exp(-d^2 / w^2) with d its Euclidean distance to the instance. The
complexity penalty is realized as a hard cap: greedy forward selection
keeps the K features that most reduce the weighted ridge loss, then the
surrogate is refit on exactly those K.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import KernelWidthError, ParameterError
from .shapley import instance_hash


def default_kernel_width(n_features: int) -> float:
    return 0.75 * math.sqrt(n_features)


@dataclass(frozen=True)
class LimeExplanation:
    feature_indices: tuple[int, ...]   # exactly K, in descending |weight| order
    weights: np.ndarray                # surrogate coefficients for those features
    intercept: float
    predicted_proba: float             # model probability of class 1 at x
    surrogate_at_x: float              # surrogate output at the instance
    kernel_width: float
    n_samples: int
    seed: int
    instance_hash: str
    feature_names: tuple[str, ...] = ()

    def implied_class(self) -> int:
        return int(self.surrogate_at_x > 0.5)

    def weight_of(self, feature: int) -> float:
        try:
            return float(self.weights[self.feature_indices.index(feature)])
        except ValueError:
            return 0.0

    def top(self, k: int) -> np.ndarray:
        return np.asarray(self.feature_indices[:k], dtype=np.int64)


def _ridge_loss_and_beta(gram, target, y_weighted_sq, idx, ridge):
    """Solve the weighted ridge normal equations restricted to idx columns.

    idx always includes column 0 (the unpenalized intercept).
    """
    sub = gram[np.ix_(idx, idx)].copy()
    for d in range(1, len(idx)):
        sub[d, d] += ridge
    beta = np.linalg.solve(sub, target[idx])
    loss = y_weighted_sq - float(target[idx] @ beta)
    return loss, beta


def lime_explain(
    predict_fn,
    x: np.ndarray,
    feature_scales: np.ndarray | None = None,
    n_samples: int = 5000,
    kernel_width: float = 0.0,
    top_k: int = 10,
    ridge: float = 1.0,
    seed: int = 0,
    feature_names: tuple[str, ...] = (),
) -> LimeExplanation:
    """Fit a K-feature linear surrogate to the model around x."""
    x = np.asarray(x, dtype=np.float64)
    p = x.size
    if top_k > p:
        raise ParameterError(f"top_k={top_k} exceeds the {p} available features")
    if n_samples < top_k + 1:
        raise ParameterError(f"n_samples={n_samples} must exceed top_k={top_k}")
    scales = np.ones(p) if feature_scales is None else np.asarray(feature_scales, dtype=np.float64)
    width = kernel_width if kernel_width > 0 else default_kernel_width(p)

    rng = np.random.default_rng(seed)
    perturbed = x[None, :] + rng.standard_normal((n_samples, p)) * scales[None, :]
    d_sq = ((perturbed - x[None, :]) ** 2).sum(axis=1)
    weights = np.exp(-d_sq / width**2)
    if not np.any(weights > 1e-12):
        raise KernelWidthError(
            f"all locality weights vanished at kernel width {width}; increase it"
        )
    y = np.asarray(predict_fn(perturbed), dtype=np.float64)

    design = np.column_stack([np.ones(n_samples), perturbed])
    weighted = design * weights[:, None]
    gram = design.T @ weighted
    target = weighted.T @ y
    y_weighted_sq = float(weights @ y**2)

    selected: list[int] = []
    for _ in range(top_k):
        best = None
        for j in range(p):
            if j in selected:
                continue
            idx = [0] + [1 + s for s in selected] + [1 + j]
            loss, _ = _ridge_loss_and_beta(gram, target, y_weighted_sq, idx, ridge)
            if best is None or loss < best[0] - 1e-15:
                best = (loss, j)
        selected.append(best[1])

    idx = [0] + [1 + s for s in selected]
    _, beta = _ridge_loss_and_beta(gram, target, y_weighted_sq, idx, ridge)
    intercept = float(beta[0])
    coef = beta[1:]
    order = np.lexsort((np.asarray(selected), -np.abs(coef)))
    feature_indices = tuple(int(selected[i]) for i in order)
    final_weights = np.array([coef[i] for i in order], dtype=np.float64)

    proba_x = float(np.asarray(predict_fn(x[None, :]), dtype=np.float64)[0])
    surrogate_at_x = intercept + float(sum(w * x[f] for f, w in zip(feature_indices, final_weights)))
    return LimeExplanation(
        feature_indices=feature_indices,
        weights=final_weights,
        intercept=intercept,
        predicted_proba=proba_x,
        surrogate_at_x=surrogate_at_x,
        kernel_width=width,
        n_samples=n_samples,
        seed=seed,
        instance_hash=instance_hash(x),
        feature_names=tuple(feature_names),
    )
