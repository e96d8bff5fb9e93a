"""Recursive feature elimination guided by model and XAI importances.

The loop retrains on a shrinking feature set, dropping the least important
feature each round, and keeps a set only while the held-out score stays
within tolerance of the previous accepted score. Zero-importance features
can go in one opening batch, and an XAI-guided seed (union of each
source's top-m features) can pre-drop everything no source found
impactful.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import FeatureMatrix, LabelVector, split
from .errors import ParameterError
from .explain import GlobalShapSummary, shap_global
from .models import (
    GAIN,
    PERMUTATION,
    ImportanceVector,
    evaluate,
    importance_gain,
    importance_permutation,
)
from .seeding import child_seed

SHAP_GLOBAL = "shap_global"


@dataclass(frozen=True)
class RfeConfig:
    min_features: int = 5
    tolerance: float = 0.0
    batch_drop_zero: bool = True
    importance_source: str = GAIN  # gain | permutation | shap_global
    val_ratio: float = 0.25       # validation share carved from the training data
    seed_top_m: int = 20          # per-source top-m for the XAI-guided seed
    shap_eval_rows: int = 100
    shap_background_rows: int = 100

    def __post_init__(self):
        if self.min_features < 1:
            raise ParameterError("min_features must be >= 1")
        if self.tolerance < 0:
            raise ParameterError("tolerance must be >= 0")
        if self.importance_source not in (GAIN, PERMUTATION, SHAP_GLOBAL):
            raise ParameterError(f"unknown importance source {self.importance_source!r}")


@dataclass(frozen=True)
class RfeIteration:
    features: tuple[int, ...]  # original column indices in play
    removed: tuple[int, ...]   # columns removed to reach this set
    score: float
    accepted: bool


@dataclass(frozen=True)
class RfeTrace:
    iterations: tuple[RfeIteration, ...]
    best_features: tuple[int, ...]
    best_score: float
    split_seed: int

    @property
    def accepted_scores(self) -> list[float]:
        return [it.score for it in self.iterations if it.accepted]


def drop_zero_importance(model, schema) -> np.ndarray:
    """Indices of features worth keeping: everything with gain > 0.

    Returns all features unchanged when the model never split (an
    all-zero importance vector carries no elimination signal).
    """
    imp = importance_gain(model)
    if imp.scores.sum() == 0:
        return np.arange(schema.width)
    return np.flatnonzero(imp.scores > 0)


def xai_guided_seed(
    global_shap: GlobalShapSummary,
    lime_aggregate,
    gain: ImportanceVector,
    m: int = 20,
) -> np.ndarray:
    """Union of each source's top-m features, as sorted original indices."""
    p = gain.scores.size
    if global_shap.mean_abs.size != p:
        raise ParameterError("importance sources cover different schemas")
    lime_scores = np.asarray(
        getattr(lime_aggregate, "scores", lime_aggregate), dtype=np.float64
    )
    if lime_scores.size != p:
        raise ParameterError("importance sources cover different schemas")
    lime_rank = np.lexsort((np.arange(p), -lime_scores))
    chosen = (
        set(int(i) for i in gain.ranking()[:m])
        | set(int(i) for i in global_shap.ranking[:m])
        | set(int(i) for i in lime_rank[:m])
    )
    return np.array(sorted(chosen), dtype=np.int64)


def _importance_scores(model, config: RfeConfig, X_fit, y_fit, seed: int) -> np.ndarray:
    if config.importance_source == GAIN:
        return importance_gain(model).scores
    if config.importance_source == PERMUTATION:
        return importance_permutation(
            model, X_fit, y_fit, seed=child_seed(seed, "rfe-perm")
        ).scores
    rng = np.random.default_rng(child_seed(seed, "rfe-shap"))
    n = X_fit.shape[0]
    bg = X_fit[rng.choice(n, size=min(config.shap_background_rows, n), replace=False)]
    ev = X_fit[rng.choice(n, size=min(config.shap_eval_rows, n), replace=False)]
    return shap_global(model, ev, bg, seed=child_seed(seed, "rfe-shap-eval")).mean_abs


def rfe_run(
    train_fn,
    X: FeatureMatrix,
    y: LabelVector,
    split_seed: int,
    config: RfeConfig = RfeConfig(),
    scoring_set=None,
    start_features=None,
):
    """Run the elimination loop; returns (trace, model trained on the best set).

    ``train_fn(values, labels)`` must be deterministic (seeds baked in).
    By default a validation fold is carved from (X, y) with ``split_seed``
    and every iteration trains on the remainder; passing ``scoring_set``
    (X_score, y_score) instead trains on all of (X, y) and scores there,
    reproducing the paper-faithful test-set scoring.
    """
    p = X.n_features
    if start_features is None:
        current = list(range(p))
    else:
        current = sorted(int(i) for i in start_features)
    if len(current) < config.min_features:
        raise ParameterError(
            f"start set has {len(current)} features, below min_features={config.min_features}"
        )

    if scoring_set is None:
        fold = split(X, y, ratio=1.0 - config.val_ratio, seed=split_seed, stratify=True)
        fit_values, fit_labels = fold.train[0].values, fold.train[1].values
        score_values, score_labels = fold.test[0].values, fold.test[1].values
    else:
        fit_values, fit_labels = X.values, y.values
        score_values = scoring_set[0].values if hasattr(scoring_set[0], "values") else np.asarray(scoring_set[0])
        score_labels = np.asarray(getattr(scoring_set[1], "values", scoring_set[1]))

    def fit_and_score(feats: list[int]):
        model = train_fn(fit_values[:, feats], fit_labels)
        score = float((model.predict(score_values[:, feats]) == score_labels).mean())
        return model, score

    iterations: list[RfeIteration] = []
    model, score = fit_and_score(current)
    iterations.append(RfeIteration(tuple(current), (), score, True))
    prev_score = score

    if config.batch_drop_zero:
        scores = importance_gain(model).scores if model.kind in ("gbt", "rf") else None
        if scores is not None and scores.sum() > 0:
            zero_local = np.flatnonzero(scores == 0)
            # never batch below min_features; surplus zeros stay in play
            max_drop = len(current) - config.min_features
            drop = [current[i] for i in zero_local][:max_drop]
            if drop:
                candidate = [f for f in current if f not in set(drop)]
                new_model, new_score = fit_and_score(candidate)
                accepted = new_score >= prev_score - config.tolerance
                iterations.append(
                    RfeIteration(tuple(candidate), tuple(drop), new_score, accepted)
                )
                if accepted:
                    current, model, score = candidate, new_model, new_score
                    prev_score = new_score

    while len(current) > config.min_features and iterations[-1].accepted:
        imp = _importance_scores(
            model, config, fit_values[:, current], fit_labels, split_seed
        )
        order = np.lexsort((np.asarray(current), imp))
        victim = current[int(order[0])]
        candidate = [f for f in current if f != victim]
        new_model, new_score = fit_and_score(candidate)
        accepted = new_score >= prev_score - config.tolerance
        iterations.append(
            RfeIteration(tuple(candidate), (victim,), new_score, accepted)
        )
        if not accepted:
            break
        current, model, score = candidate, new_model, new_score
        prev_score = new_score

    accepted_iters = [it for it in iterations if it.accepted]
    best = max(accepted_iters, key=lambda it: (it.score, -len(it.features)))
    final_model, final_score = fit_and_score(list(best.features))
    trace = RfeTrace(
        iterations=tuple(iterations),
        best_features=best.features,
        best_score=best.score,
        split_seed=split_seed,
    )
    return trace, final_model
