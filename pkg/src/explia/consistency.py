"""Agreement between importance sources, globally and per instance.

Global: rankings from model importances / SHAP summaries / aggregated LIME
weights are compared pairwise by top-k Jaccard overlap and Kendall tau-b
over the score vectors. Local: a SHAP and a LIME explanation of the same
instance are checked for implied-class agreement, top-k feature overlap
and sign agreement on the shared features.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy import stats

from .dataset import FeatureMatrix
from .errors import InstanceMismatchError, ParameterError, SchemaError
from .explain import GlobalShapSummary, explain_instances, shap_global
from .lime import LimeExplanation, lime_explain
from .models import GAIN, ImportanceVector, importance_gain, importance_permutation
from .seeding import child_seed
from .shapley import ShapValues, space_threshold

DEFAULT_TOP_KS = (2, 5, 10)


@dataclass(frozen=True)
class RankingSource:
    """A named per-feature score vector plus its deterministic ranking."""

    name: str
    scores: np.ndarray

    def ranking(self) -> np.ndarray:
        return np.lexsort((np.arange(self.scores.size), -self.scores))

    def top(self, k: int) -> set[int]:
        return set(int(i) for i in self.ranking()[:k])


def as_ranking_source(source, name: str | None = None) -> RankingSource:
    if isinstance(source, ImportanceVector):
        return RankingSource(name or f"{source.model_kind}-{source.method}", source.scores)
    if isinstance(source, GlobalShapSummary):
        return RankingSource(name or "shap-global", source.mean_abs)
    if isinstance(source, RankingSource):
        return source
    return RankingSource(name or "scores", np.asarray(source, dtype=np.float64))


@dataclass(frozen=True)
class PairwiseComparison:
    source_a: str
    source_b: str
    jaccard: dict[int, float]     # top-k overlap per k
    kendall: float                # tau-b over the score vectors


@dataclass(frozen=True)
class RankingComparison:
    sources: tuple[RankingSource, ...]
    pairs: tuple[PairwiseComparison, ...]
    consensus: dict[int, tuple[int, ...]]  # features in every source's top-k
    top_ks: tuple[int, ...]


def _jaccard(a: set[int], b: set[int]) -> float:
    union = a | b
    return len(a & b) / len(union) if union else 1.0


def compare_rankings(sources, top_ks=DEFAULT_TOP_KS) -> RankingComparison:
    """All pairwise ranking agreements; adding a source never changes
    existing pairwise values."""
    named = [as_ranking_source(s) for s in sources]
    if len(named) < 2:
        raise ParameterError("need at least two importance sources to compare")
    width = named[0].scores.size
    for src in named[1:]:
        if src.scores.size != width:
            raise SchemaError(
                f"source {src.name!r} has {src.scores.size} features, expected {width}"
            )
    ks = tuple(min(k, width) for k in top_ks)
    pairs = []
    for a, b in combinations(named, 2):
        jaccard = {k: _jaccard(a.top(k), b.top(k)) for k in ks}
        tau = stats.kendalltau(a.scores, b.scores).statistic
        pairs.append(
            PairwiseComparison(
                source_a=a.name, source_b=b.name,
                jaccard=jaccard, kendall=float(tau),
            )
        )
    consensus = {}
    for k in ks:
        shared = set.intersection(*(src.top(k) for src in named))
        consensus[k] = tuple(sorted(shared))
    return RankingComparison(
        sources=tuple(named), pairs=tuple(pairs), consensus=consensus, top_ks=ks
    )


@dataclass(frozen=True)
class LocalAgreement:
    model_class: int
    shap_class: int
    lime_class: int
    topk_overlap: float        # |top-k(|phi|) & top-k(|weight|)| / k
    sign_agreement: float      # share of overlapping features with matching signs
    k: int

    @property
    def shap_matches_model(self) -> bool:
        return self.shap_class == self.model_class

    @property
    def lime_matches_shap(self) -> bool:
        return self.lime_class == self.shap_class


def cross_validate_local(
    model, shap: ShapValues, lime: LimeExplanation, k: int, x=None
) -> LocalAgreement:
    """Cross-check one instance's SHAP and LIME explanations.

    SHAP implies class 1 iff the attributions push the output over the
    space threshold from the base; LIME implies the class favored by the
    surrogate at the instance. Both explanations must hash to the same
    instance values.
    """
    if shap.instance_hash != lime.instance_hash:
        raise InstanceMismatchError(
            "SHAP and LIME explanations were computed for different instances"
        )
    shap_class = shap.implied_class()
    lime_class = lime.implied_class()
    if x is not None:
        model_class = int(model.predict(np.atleast_2d(np.asarray(x, dtype=np.float64)))[0])
    else:
        model_class = shap_class  # derivable: additivity makes SHAP exact
    shap_top = set(int(i) for i in shap.top(k))
    lime_top = set(int(i) for i in lime.top(k))
    shared = shap_top & lime_top
    overlap = len(shared) / k if k else 0.0
    if shared:
        agree = sum(
            1 for j in shared
            if np.sign(shap.phi[j]) == np.sign(lime.weight_of(j))
        )
        sign_agreement = agree / len(shared)
    else:
        sign_agreement = 0.0
    return LocalAgreement(
        model_class=model_class,
        shap_class=shap_class,
        lime_class=lime_class,
        topk_overlap=overlap,
        sign_agreement=sign_agreement,
        k=k,
    )


@dataclass(frozen=True)
class AgreementReport:
    locals: tuple[LocalAgreement, ...]
    rankings: RankingComparison | None
    k: int
    n_samples: int
    shap_model_rate: float
    shap_lime_rate: float
    mean_overlap: float
    mean_sign_agreement: float
    entries: dict[str, object] = field(default_factory=dict)


def aggregate_lime_weights(limes: list[LimeExplanation], n_features: int) -> np.ndarray:
    """Mean |surrogate weight| per feature over a sample set."""
    total = np.zeros(n_features, dtype=np.float64)
    for exp in limes:
        for idx, w in zip(exp.feature_indices, exp.weights):
            total[idx] += abs(w)
    return total / max(len(limes), 1)


def agreement_report(
    model,
    X_samples,
    background,
    feature_scales=None,
    k: int = 5,
    top_ks=DEFAULT_TOP_KS,
    lime_samples: int = 5000,
    lime_kernel_width: float = 0.0,
    lime_top_k: int = 10,
    lime_ridge: float = 1.0,
    sampling_permutations: int = 200,
    seed: int = 0,
    importance_eval=None,
) -> AgreementReport:
    """Run SHAP + LIME on every sample and fold the results into one report.

    ``importance_eval``: optional (X, y) pair for permutation importance
    when the model has no gain scores (KNN).
    """
    rows = X_samples.values if isinstance(X_samples, FeatureMatrix) else np.atleast_2d(
        np.asarray(X_samples, dtype=np.float64)
    )
    p = model.schema.width
    shap_values = (
        explain_instances(
            model, rows, background,
            sampling_permutations=sampling_permutations,
            seed=child_seed(seed, "agree-shap"),
        )
        if rows.shape[0]
        else []
    )
    limes = [
        lime_explain(
            model.predict_proba,
            rows[i],
            feature_scales=feature_scales,
            n_samples=lime_samples,
            kernel_width=lime_kernel_width,
            top_k=lime_top_k,
            ridge=lime_ridge,
            seed=child_seed(seed, "agree-lime", i),
            feature_names=model.schema.names,
        )
        for i in range(rows.shape[0])
    ]
    locals_ = tuple(
        cross_validate_local(model, sv, le, k, x=rows[i])
        for i, (sv, le) in enumerate(zip(shap_values, limes))
    )

    rankings = None
    if rows.shape[0]:
        if model.kind in ("gbt", "rf"):
            model_imp = importance_gain(model)
        else:
            eval_X, eval_y = importance_eval if importance_eval is not None else (rows, model.predict(rows))
            model_imp = importance_permutation(model, eval_X, eval_y, seed=child_seed(seed, "agree-imp"))
        summary = shap_global(
            model, rows, background,
            sampling_permutations=sampling_permutations,
            seed=child_seed(seed, "agree-global"),
        )
        lime_agg = RankingSource("lime-aggregate", aggregate_lime_weights(limes, p))
        rankings = compare_rankings(
            [as_ranking_source(model_imp, f"{model.kind}-importance"),
             as_ranking_source(summary), lime_agg],
            top_ks=top_ks,
        )

    n = len(locals_)
    shap_model_rate = sum(a.shap_matches_model for a in locals_) / n if n else 1.0
    shap_lime_rate = sum(a.lime_matches_shap for a in locals_) / n if n else 1.0
    mean_overlap = sum(a.topk_overlap for a in locals_) / n if n else 0.0
    mean_sign = sum(a.sign_agreement for a in locals_) / n if n else 0.0

    entries: dict[str, object] = {
        "agreement.n_samples": n,
        "agreement.k": k,
        "agreement.shap_matches_model_rate": shap_model_rate,
        "agreement.shap_lime_class_rate": shap_lime_rate,
        "agreement.mean_topk_overlap": mean_overlap,
        "agreement.mean_sign_agreement": mean_sign,
    }
    for i, a in enumerate(locals_):
        entries[f"agreement.sample.{i}.model_class"] = a.model_class
        entries[f"agreement.sample.{i}.shap_class"] = a.shap_class
        entries[f"agreement.sample.{i}.lime_class"] = a.lime_class
        entries[f"agreement.sample.{i}.topk_overlap"] = a.topk_overlap
        entries[f"agreement.sample.{i}.sign_agreement"] = a.sign_agreement
    if rankings is not None:
        for pair in rankings.pairs:
            stem = f"agreement.rankings.{pair.source_a}:{pair.source_b}"
            for kk, val in pair.jaccard.items():
                entries[f"{stem}.jaccard_top{kk}"] = val
            entries[f"{stem}.kendall"] = pair.kendall
        for kk, feats in rankings.consensus.items():
            entries[f"agreement.consensus.top{kk}"] = ",".join(str(f) for f in feats)
    return AgreementReport(
        locals=locals_,
        rankings=rankings,
        k=k,
        n_samples=n,
        shap_model_rate=shap_model_rate,
        shap_lime_rate=shap_lime_rate,
        mean_overlap=mean_overlap,
        mean_sign_agreement=mean_sign,
        entries=entries,
    )
