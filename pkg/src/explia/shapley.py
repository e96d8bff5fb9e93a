"""Shapley-value attribution: exact enumeration and permutation sampling.

Both estimators use interventional conditioning: a coalition's value is
the mean model output over the background set with the coalition's
features pinned to the explained instance. The exact enumerator is the
oracle every faster method is tested against; the permutation sampler
serves models without a tree structure and reports a standard error per
feature.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .dataset import FeatureMatrix
from .errors import BudgetError, ParameterError

MARGIN = "margin"
PROBABILITY = "probability"

EXACT_BUDGET = 15


def instance_hash(x: np.ndarray) -> str:
    return hashlib.sha256(np.asarray(x, dtype=np.float64).tobytes()).hexdigest()[:16]


def space_threshold(output_space: str) -> float:
    """Decision threshold in the declared output space (margin 0, probability 0.5)."""
    if output_space == MARGIN:
        return 0.0
    if output_space == PROBABILITY:
        return 0.5
    raise ValueError(f"unknown output space {output_space!r}")


@dataclass(frozen=True)
class ShapValues:
    phi: np.ndarray
    base_value: float
    output_space: str  # margin | probability
    instance_hash: str
    feature_names: tuple[str, ...] = ()
    standard_error: np.ndarray | None = None
    probability_base: float | None = None  # emitted alongside for margin-space GBT

    @property
    def output(self) -> float:
        return float(self.base_value + self.phi.sum())

    def implied_class(self) -> int:
        return int(self.output > space_threshold(self.output_space))

    def top(self, k: int) -> np.ndarray:
        """Feature indices by descending |phi|; ties to the lower index."""
        mag = np.abs(self.phi)
        return np.lexsort((np.arange(mag.size), -mag))[:k]


def _background_values(background) -> np.ndarray:
    if isinstance(background, FeatureMatrix):
        return background.values
    return np.asarray(background, dtype=np.float64)


def shap_exact(
    predict_fn, x: np.ndarray, background, output_space: str = PROBABILITY
) -> ShapValues:
    """Enumerate every feature subset and apply the exact Shapley weights.

    The coalition value v(S) substitutes x's values at S into each
    background row and averages the model output. Budget-limited to 15
    features (2^p evaluations).
    """
    x = np.asarray(x, dtype=np.float64)
    Z = _background_values(background)
    p = x.size
    if p > EXACT_BUDGET:
        raise BudgetError(
            f"{p} features exceeds the 2^{EXACT_BUDGET} enumeration budget; "
            "use the tree or sampling method"
        )
    n_subsets = 1 << p
    nb = Z.shape[0]

    values = np.empty(n_subsets, dtype=np.float64)
    chunk = max(1, int(2e6) // max(nb, 1))
    for start in range(0, n_subsets, chunk):
        masks = range(start, min(start + chunk, n_subsets))
        rows = np.empty((len(masks) * nb, p), dtype=np.float64)
        for i, mask in enumerate(masks):
            hybrid = Z.copy()
            for j in range(p):
                if mask >> j & 1:
                    hybrid[:, j] = x[j]
            rows[i * nb : (i + 1) * nb] = hybrid
        outputs = np.asarray(predict_fn(rows), dtype=np.float64)
        values[start : start + len(masks)] = outputs.reshape(len(masks), nb).mean(axis=1)

    weights = np.array(
        [math.factorial(s) * math.factorial(p - s - 1) / math.factorial(p) for s in range(p)]
    )
    popcount = np.array([bin(m).count("1") for m in range(n_subsets)])
    phi = np.zeros(p, dtype=np.float64)
    for i in range(p):
        bit = 1 << i
        without = np.flatnonzero((np.arange(n_subsets) & bit) == 0)
        phi[i] = float(
            (weights[popcount[without]] * (values[without | bit] - values[without])).sum()
        )
    return ShapValues(
        phi=phi,
        base_value=float(values[0]),
        output_space=output_space,
        instance_hash=instance_hash(x),
    )


def shap_sampling(
    predict_fn,
    x: np.ndarray,
    background,
    n_permutations: int = 200,
    seed: int = 0,
    output_space: str = PROBABILITY,
) -> ShapValues:
    """Monte Carlo Shapley over random feature orderings.

    Each permutation adds features one at a time and credits the marginal
    change; additivity holds by construction because the marginals
    telescope from the base value to the full output. Standard errors are
    per-feature over permutations.
    """
    if n_permutations < 1:
        raise ParameterError("n_permutations must be >= 1")
    x = np.asarray(x, dtype=np.float64)
    Z = _background_values(background)
    p = x.size
    nb = Z.shape[0]
    rng = np.random.default_rng(seed)

    base = float(np.asarray(predict_fn(Z), dtype=np.float64).mean())
    mean = np.zeros(p, dtype=np.float64)
    m2 = np.zeros(p, dtype=np.float64)
    for t in range(1, n_permutations + 1):
        order = rng.permutation(p)
        # prefix k holds x's values at order[:k+1]
        prefixes = np.tile(Z, (p, 1, 1))
        hybrid = Z.copy()
        for k, j in enumerate(order):
            hybrid[:, j] = x[j]
            prefixes[k] = hybrid
        outputs = np.asarray(
            predict_fn(prefixes.reshape(p * nb, p)), dtype=np.float64
        ).reshape(p, nb).mean(axis=1)
        marginals = np.empty(p, dtype=np.float64)
        marginals[order] = np.diff(outputs, prepend=base)
        delta = marginals - mean
        mean += delta / t
        m2 += delta * (marginals - mean)
    variance = m2 / n_permutations
    se = np.sqrt(np.maximum(variance, 0.0) / n_permutations)
    return ShapValues(
        phi=mean,
        base_value=base,
        output_space=output_space,
        instance_hash=instance_hash(x),
        standard_error=se,
    )
