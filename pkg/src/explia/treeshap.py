"""Polynomial-time Shapley values for tree ensembles.

Interventional conditioning against a background set, computed per
(leaf, background row) from path-match counts. For one tree and one
reference z, the coalition value is multilinear in per-feature indicators
"x satisfies this leaf's path constraints" (a) vs "z satisfies them" (b),
so each leaf's Shapley contribution reduces to a closed form in three
counts: features matched by x only, by z only, and by both. Averaging
over the background reproduces the exact enumeration oracle to float
precision, which the test suite asserts.

Boosted ensembles attribute in margin space (per-tree values summed and
scaled by the learning rate); forests attribute in probability space
(per-tree values averaged).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import MethodMismatchError
from .gbt import GbtModel, sigmoid
from .rf import RfModel
from .shapley import MARGIN, PROBABILITY, ShapValues, _background_values, instance_hash
from .trees import LEAF, DecisionTree

_PSI_CACHE: dict[int, np.ndarray] = {}


def _psi_table(d: int) -> np.ndarray:
    """W[q0, m] = sum_s C(m, s) * (q0+s)! * (d-1-q0-s)! / d! for q0+m <= d-1."""
    if d in _PSI_CACHE:
        return _PSI_CACHE[d]
    table = np.zeros((d + 1, d + 1), dtype=np.float64)
    fact_d = math.factorial(d)
    for q0 in range(d):
        for m in range(d - q0):
            total = 0.0
            for s in range(m + 1):
                k = q0 + s
                total += math.comb(m, s) * math.factorial(k) * math.factorial(d - 1 - k) / fact_d
            table[q0, m] = total
    _PSI_CACHE[d] = table
    return table


@dataclass
class _LeafPaths:
    """Per-leaf path constraints merged to one [lo, hi) interval per feature."""

    features: np.ndarray  # (L, dmax) int32, -1 padding
    lo: np.ndarray        # (L, dmax)
    hi: np.ndarray
    depth: np.ndarray     # (L,) distinct-feature count
    value: np.ndarray     # (L,)


def _extract_paths(tree: DecisionTree) -> _LeafPaths:
    leaves: list[tuple[float, dict[int, tuple[float, float]]]] = []
    stack: list[tuple[int, dict[int, tuple[float, float]]]] = [(0, {})]
    while stack:
        node, bounds = stack.pop()
        feat = int(tree.feature[node])
        if feat == LEAF:
            leaves.append((float(tree.value[node]), bounds))
            continue
        thr = float(tree.threshold[node])
        lo, hi = bounds.get(feat, (-np.inf, np.inf))
        left_hi = min(hi, thr)
        if lo < left_hi:  # left branch reachable: value < thr
            stack.append((int(tree.left[node]), {**bounds, feat: (lo, left_hi)}))
        right_lo = max(lo, thr)
        if right_lo < hi:  # right branch reachable: value >= thr
            stack.append((int(tree.right[node]), {**bounds, feat: (right_lo, hi)}))

    n_leaves = len(leaves)
    dmax = max((len(b) for _, b in leaves), default=1) or 1
    features = np.full((n_leaves, dmax), -1, dtype=np.int32)
    lo = np.full((n_leaves, dmax), -np.inf)
    hi = np.full((n_leaves, dmax), np.inf)
    depth = np.zeros(n_leaves, dtype=np.int64)
    value = np.zeros(n_leaves)
    for l, (val, bounds) in enumerate(leaves):
        value[l] = val
        depth[l] = len(bounds)
        for j, (feat, (a, b)) in enumerate(sorted(bounds.items())):
            features[l, j] = feat
            lo[l, j] = a
            hi[l, j] = b
    return _LeafPaths(features=features, lo=lo, hi=hi, depth=depth, value=value)


def _interval_match(paths: _LeafPaths, rows: np.ndarray) -> np.ndarray:
    """(L, n, dmax) bools: does row value sit in each path interval. Padding = True."""
    padded = paths.features >= 0
    safe = np.where(padded, paths.features, 0)
    vals = rows[:, safe]                      # (n, L, dmax)
    vals = np.moveaxis(vals, 0, 1)            # (L, n, dmax)
    match = (vals >= paths.lo[:, None, :]) & (vals < paths.hi[:, None, :])
    match |= ~padded[:, None, :]
    return match


def _tree_phi(
    paths: _LeafPaths,
    b_match: np.ndarray,
    pad_counts: np.ndarray,
    psi: np.ndarray,
    x: np.ndarray,
    n_features: int,
) -> np.ndarray:
    """Mean-over-background Shapley contributions of one tree at one instance."""
    a_match = _interval_match(paths, x[None, :])[:, 0, :]  # (L, dmax)
    a = a_match[:, None, :]
    blocked = (~a & ~b_match).any(axis=2)                   # (L, nb)
    a_only = a & ~b_match
    b_only = ~a & b_match
    q = a_only.sum(axis=2)
    m = (a & b_match).sum(axis=2) - pad_counts[:, None]
    d = paths.depth[:, None]

    live = ~blocked
    psi_a = psi[d, np.maximum(q - 1, 0), m] * live
    psi_b = psi[d, q, m] * live
    weighted_a = paths.value[:, None] * psi_a
    weighted_b = paths.value[:, None] * psi_b
    # sum over background per path position, then scatter by feature id
    pos = (a_only * weighted_a[:, :, None] - b_only * weighted_b[:, :, None]).sum(axis=1)
    phi = np.zeros(n_features, dtype=np.float64)
    padded = paths.features >= 0
    np.add.at(phi, paths.features[padded], pos[padded])
    return phi / b_match.shape[1]


def _psi_full(max_d: int) -> np.ndarray:
    """Stacked psi tables indexed [d, q0, m]."""
    size = max_d + 1
    full = np.zeros((size, size + 1, size + 1), dtype=np.float64)
    for d in range(1, size):
        table = _psi_table(d)
        full[d, : d + 1, : d + 1] = table
    return full


def shap_tree_batch(model, X, background) -> list[ShapValues]:
    """Tree-path Shapley values for a batch of instances.

    Background match masks are computed once per tree and reused across
    instances, so batching over an evaluation set is much cheaper than
    one call per instance.
    """
    if not isinstance(model, (GbtModel, RfModel)):
        raise MethodMismatchError(
            f"tree SHAP needs a tree ensemble, got {getattr(model, 'kind', type(model))}"
        )
    Z = _background_values(background)
    rows = X.values if hasattr(X, "values") else np.asarray(X, dtype=np.float64)
    rows = np.atleast_2d(rows)
    p = rows.shape[1]
    n = rows.shape[0]

    is_gbt = isinstance(model, GbtModel)
    scale = model.learning_rate if is_gbt else 1.0 / len(model.trees)
    space = MARGIN if is_gbt else PROBABILITY

    phi = np.zeros((n, p), dtype=np.float64)
    base = model.base_score if is_gbt else 0.0
    max_d = 0
    prepared = []
    for tree in model.trees:
        paths = _extract_paths(tree)
        prepared.append(paths)
        max_d = max(max_d, int(paths.depth.max(initial=0)))
    psi = _psi_full(max(max_d, 1))

    for tree, paths in zip(model.trees, prepared):
        b_match = _interval_match(paths, Z)
        pad_counts = (paths.features < 0).sum(axis=1)
        base += scale * float(tree.predict(Z).mean())
        for i in range(n):
            phi[i] += scale * _tree_phi(paths, b_match, pad_counts, psi, rows[i], p)

    prob_base = float(sigmoid(model.margin(Z)).mean()) if is_gbt else None
    out = []
    for i in range(n):
        out.append(
            ShapValues(
                phi=phi[i],
                base_value=float(base),
                output_space=space,
                instance_hash=instance_hash(rows[i]),
                feature_names=model.schema.names,
                probability_base=prob_base,
            )
        )
    return out


def shap_tree(model, x, background) -> ShapValues:
    """Shapley values of one instance under a tree ensemble."""
    return shap_tree_batch(model, np.atleast_2d(np.asarray(x, dtype=np.float64)), background)[0]
