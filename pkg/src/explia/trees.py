"""Binary decision trees with exact greedy split search.

One flat-array tree structure serves both ensembles: boosted trees carry
margin contributions in their leaves, forest trees carry class-1
fractions. Split search scans sorted unique values with midpoint
thresholds; equal-gain ties resolve to the lowest feature index, then the
lowest threshold, so grown trees are bit-reproducible.

Routing convention: value < threshold goes left, value >= threshold right.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LEAF = -1


@dataclass
class DecisionTree:
    feature: np.ndarray    # int32; LEAF marks a leaf
    threshold: np.ndarray  # float64; NaN at leaves
    left: np.ndarray       # int32 child ids; LEAF at leaves
    right: np.ndarray
    value: np.ndarray      # float64 leaf payloads; NaN at internal nodes
    gain: np.ndarray       # float64 split gain; 0 at leaves
    cover: np.ndarray      # float64 training weight reaching the node

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Leaf value per row via a vectorized frontier walk."""
        node = np.zeros(X.shape[0], dtype=np.int32)
        while True:
            feats = self.feature[node]
            active = np.flatnonzero(feats != LEAF)
            if active.size == 0:
                break
            cur = node[active]
            go_left = X[active, feats[active]] < self.threshold[cur]
            node[active] = np.where(go_left, self.left[cur], self.right[cur])
        return self.value[node]

    def used_features(self) -> np.ndarray:
        return np.unique(self.feature[self.feature != LEAF])

    def gain_by_feature(self, n_features: int) -> np.ndarray:
        out = np.zeros(n_features, dtype=np.float64)
        internal = self.feature != LEAF
        np.add.at(out, self.feature[internal], self.gain[internal])
        return out


class _TreeBuffer:
    """Append-only node store frozen into a DecisionTree."""

    def __init__(self):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []
        self.gain: list[float] = []
        self.cover: list[float] = []

    def add(self) -> int:
        for arr, filler in (
            (self.feature, LEAF), (self.threshold, np.nan),
            (self.left, LEAF), (self.right, LEAF),
            (self.value, np.nan), (self.gain, 0.0), (self.cover, 0.0),
        ):
            arr.append(filler)
        return len(self.feature) - 1

    def freeze(self) -> DecisionTree:
        return DecisionTree(
            feature=np.array(self.feature, dtype=np.int32),
            threshold=np.array(self.threshold, dtype=np.float64),
            left=np.array(self.left, dtype=np.int32),
            right=np.array(self.right, dtype=np.int32),
            value=np.array(self.value, dtype=np.float64),
            gain=np.array(self.gain, dtype=np.float64),
            cover=np.array(self.cover, dtype=np.float64),
        )


def _best_split_logistic(X, rows, g, h, reg_lambda, min_child_weight):
    """Second-order gain maximization for one node; None when no split helps."""
    g_sum = g[rows].sum()
    h_sum = h[rows].sum()
    parent = g_sum * g_sum / (h_sum + reg_lambda)
    best_gain = 0.0
    best = None
    for j in range(X.shape[1]):
        col = X[rows, j]
        order = np.argsort(col, kind="stable")
        vals = col[order]
        if vals[0] == vals[-1]:
            continue
        cum_g = np.cumsum(g[rows][order])
        cum_h = np.cumsum(h[rows][order])
        edges = np.flatnonzero(vals[:-1] < vals[1:])
        gl, hl = cum_g[edges], cum_h[edges]
        gr, hr = g_sum - gl, h_sum - hl
        feasible = (hl >= min_child_weight) & (hr >= min_child_weight)
        if not feasible.any():
            continue
        gains = 0.5 * (gl**2 / (hl + reg_lambda) + gr**2 / (hr + reg_lambda) - parent)
        gains[~feasible] = -np.inf
        i = int(np.argmax(gains))  # first max: lowest threshold wins ties
        if gains[i] > best_gain:   # strict: lowest feature index wins ties
            best_gain = float(gains[i])
            threshold = 0.5 * (vals[edges[i]] + vals[edges[i] + 1])
            best = (best_gain, j, threshold)
    return best


def grow_boosted_tree(
    X: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    max_depth: int,
    reg_lambda: float,
    min_child_weight: float,
) -> DecisionTree:
    """Fit one regression tree to gradient/hessian targets.

    Leaf value is the regularized Newton step -G/(H + lambda); split gain
    is the standard second-order improvement with an L2 leaf penalty.
    """
    buf = _TreeBuffer()

    def build(rows: np.ndarray, depth: int) -> int:
        node = buf.add()
        buf.cover[node] = float(h[rows].sum())
        split = None
        if depth < max_depth and rows.size >= 2:
            split = _best_split_logistic(X, rows, g, h, reg_lambda, min_child_weight)
        if split is None:
            buf.value[node] = float(-g[rows].sum() / (h[rows].sum() + reg_lambda))
            return node
        gain, feat, threshold = split
        mask = X[rows, feat] < threshold
        buf.feature[node] = feat
        buf.threshold[node] = threshold
        buf.gain[node] = gain
        buf.left[node] = build(rows[mask], depth + 1)
        buf.right[node] = build(rows[~mask], depth + 1)
        return node

    build(np.arange(X.shape[0]), 0)
    return buf.freeze()


def _best_split_gini(X, rows, y, candidates, min_samples_leaf):
    """Weighted Gini-impurity decrease over a candidate feature subset."""
    n = rows.size
    ones = float(y[rows].sum())
    parent = n - ((n - ones) ** 2 + ones**2) / n  # n * gini(parent)
    best_gain = 0.0
    best = None
    for j in candidates:
        col = X[rows, j]
        order = np.argsort(col, kind="stable")
        vals = col[order]
        if vals[0] == vals[-1]:
            continue
        cum_ones = np.cumsum(y[rows][order].astype(np.float64))
        edges = np.flatnonzero(vals[:-1] < vals[1:])
        nl = edges + 1.0
        nr = n - nl
        feasible = (nl >= min_samples_leaf) & (nr >= min_samples_leaf)
        if not feasible.any():
            continue
        ones_l = cum_ones[edges]
        ones_r = ones - ones_l
        child = (
            nl - ((nl - ones_l) ** 2 + ones_l**2) / nl
            + nr - ((nr - ones_r) ** 2 + ones_r**2) / nr
        )
        gains = parent - child
        gains[~feasible] = -np.inf
        i = int(np.argmax(gains))
        if gains[i] > best_gain:
            best_gain = float(gains[i])
            threshold = 0.5 * (vals[edges[i]] + vals[edges[i] + 1])
            best = (best_gain, int(j), threshold)
    return best


def grow_classification_tree(
    X: np.ndarray,
    y: np.ndarray,
    rng: np.random.Generator,
    n_candidates: int,
    min_samples_leaf: int,
    max_depth: int = 0,
) -> DecisionTree:
    """Fit one Gini tree; leaves store the class-1 fraction.

    Each split draws its own candidate feature subset from ``rng``; the
    recursion is left-first so the draw sequence, and hence the tree, is a
    pure function of the generator state. ``max_depth`` 0 means unlimited.
    """
    p = X.shape[1]
    buf = _TreeBuffer()

    def build(rows: np.ndarray, depth: int) -> int:
        node = buf.add()
        n = rows.size
        ones = int(y[rows].sum())
        buf.cover[node] = float(n)
        pure = ones == 0 or ones == n
        depth_ok = max_depth <= 0 or depth < max_depth
        split = None
        if not pure and depth_ok and n >= 2 * min_samples_leaf:
            candidates = np.sort(rng.choice(p, size=min(n_candidates, p), replace=False))
            split = _best_split_gini(X, rows, y, candidates, min_samples_leaf)
        if split is None:
            buf.value[node] = ones / n
            return node
        gain, feat, threshold = split
        mask = X[rows, feat] < threshold
        buf.feature[node] = feat
        buf.threshold[node] = threshold
        buf.gain[node] = gain
        buf.left[node] = build(rows[mask], depth + 1)
        buf.right[node] = build(rows[~mask], depth + 1)
        return node

    build(np.arange(X.shape[0]), 0)
    return buf.freeze()
