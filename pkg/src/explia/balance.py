"""Class rebalancing: SMOTE oversampling, undersampling, plan application.

The reference plan caps the benign group at 2100 rows and brings every
attack class to 300, yielding a 4200-row set. Synthetic rows are linear
interpolations x_i + lam * (x_nm - x_i) between a group member and one of
its k nearest in-group neighbors, lam uniform on [0, 1]. Base points are
visited round-robin over a seeded permutation so per-base counts differ
by at most one and reruns are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import (
    LEVEL_BINARY,
    LEVEL_CLASS,
    LEVEL_SUBCATEGORY,
    FeatureMatrix,
    LabelTaxonomy,
    LabelVector,
)
from .errors import CannotInterpolateError, ParameterError
from .seeding import child_seed

DEFAULT_SMOTE_K = 5


@dataclass(frozen=True)
class BalancePlan:
    """Desired per-group row counts at one taxonomy level."""

    target_count: dict[str, int]
    group_level: str = LEVEL_CLASS

    def __post_init__(self):
        for group, count in self.target_count.items():
            if count <= 0:
                raise ParameterError(f"target for group {group!r} must be positive")


@dataclass(frozen=True)
class SmoteParams:
    """k = 0 means auto: the classic k=5, clamped to group size - 1."""

    k: int = 0
    seed: int = 0

    def resolve_k(self, group_size: int) -> int:
        if self.k == 0:
            return min(DEFAULT_SMOTE_K, group_size - 1)
        return self.k


@dataclass(frozen=True)
class SmoteRecord:
    """Provenance of one synthetic row: base index, neighbor index, lambda."""

    base: int
    neighbor: int
    lam: float


@dataclass(frozen=True)
class SmoteResult:
    synthetic: FeatureMatrix
    records: tuple[SmoteRecord, ...]


def _nearest_neighbors(values: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k Euclidean nearest neighbors per row, self excluded.

    Distance ties resolve to the lower row index so results are
    reproducible across platforms.
    """
    n = values.shape[0]
    sq = (values**2).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (values @ values.T)
    np.fill_diagonal(d2, np.inf)
    order = np.lexsort((np.broadcast_to(np.arange(n), (n, n)), d2), axis=1)
    return order[:, :k]


def smote_oversample(
    group: FeatureMatrix, target: int, params: SmoteParams
) -> SmoteResult:
    """Generate exactly (target - group size) synthetic rows for one group."""
    n = group.n_rows
    if n < 2:
        raise CannotInterpolateError(
            f"SMOTE needs at least 2 rows to interpolate, got {n}"
        )
    if target < n:
        raise ParameterError(f"target {target} is below group size {n}; undersample instead")
    k = params.resolve_k(n)
    if k < 1:
        raise ParameterError(f"neighbor count k must be >= 1, got {k}")
    if k >= n:
        raise ParameterError(f"neighbor count k={k} must be below group size {n}")

    n_new = target - n
    values = group.values
    synthetic = np.empty((n_new, group.n_features), dtype=np.float64)
    records: list[SmoteRecord] = []
    if n_new:
        neighbors = _nearest_neighbors(values, k)
        rng = np.random.default_rng(params.seed)
        base_order = rng.permutation(n)
        for s in range(n_new):
            base = int(base_order[s % n])
            nm = int(neighbors[base, rng.integers(k)])
            lam = float(rng.uniform())
            synthetic[s] = values[base] + lam * (values[nm] - values[base])
            records.append(SmoteRecord(base=base, neighbor=nm, lam=lam))
    return SmoteResult(
        synthetic=FeatureMatrix(
            values=synthetic, schema=group.schema,
            standardized=group.standardized, scaler=group.scaler,
        ),
        records=tuple(records),
    )


def undersample(group: FeatureMatrix, target: int, seed: int) -> FeatureMatrix:
    """Seeded uniform sample without replacement; original rows only."""
    n = group.n_rows
    if target > n:
        raise ParameterError(
            f"target {target} exceeds group size {n}; route to SMOTE instead"
        )
    rng = np.random.default_rng(seed)
    keep = np.sort(rng.choice(n, size=target, replace=False))
    return group.take_rows(keep)


@dataclass(frozen=True)
class BalancedSet:
    matrix: FeatureMatrix
    labels: LabelVector
    synthetic: np.ndarray  # bool per row
    group_counts: dict[str, int] = field(default_factory=dict)


def apply_plan(
    matrix: FeatureMatrix,
    labels: LabelVector,
    plan: BalancePlan,
    params: SmoteParams,
) -> BalancedSet:
    """Bring every planned group exactly to its target count.

    Groups above target are undersampled, below target SMOTE-oversampled,
    at target untouched. Output rows are grouped in sorted group-name
    order: surviving real rows first (original order), synthetics after.
    Each group draws its own child seed from (master seed, group name) so
    per-group work can run in any order with identical results.
    """
    if labels.level != plan.group_level:
        raise ParameterError(
            f"labels are at level {labels.level!r}, plan targets level {plan.group_level!r}"
        )
    name_to_code = {name: code for code, name in labels.mapping.items()}
    blocks: list[np.ndarray] = []
    codes: list[np.ndarray] = []
    synthetic_flags: list[np.ndarray] = []
    counts: dict[str, int] = {}

    for group in sorted(plan.target_count):
        if group not in name_to_code:
            raise ParameterError(f"plan group {group!r} has no rows in the data")
        code = name_to_code[group]
        rows = np.flatnonzero(labels.values == code)
        size = rows.size
        target = plan.target_count[group]
        sub = matrix.take_rows(rows)
        if size > target:
            kept = undersample(sub, target, seed=child_seed(params.seed, "under", group))
            blocks.append(kept.values)
            synthetic_flags.append(np.zeros(target, dtype=bool))
        elif size < target:
            if size < 2:
                raise CannotInterpolateError(
                    f"group {group!r} has {size} row(s); cannot oversample"
                )
            k = params.resolve_k(size)
            if k >= size:
                raise ParameterError(
                    f"group {group!r}: neighbor count k={params.k} must be below group size {size}"
                )
            child = SmoteParams(k=k, seed=child_seed(params.seed, "smote", group))
            result = smote_oversample(sub, target, child)
            blocks.append(np.vstack([sub.values, result.synthetic.values]))
            synthetic_flags.append(
                np.concatenate([np.zeros(size, bool), np.ones(target - size, bool)])
            )
        else:
            blocks.append(sub.values)
            synthetic_flags.append(np.zeros(size, dtype=bool))
        codes.append(np.full(target, code, dtype=np.int64))
        counts[group] = target

    out_matrix = FeatureMatrix(
        values=np.vstack(blocks) if blocks else np.empty((0, matrix.n_features)),
        schema=matrix.schema,
        standardized=matrix.standardized,
        scaler=matrix.scaler,
    )
    out_labels = LabelVector(
        values=np.concatenate(codes) if codes else np.empty(0, dtype=np.int64),
        level=labels.level,
        mapping=dict(labels.mapping),
    )
    return BalancedSet(
        matrix=out_matrix,
        labels=out_labels,
        synthetic=np.concatenate(synthetic_flags) if synthetic_flags else np.zeros(0, bool),
        group_counts=counts,
    )


def binarize(labels: LabelVector, taxonomy: LabelTaxonomy) -> LabelVector:
    """Benign -> 0, everything else -> 1."""
    if labels.level == LEVEL_BINARY:
        return labels
    values = np.empty(labels.n_rows, dtype=np.int64)
    for code, name in labels.mapping.items():
        if labels.level == LEVEL_SUBCATEGORY:
            binary = taxonomy.binary_of[taxonomy.class_of[name]]
        elif labels.level == LEVEL_CLASS:
            binary = taxonomy.binary_of[name]
        else:
            raise ParameterError(f"cannot binarize labels at level {labels.level!r}")
        values[labels.values == code] = binary
    return LabelVector(values=values, level=LEVEL_BINARY, mapping={0: "Benign", 1: "Attack"})
