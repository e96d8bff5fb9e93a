"""Flow-record ingestion, cleaning, encoding, standardization and splitting.

Types are immutable after construction and safe to share read-only.
All column positions are meaningful only relative to a FeatureSchema;
every operation threads the schema through so downstream consumers can
derive the layout from the input schema plus the reported column actions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import (
    EmptyInputError,
    SchemaError,
    StratificationError,
    UnknownLabelError,
)

LABEL_COLUMN = "label"

LEVEL_SUBCATEGORY = "subcategory"
LEVEL_CLASS = "class"
LEVEL_BINARY = "binary"
LEVELS = (LEVEL_SUBCATEGORY, LEVEL_CLASS, LEVEL_BINARY)


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered, unique feature names; a value's index is relative to this."""

    names: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        if len(set(self.names)) != len(self.names):
            raise SchemaError("feature names must be unique")

    @property
    def width(self) -> int:
        return len(self.names)

    def index_of(self, name: str) -> int:
        return self.names.index(name)

    def subset(self, indices) -> "FeatureSchema":
        return FeatureSchema(names=tuple(self.names[i] for i in indices))


@dataclass(frozen=True)
class LabelTaxonomy:
    """Three-level labeling: subcategory -> class -> binary (0 benign / 1 attack)."""

    class_of: dict[str, str]
    binary_of: dict[str, int]

    @property
    def subcategory_names(self) -> tuple[str, ...]:
        return tuple(sorted(self.class_of))

    @property
    def class_names(self) -> tuple[str, ...]:
        return tuple(sorted(set(self.class_of.values())))

    def label_at_level(self, subcategory: str, level: str) -> str | int:
        cls = self.class_of[subcategory]
        if level == LEVEL_SUBCATEGORY:
            return subcategory
        if level == LEVEL_CLASS:
            return cls
        if level == LEVEL_BINARY:
            return self.binary_of[cls]
        raise ValueError(f"unknown taxonomy level {level!r}")

    def unknown_labels(self, labels) -> list[str]:
        return sorted({s for s in labels if s not in self.class_of})


@dataclass(frozen=True)
class RawTable:
    """Rows straight from file: floats with NaN missing markers, labels as strings."""

    values: np.ndarray  # (n, p) float64; may contain NaN/inf before cleaning
    labels: tuple[str, ...]
    schema: FeatureSchema

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[1] != self.schema.width:
            raise SchemaError(
                f"row width {self.values.shape} does not match schema width {self.schema.width}"
            )
        if len(self.labels) != self.values.shape[0]:
            raise SchemaError("label count does not match row count")

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class ScalerStats:
    """Per-feature mean and population (divide-by-n) standard deviation."""

    mean: np.ndarray
    std: np.ndarray
    schema: FeatureSchema
    n_rows: int

    @property
    def zero_variance(self) -> np.ndarray:
        """Boolean mask of features whose std is exactly 0."""
        return self.std == 0.0


@dataclass(frozen=True)
class FeatureMatrix:
    """Dense n x p matrix of finite values tied to one schema."""

    values: np.ndarray
    schema: FeatureSchema
    standardized: bool = False
    scaler: ScalerStats | None = None  # recorded when standardized

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[1] != self.schema.width:
            raise SchemaError(
                f"matrix shape {self.values.shape} does not match schema width {self.schema.width}"
            )

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    def take_rows(self, indices) -> "FeatureMatrix":
        return FeatureMatrix(
            values=self.values[np.asarray(indices)],
            schema=self.schema,
            standardized=self.standardized,
            scaler=self.scaler,
        )

    def take_columns(self, indices) -> "FeatureMatrix":
        idx = list(indices)
        scaler = None
        if self.scaler is not None:
            scaler = ScalerStats(
                mean=self.scaler.mean[idx],
                std=self.scaler.std[idx],
                schema=self.schema.subset(idx),
                n_rows=self.scaler.n_rows,
            )
        return FeatureMatrix(
            values=self.values[:, idx],
            schema=self.schema.subset(idx),
            standardized=self.standardized,
            scaler=scaler,
        )


@dataclass(frozen=True)
class LabelVector:
    """Integer labels at one taxonomy level, plus the code -> name mapping."""

    values: np.ndarray  # (n,) int64
    level: str
    mapping: dict[int, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.level not in LEVELS:
            raise ValueError(f"unknown taxonomy level {self.level!r}")

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    def name_of(self, code: int) -> str:
        return self.mapping.get(int(code), str(code))

    def take(self, indices) -> "LabelVector":
        return LabelVector(
            values=self.values[np.asarray(indices)], level=self.level,
            mapping=dict(self.mapping),
        )


@dataclass(frozen=True)
class DatasetSplit:
    train: tuple[FeatureMatrix, LabelVector]
    test: tuple[FeatureMatrix, LabelVector]
    seed: int
    ratio: float
    train_indices: np.ndarray = None
    test_indices: np.ndarray = None


@dataclass(frozen=True)
class CleanCounts:
    dropped_nonfinite: int
    dropped_duplicate: int


def load_csv(path, schema: FeatureSchema, taxonomy: LabelTaxonomy) -> RawTable:
    """Read one CSV shard into a RawTable.

    The header must name every schema column plus ``label``; extra columns
    are ignored. Unparseable numeric cells become NaN missing markers, not
    zeros. Rows come back in file order.
    """
    frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    frame.columns = [c.strip() for c in frame.columns]
    if LABEL_COLUMN not in frame.columns:
        raise SchemaError(f"{path}: header is missing the '{LABEL_COLUMN}' column")
    missing = [name for name in schema.names if name not in frame.columns]
    if missing:
        raise SchemaError(f"{path}: header is missing feature column '{missing[0]}'")
    if frame.shape[0] == 0:
        return RawTable(
            values=np.empty((0, schema.width), dtype=np.float64),
            labels=(), schema=schema,
        )
    columns = [
        pd.to_numeric(frame[name], errors="coerce").to_numpy(dtype=np.float64)
        for name in schema.names
    ]
    values = np.column_stack(columns)
    labels = tuple(s.strip() for s in frame[LABEL_COLUMN].tolist())
    return RawTable(values=values, labels=labels, schema=schema)


def clean(table: RawTable) -> tuple[RawTable, CleanCounts]:
    """Drop rows with any non-finite cell, then exact duplicates.

    Duplicate means exact equality on all feature cells and the label; the
    first occurrence survives and relative order is preserved.
    """
    finite = np.isfinite(table.values).all(axis=1) if table.n_rows else np.zeros(0, bool)
    dropped_nonfinite = int(table.n_rows - finite.sum())
    values = table.values[finite]
    labels = [table.labels[i] for i in np.flatnonzero(finite)]

    seen: set[bytes] = set()
    keep: list[int] = []
    for i in range(values.shape[0]):
        key = values[i].tobytes() + b"\x00" + labels[i].encode("utf-8")
        if key not in seen:
            seen.add(key)
            keep.append(i)
    dropped_duplicate = values.shape[0] - len(keep)
    cleaned = RawTable(
        values=values[keep] if keep else np.empty((0, table.schema.width)),
        labels=tuple(labels[i] for i in keep),
        schema=table.schema,
    )
    return cleaned, CleanCounts(dropped_nonfinite, dropped_duplicate)


def encode_labels(
    table: RawTable, taxonomy: LabelTaxonomy, level: str
) -> tuple[FeatureMatrix, LabelVector]:
    """Map label strings to integers at the requested taxonomy level.

    Integers are assigned in sorted label-name order at the subcategory and
    class levels, so encodings are stable across runs and machines; the
    binary level is fixed as 0 benign / 1 attack.
    """
    unknown = taxonomy.unknown_labels(table.labels)
    if unknown:
        raise UnknownLabelError(unknown)
    if table.n_rows and not np.isfinite(table.values).all():
        raise ValueError("encode_labels requires a cleaned table (non-finite cells present)")

    if level == LEVEL_BINARY:
        mapping = {0: "Benign", 1: "Attack"}
        codes = np.array(
            [taxonomy.binary_of[taxonomy.class_of[s]] for s in table.labels],
            dtype=np.int64,
        )
    else:
        if level == LEVEL_SUBCATEGORY:
            names = sorted({s for s in table.labels})
        elif level == LEVEL_CLASS:
            names = sorted({taxonomy.class_of[s] for s in table.labels})
        else:
            raise ValueError(f"unknown taxonomy level {level!r}")
        code_of = {name: i for i, name in enumerate(names)}
        mapping = {i: name for name, i in code_of.items()}
        if level == LEVEL_SUBCATEGORY:
            codes = np.array([code_of[s] for s in table.labels], dtype=np.int64)
        else:
            codes = np.array(
                [code_of[taxonomy.class_of[s]] for s in table.labels], dtype=np.int64
            )
    matrix = FeatureMatrix(values=table.values.copy(), schema=table.schema)
    return matrix, LabelVector(values=codes, level=level, mapping=mapping)


def fit_standardizer(matrix: FeatureMatrix) -> ScalerStats:
    """Per-feature mean/std over the given rows (population convention, /n).

    Constant columns get std exactly 0.0 (checked by value equality, not a
    float threshold) so the zero-variance cut is deterministic.
    """
    if matrix.n_rows == 0:
        raise EmptyInputError("cannot fit a standardizer on an empty matrix")
    values = matrix.values
    mean = values.mean(axis=0)
    std = values.std(axis=0)  # population: divide by n
    constant = (values == values[0]).all(axis=0)
    std = np.where(constant, 0.0, std)
    return ScalerStats(mean=mean, std=std, schema=matrix.schema, n_rows=matrix.n_rows)


def standardize(matrix: FeatureMatrix, stats: ScalerStats) -> FeatureMatrix:
    """(value - mean) / std per column; zero-variance columns pass through."""
    if stats.schema.names != matrix.schema.names:
        raise SchemaError("scaler stats were fitted on a different schema")
    divisor = np.where(stats.std > 0, stats.std, 1.0)
    shift = np.where(stats.std > 0, stats.mean, 0.0)
    values = (matrix.values - shift) / divisor
    return FeatureMatrix(
        values=values, schema=matrix.schema, standardized=True, scaler=stats
    )


def destandardize(matrix: FeatureMatrix, stats: ScalerStats) -> FeatureMatrix:
    """Inverse of :func:`standardize` with the same stats."""
    if stats.schema.names != matrix.schema.names:
        raise SchemaError("scaler stats were fitted on a different schema")
    divisor = np.where(stats.std > 0, stats.std, 1.0)
    shift = np.where(stats.std > 0, stats.mean, 0.0)
    return FeatureMatrix(values=matrix.values * divisor + shift, schema=matrix.schema)


def drop_zero_variance(
    matrix: FeatureMatrix, stats: ScalerStats
) -> tuple[FeatureMatrix, np.ndarray]:
    """Remove exactly the columns whose fitted std is 0; returns kept indices."""
    if stats.schema.names != matrix.schema.names:
        raise SchemaError("scaler stats were fitted on a different schema")
    kept = np.flatnonzero(~stats.zero_variance)
    return matrix.take_columns(kept), kept


def split(
    matrix: FeatureMatrix,
    labels: LabelVector,
    ratio: float,
    seed: int,
    stratify: bool = True,
) -> DatasetSplit:
    """Seeded shuffle then partition into train/test.

    With stratification each label's train share matches the global ratio
    within one row, and every stratum lands in both sides.
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"ratio must be in (0, 1), got {ratio}")
    n = matrix.n_rows
    if labels.n_rows != n:
        raise ValueError("matrix and labels are not aligned")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)

    if stratify:
        train_idx: list[np.ndarray] = []
        test_idx: list[np.ndarray] = []
        shuffled_labels = labels.values[perm]
        for code in np.unique(labels.values):
            stratum = perm[shuffled_labels == code]
            if stratum.size < 2:
                raise StratificationError(
                    f"label {labels.name_of(code)!r} has {stratum.size} row(s); "
                    "need at least 2 to stratify"
                )
            n_train = int(round(ratio * stratum.size))
            n_train = min(max(n_train, 1), stratum.size - 1)
            train_idx.append(stratum[:n_train])
            test_idx.append(stratum[n_train:])
        train_indices = np.sort(np.concatenate(train_idx))
        test_indices = np.sort(np.concatenate(test_idx))
    else:
        n_train = int(round(ratio * n))
        n_train = min(max(n_train, 1), n - 1)
        train_indices = np.sort(perm[:n_train])
        test_indices = np.sort(perm[n_train:])

    return DatasetSplit(
        train=(matrix.take_rows(train_indices), labels.take(train_indices)),
        test=(matrix.take_rows(test_indices), labels.take(test_indices)),
        seed=seed,
        ratio=ratio,
        train_indices=train_indices,
        test_indices=test_indices,
    )
