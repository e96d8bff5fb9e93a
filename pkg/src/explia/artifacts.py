"""On-disk artifact formats: matrices, sidecars, plot data, manifests.

Matrices persist as headered CSV with repr-exact floats so reload is
bit-identical and file hashes are stable across runs. Every figure
analogue is a flat headered CSV (one row per plotted element) that any
external plotter can consume; the figures module optionally renders the
same data to PNG.
"""

from __future__ import annotations

import csv
import hashlib
from pathlib import Path

import numpy as np

from . import kvdoc
from .dataset import FeatureMatrix, FeatureSchema, LabelVector, ScalerStats

LABEL_COLUMN = "label"
BINARY_COLUMN = "binary"
SYNTHETIC_COLUMN = "synthetic"
SPLIT_COLUMN = "split"


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def _cell(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_plot_data(path, header: list[str], rows) -> None:
    """Headered CSV of plot-ready rows (the renderer-agnostic figure form)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(c) for c in row])


def save_dataset_csv(
    path,
    matrix: FeatureMatrix,
    labels: list[str],
    binary: np.ndarray | None = None,
    synthetic: np.ndarray | None = None,
    split_tags: list[str] | None = None,
) -> None:
    header = list(matrix.schema.names) + [LABEL_COLUMN]
    if binary is not None:
        header.append(BINARY_COLUMN)
    if synthetic is not None:
        header.append(SYNTHETIC_COLUMN)
    if split_tags is not None:
        header.append(SPLIT_COLUMN)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(matrix.n_rows):
            row = [_cell(v) for v in matrix.values[i]] + [labels[i]]
            if binary is not None:
                row.append(str(int(binary[i])))
            if synthetic is not None:
                row.append(str(int(synthetic[i])))
            if split_tags is not None:
                row.append(split_tags[i])
            writer.writerow(row)


def load_dataset_csv(path) -> dict:
    """Reload a dataset artifact; returns matrix, labels and extra columns."""
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    extras = {name for name in (LABEL_COLUMN, BINARY_COLUMN, SYNTHETIC_COLUMN, SPLIT_COLUMN) if name in header}
    feature_names = [h for h in header if h not in extras]
    index = {name: header.index(name) for name in header}
    n = len(rows)
    values = np.empty((n, len(feature_names)), dtype=np.float64)
    for i, row in enumerate(rows):
        values[i] = [float(row[index[name]]) for name in feature_names]
    out = {
        "matrix": FeatureMatrix(
            values=values, schema=FeatureSchema(names=tuple(feature_names))
        ),
        "labels": [row[index[LABEL_COLUMN]] for row in rows] if LABEL_COLUMN in extras else None,
    }
    if BINARY_COLUMN in extras:
        out["binary"] = np.array([int(row[index[BINARY_COLUMN]]) for row in rows], dtype=np.int64)
    if SYNTHETIC_COLUMN in extras:
        out["synthetic"] = np.array([int(row[index[SYNTHETIC_COLUMN]]) for row in rows], dtype=bool)
    if SPLIT_COLUMN in extras:
        out["split"] = [row[index[SPLIT_COLUMN]] for row in rows]
    return out


def save_sidecar(
    path,
    schema: FeatureSchema,
    scaler: ScalerStats | None = None,
    seed: int | None = None,
    entries: dict[str, object] | None = None,
) -> None:
    """Key-value metadata describing a dataset artifact."""
    doc: dict[str, object] = {"sidecar.version": 1}
    doc["schema.names"] = "|".join(schema.names)
    if scaler is not None:
        doc["scaler.n_rows"] = scaler.n_rows
        doc["scaler.mean"] = "|".join(repr(float(v)) for v in scaler.mean)
        doc["scaler.std"] = "|".join(repr(float(v)) for v in scaler.std)
    if seed is not None:
        doc["seed"] = seed
    for key, value in (entries or {}).items():
        doc[key] = value
    kvdoc.dump(doc, path)


def load_sidecar(path) -> dict[str, str]:
    return kvdoc.load(path)


def scaler_from_sidecar(doc: dict[str, str]) -> ScalerStats | None:
    if "scaler.mean" not in doc:
        return None
    names = tuple(doc["schema.names"].split("|"))
    return ScalerStats(
        mean=np.array([float(v) for v in doc["scaler.mean"].split("|")]),
        std=np.array([float(v) for v in doc["scaler.std"].split("|")]),
        schema=FeatureSchema(names=names),
        n_rows=int(doc["scaler.n_rows"]),
    )


def write_manifest(out_dir, exclude: tuple[str, ...] = ("report.kv", "manifest.kv")) -> Path:
    """Hash every artifact in the output directory into manifest.kv."""
    out_dir = Path(out_dir)
    entries: dict[str, object] = {}
    for path in sorted(out_dir.rglob("*")):
        if not path.is_file():
            continue
        rel = path.relative_to(out_dir).as_posix()
        if rel in exclude:
            continue
        entries[f"artifact.{rel}"] = sha256_file(path)
    manifest_path = out_dir / "manifest.kv"
    kvdoc.dump(entries, manifest_path)
    return manifest_path
