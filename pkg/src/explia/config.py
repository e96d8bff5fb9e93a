"""Pipeline configuration: a flat key = value file with strict keys.

Every key has a documented default; an unknown key is an error, not a
warning, so typos cannot silently fall back to defaults. Values live as
typed fields on PipelineConfig; the raw text form is archivable and
diff-able next to the run report.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields

from . import kvdoc
from .errors import ConfigError

MODE_FAITHFUL = "faithful"
MODE_LEAKAGE_SAFE = "leakage-safe"

DATA_DIR_ENV = "EXPLIA_DATA_DIR"

DEFAULT_BALANCE_TARGETS = (
    "Benign:2100,DDoS:300,DoS:300,Mirai:300,Spoofing:300,Recon:300,Web:300,Bruteforce:300"
)


@dataclass
class PipelineConfig:
    # data / io
    data_dir: str = ""          # falls back to $EXPLIA_DATA_DIR
    out_dir: str = "explia-out"
    max_files: int = 0          # 0 = use every CSV; otherwise a seeded choice
    seed: int = 20230           # master seed; every stage derives children
    workers: int = 1
    figures: bool = True        # render a PNG next to each plot-data CSV
    # balance
    balance_targets: str = DEFAULT_BALANCE_TARGETS
    balance_level: str = "class"
    smote_k: int = 0            # 0 = auto (5, clamped to group size - 1)
    mode: str = MODE_FAITHFUL   # faithful: balance then split; leakage-safe: split first
    # split
    split_ratio: float = 0.8
    # models
    model: str = "all"          # all | gbt | rf | knn
    gbt_trees: int = 100
    gbt_depth: int = 6
    gbt_learning_rate: float = 0.3
    gbt_lambda: float = 1.0
    gbt_min_child_weight: float = 1.0
    rf_trees: int = 100
    rf_min_samples_leaf: int = 1
    rf_max_depth: int = 0       # 0 = unlimited
    knn_k: int = 5
    importance_repeats: int = 3
    importance_rows: int = 300  # eval subsample for permutation importance
    # explain
    shap_background_rows: int = 100
    shap_global_rows: int = 150
    shap_significance_floor: float = 0.001
    shap_sampling_permutations: int = 200
    lime_samples: int = 5000
    lime_kernel_width: float = 0.0  # 0 = 0.75 * sqrt(p)
    lime_top_k: int = 10
    lime_ridge: float = 1.0
    explain_samples: str = "auto"   # auto | comma-separated test row indices | empty
    # agreement
    agree_rows: int = 50
    agree_top_k: int = 5
    # rfe
    rfe_min_features: int = 5
    rfe_tolerance: float = 0.0
    rfe_batch_drop_zero: bool = True
    rfe_importance: str = "gain"    # gain | permutation | shap_global
    rfe_val_ratio: float = 0.25
    rfe_seed_top_m: int = 20
    rfe_scoring: str = "validation"  # validation | test (paper-faithful)

    def resolved_data_dir(self) -> str:
        return self.data_dir or os.environ.get(DATA_DIR_ENV, "")

    def balance_plan_targets(self) -> dict[str, int]:
        targets: dict[str, int] = {}
        for item in self.balance_targets.split(","):
            item = item.strip()
            if not item:
                continue
            if ":" not in item:
                raise ConfigError(f"balance.targets entry {item!r} is not 'Group:count'")
            name, _, count = item.partition(":")
            try:
                targets[name.strip()] = int(count)
            except ValueError as exc:
                raise ConfigError(f"balance.targets count {count!r} is not an integer") from exc
        if not targets:
            raise ConfigError("balance.targets is empty")
        return targets

    def explain_sample_indices(self) -> list[int] | None:
        """None means auto-select; empty list means global summary only."""
        text = self.explain_samples.strip()
        if text == "auto":
            return None
        if not text:
            return []
        try:
            return [int(part) for part in text.split(",") if part.strip()]
        except ValueError as exc:
            raise ConfigError(f"explain.samples {text!r} is not an index list") from exc

    def as_entries(self) -> dict[str, object]:
        return {KEY_OF_FIELD[f.name]: getattr(self, f.name) for f in fields(self)}


# config-file key <-> dataclass field
KEY_OF_FIELD: dict[str, str] = {
    "data_dir": "data.dir",
    "out_dir": "out.dir",
    "max_files": "data.max_files",
    "seed": "seed",
    "workers": "workers",
    "figures": "figures",
    "balance_targets": "balance.targets",
    "balance_level": "balance.level",
    "smote_k": "smote.k",
    "mode": "mode",
    "split_ratio": "split.ratio",
    "model": "model",
    "gbt_trees": "gbt.trees",
    "gbt_depth": "gbt.depth",
    "gbt_learning_rate": "gbt.learning_rate",
    "gbt_lambda": "gbt.lambda",
    "gbt_min_child_weight": "gbt.min_child_weight",
    "rf_trees": "rf.trees",
    "rf_min_samples_leaf": "rf.min_samples_leaf",
    "rf_max_depth": "rf.max_depth",
    "knn_k": "knn.k",
    "importance_repeats": "importance.repeats",
    "importance_rows": "importance.rows",
    "shap_background_rows": "shap.background_rows",
    "shap_global_rows": "shap.global_rows",
    "shap_significance_floor": "shap.significance_floor",
    "shap_sampling_permutations": "shap.sampling_permutations",
    "lime_samples": "lime.samples",
    "lime_kernel_width": "lime.kernel_width",
    "lime_top_k": "lime.top_k",
    "lime_ridge": "lime.ridge",
    "explain_samples": "explain.samples",
    "agree_rows": "agree.rows",
    "agree_top_k": "agree.top_k",
    "rfe_min_features": "rfe.min_features",
    "rfe_tolerance": "rfe.tolerance",
    "rfe_batch_drop_zero": "rfe.batch_drop_zero",
    "rfe_importance": "rfe.importance",
    "rfe_val_ratio": "rfe.val_ratio",
    "rfe_seed_top_m": "rfe.seed_top_m",
    "rfe_scoring": "rfe.scoring",
}
FIELD_OF_KEY = {key: name for name, key in KEY_OF_FIELD.items()}

_CHOICES = {
    "mode": (MODE_FAITHFUL, MODE_LEAKAGE_SAFE),
    "model": ("all", "gbt", "rf", "knn"),
    "balance_level": ("class", "subcategory"),
    "rfe_importance": ("gain", "permutation", "shap_global"),
    "rfe_scoring": ("validation", "test"),
}


def _coerce(field_name: str, raw: str, kind: type) -> object:
    try:
        if kind is bool:
            lowered = raw.strip().lower()
            if lowered in ("true", "1", "yes"):
                return True
            if lowered in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(
            f"{KEY_OF_FIELD[field_name]}: cannot parse {raw!r} as {kind.__name__}"
        ) from exc


def from_entries(entries: dict[str, str]) -> PipelineConfig:
    config = PipelineConfig()
    types = {f.name: f.type for f in fields(PipelineConfig)}
    for key, raw in entries.items():
        if key not in FIELD_OF_KEY:
            raise ConfigError(f"unknown config key {key!r}")
        name = FIELD_OF_KEY[key]
        kind = {"int": int, "float": float, "str": str, "bool": bool}[types[name]]
        value = _coerce(name, raw, kind)
        if name in _CHOICES and value not in _CHOICES[name]:
            raise ConfigError(
                f"{key}: {value!r} is not one of {', '.join(_CHOICES[name])}"
            )
        setattr(config, name, value)
    return config


def load_config(path) -> PipelineConfig:
    return from_entries(kvdoc.load(path))


def dump_config(config: PipelineConfig, path) -> None:
    kvdoc.dump(config.as_entries(), path)
