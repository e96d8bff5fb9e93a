"""Stage orchestration for the CLI: ingest through RFE, plus the full run.

Every stage reads its predecessor's artifacts from the output directory,
appends its counts to the shared run report, and persists plot data (and
optional figures) as it goes. Stage seeds all derive from the single
master seed, so a rerun with the same config reproduces every artifact
hash; a stage failure raises before any later stage writes.
"""

from __future__ import annotations

import glob
import os
from pathlib import Path

import numpy as np

from . import artifacts, ciciot, figures, kvdoc
from .balance import BalancePlan, SmoteParams, apply_plan, binarize
from .config import MODE_LEAKAGE_SAFE, PipelineConfig
from .dataset import (
    LEVEL_CLASS,
    FeatureMatrix,
    LabelVector,
    RawTable,
    clean,
    drop_zero_variance,
    encode_labels,
    fit_standardizer,
    load_csv,
    split,
    standardize,
)
from .errors import EmptyInputError, ExpliaError, SelectionError
from .explain import explain_instances, force_breakdown, shap_global
from .gbt import GbtParams, train_gbt
from .knn import train_knn
from .lime import lime_explain
from .models import (
    deserialize,
    evaluate,
    importance_gain,
    importance_permutation,
    serialize,
)
from .consistency import agreement_report, aggregate_lime_weights
from .report import RunReport, StageTimer
from .rfe import RfeConfig, drop_zero_importance, rfe_run, xai_guided_seed
from .rf import RfParams, train_rf
from .seeding import child_seed, rng_for

CLEANED_CSV = "cleaned.csv"
CLEANED_SIDECAR = "cleaned.sidecar.kv"
BALANCED_CSV = "balanced.csv"
BALANCED_SIDECAR = "balanced.sidecar.kv"
MODEL_FILES = {"gbt": "model_gbt.txt", "rf": "model_rf.txt", "knn": "model_knn.txt"}
SELECTED_MODEL = "model_selected.txt"
RFE_MODEL = "model_rfe.txt"


def _out(config: PipelineConfig) -> Path:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _gbt_params(config: PipelineConfig) -> GbtParams:
    return GbtParams(
        n_trees=config.gbt_trees,
        max_depth=config.gbt_depth,
        learning_rate=config.gbt_learning_rate,
        reg_lambda=config.gbt_lambda,
        min_child_weight=config.gbt_min_child_weight,
        seed=child_seed(config.seed, "train", "gbt"),
    )


def _rf_params(config: PipelineConfig) -> RfParams:
    return RfParams(
        n_trees=config.rf_trees,
        min_samples_leaf=config.rf_min_samples_leaf,
        max_depth=config.rf_max_depth,
        seed=child_seed(config.seed, "train", "rf"),
    )


def cmd_ingest(config: PipelineConfig, report: RunReport) -> dict:
    """Load shards, clean, standardize, drop zero-variance columns, persist."""
    out = _out(config)
    data_dir = config.resolved_data_dir()
    if not data_dir:
        raise EmptyInputError(
            "no data directory: set data.dir in the config or EXPLIA_DATA_DIR"
        )
    paths = sorted(glob.glob(os.path.join(data_dir, "*.csv")))
    if not paths:
        raise EmptyInputError(f"no CSV files found in {data_dir}")
    if config.max_files and config.max_files < len(paths):
        rng = rng_for(config.seed, "file-sample")
        chosen = rng.choice(len(paths), size=config.max_files, replace=False)
        paths = [paths[i] for i in sorted(chosen)]

    schema = ciciot.raw_schema()
    taxonomy = ciciot.taxonomy()
    with StageTimer(report, "ingest"):
        tables = [load_csv(path, schema, taxonomy) for path in paths]
        merged = RawTable(
            values=np.vstack([t.values for t in tables]),
            labels=tuple(lab for t in tables for lab in t.labels),
            schema=schema,
        )
        cleaned, counts = clean(merged)
        # encoding validates every label against the taxonomy; the artifact
        # keeps the raw subcategory strings so later stages pick their level
        matrix, _ = encode_labels(cleaned, taxonomy, LEVEL_CLASS)
        stats = fit_standardizer(matrix)
        matrix = standardize(matrix, stats)
        matrix, kept = drop_zero_variance(matrix, stats)
        artifacts.save_dataset_csv(out / CLEANED_CSV, matrix, list(cleaned.labels))
        artifacts.save_sidecar(
            out / CLEANED_SIDECAR,
            schema=matrix.schema,
            scaler=stats,
            seed=config.seed,
            entries={
                "ingest.files": len(paths),
                "ingest.rows_raw": merged.n_rows,
                "ingest.rows_clean": cleaned.n_rows,
                "ingest.dropped_nonfinite": counts.dropped_nonfinite,
                "ingest.dropped_duplicate": counts.dropped_duplicate,
                "ingest.columns_raw": schema.width,
                "ingest.columns_kept": matrix.n_features,
                "ingest.kept_indices": ",".join(str(i) for i in kept),
            },
        )
    report.extend({
        "ingest.files": len(paths),
        "ingest.rows_raw": merged.n_rows,
        "ingest.rows_clean": cleaned.n_rows,
        "ingest.dropped_nonfinite": counts.dropped_nonfinite,
        "ingest.dropped_duplicate": counts.dropped_duplicate,
        "ingest.columns_raw": schema.width,
        "ingest.columns_kept": matrix.n_features,
    })
    return {"rows": cleaned.n_rows, "columns": matrix.n_features}


def _load_cleaned(out: Path):
    loaded = artifacts.load_dataset_csv(out / CLEANED_CSV)
    return loaded["matrix"], loaded["labels"]


def cmd_balance(config: PipelineConfig, report: RunReport) -> dict:
    """Apply the balance plan (faithful: whole set; leakage-safe: train side only)."""
    out = _out(config)
    matrix, label_names = _load_cleaned(out)
    taxonomy = ciciot.taxonomy()
    plan = BalancePlan(
        target_count=config.balance_plan_targets(), group_level=config.balance_level
    )
    level_names = sorted(set(
        taxonomy.class_of[s] if config.balance_level == LEVEL_CLASS else s
        for s in taxonomy.class_of
    ))
    code_of = {name: i for i, name in enumerate(level_names)}
    if config.balance_level == LEVEL_CLASS:
        codes = np.array([code_of[taxonomy.class_of[s]] for s in label_names])
    else:
        codes = np.array([code_of[s] for s in label_names])
    labels = LabelVector(
        values=codes, level=config.balance_level,
        mapping={i: n for n, i in code_of.items()},
    )
    params = SmoteParams(k=config.smote_k, seed=child_seed(config.seed, "balance"))

    with StageTimer(report, "balance"):
        before = {name: int((codes == code_of[name]).sum()) for name in level_names}
        if config.mode == MODE_LEAKAGE_SAFE:
            fold = split(matrix, labels, config.split_ratio,
                         child_seed(config.seed, "presplit"), stratify=True)
            scaled = {
                g: max(2, int(round(t * config.split_ratio)))
                for g, t in plan.target_count.items()
            }
            balanced = apply_plan(fold.train[0], fold.train[1],
                                  BalancePlan(scaled, plan.group_level), params)
            test_matrix, test_labels = fold.test
            full = FeatureMatrix(
                values=np.vstack([balanced.matrix.values, test_matrix.values]),
                schema=matrix.schema, standardized=matrix.standardized,
            )
            all_codes = np.concatenate([balanced.labels.values, test_labels.values])
            synthetic = np.concatenate(
                [balanced.synthetic, np.zeros(test_matrix.n_rows, bool)]
            )
            split_tags = ["train"] * balanced.matrix.n_rows + ["test"] * test_matrix.n_rows
            out_labels = LabelVector(values=all_codes, level=labels.level,
                                     mapping=dict(labels.mapping))
        else:
            balanced = apply_plan(matrix, labels, plan, params)
            full = balanced.matrix
            out_labels = balanced.labels
            synthetic = balanced.synthetic
            split_tags = None
        binary = binarize(out_labels, taxonomy)
        after = {
            name: int((out_labels.values == code_of[name]).sum()) for name in level_names
        }
        names_out = [out_labels.name_of(c) for c in out_labels.values]
        artifacts.save_dataset_csv(
            out / BALANCED_CSV, full, names_out,
            binary=binary.values, synthetic=synthetic, split_tags=split_tags,
        )
        artifacts.save_sidecar(
            out / BALANCED_SIDECAR, schema=full.schema, seed=config.seed,
            entries={
                "balance.mode": config.mode,
                "balance.synthetic_rows": int(synthetic.sum()),
                "balance.rows": full.n_rows,
            },
        )
        rows = [
            (name, before[name], after[name]) for name in level_names
        ]
        artifacts.write_plot_data(out / "class_counts.csv",
                                  ["group", "before", "after"], rows)
        if config.figures:
            figures.render_class_counts(
                out / "class_counts.png",
                [r[0] for r in rows], [r[1] for r in rows], [r[2] for r in rows],
            )
    report.extend({
        "balance.rows": full.n_rows,
        "balance.synthetic_rows": int(synthetic.sum()),
        "balance.binary_benign": int((binary.values == 0).sum()),
        "balance.binary_attack": int((binary.values == 1).sum()),
    })
    for name in level_names:
        report.add(f"balance.count.{name}", after[name])
    return {"rows": full.n_rows, "synthetic": int(synthetic.sum())}


def _load_balanced_split(config: PipelineConfig, out: Path):
    """Materialize the train/test split from the balanced artifact."""
    loaded = artifacts.load_dataset_csv(out / BALANCED_CSV)
    matrix = loaded["matrix"]
    binary = LabelVector(values=loaded["binary"], level="binary",
                         mapping={0: "Benign", 1: "Attack"})
    if loaded.get("split") is not None:
        tags = np.array(loaded["split"])
        train_idx = np.flatnonzero(tags == "train")
        test_idx = np.flatnonzero(tags == "test")
        return (
            matrix.take_rows(train_idx), binary.take(train_idx),
            matrix.take_rows(test_idx), binary.take(test_idx),
        )
    fold = split(matrix, binary, config.split_ratio,
                 child_seed(config.seed, "split"), stratify=True)
    return fold.train[0], fold.train[1], fold.test[0], fold.test[1]


def _train_one(kind: str, config: PipelineConfig, X, y):
    if kind == "gbt":
        return train_gbt(X, y, _gbt_params(config))
    if kind == "rf":
        return train_rf(X, y, _rf_params(config), workers=config.workers)
    return train_knn(X, y, k=config.knn_k)


def cmd_train(config: PipelineConfig, report: RunReport) -> dict:
    """Train the requested model(s); multiple models emit a comparison and
    mark the accuracy argmax selected (ties resolve GBT > RF > KNN)."""
    out = _out(config)
    X_train, y_train, X_test, y_test = _load_balanced_split(config, out)
    kinds = ["gbt", "rf", "knn"] if config.model == "all" else [config.model]

    results = {}
    with StageTimer(report, "train"):
        for kind in kinds:
            model = _train_one(kind, config, X_train, y_train)
            metrics = evaluate(model, X_test, y_test)
            (out / MODEL_FILES[kind]).write_text(serialize(model), encoding="utf-8")
            results[kind] = (model, metrics)
            report.extend(metrics.as_entries(prefix=f"train.{kind}."))

            if kind in ("gbt", "rf"):
                imp = importance_gain(model)
            else:
                rng = rng_for(config.seed, "perm-imp-eval")
                take = min(config.importance_rows, X_test.n_rows)
                rows = rng.choice(X_test.n_rows, size=take, replace=False)
                imp = importance_permutation(
                    model, X_test.take_rows(rows), y_test.take(rows),
                    repeats=config.importance_repeats,
                    seed=child_seed(config.seed, "perm-imp", kind),
                )
            order = imp.ranking()
            artifacts.write_plot_data(
                out / f"importance_{kind}.csv",
                ["rank", "feature_index", "feature", "score", "method"],
                [
                    (r, int(j), model.schema.names[j], float(imp.scores[j]), imp.method)
                    for r, j in enumerate(order)
                ],
            )
            if config.figures:
                figures.render_importance(
                    out / f"importance_{kind}.png",
                    list(model.schema.names), imp.scores,
                    f"{kind.upper()} feature importance ({imp.method})",
                )

        # selection: highest accuracy, ties in gbt > rf > knn order
        selected_kind = max(
            results, key=lambda k: (results[k][1].accuracy, -kinds.index(k))
        )
        (out / SELECTED_MODEL).write_text(
            serialize(results[selected_kind][0]), encoding="utf-8"
        )
        if len(kinds) > 1:
            comparison = sorted(
                ((k, results[k][1].accuracy) for k in kinds),
                key=lambda item: -item[1],
            )
            artifacts.write_plot_data(
                out / "model_comparison.csv", ["model", "accuracy"], comparison
            )
            if config.figures:
                figures.render_model_comparison(
                    out / "model_comparison.png",
                    [c[0] for c in comparison], [c[1] for c in comparison],
                    "Model accuracy comparison",
                )
            for kind, acc in comparison:
                report.add(f"train.comparison.{kind}", acc)
    report.add("train.selected", selected_kind)
    return {"selected": selected_kind,
            "accuracy": {k: results[k][1].accuracy for k in kinds}}


def cmd_evaluate(config: PipelineConfig, report: RunReport) -> dict:
    """Re-evaluate the selected model artifact on the held-out test side."""
    out = _out(config)
    model = deserialize((out / SELECTED_MODEL).read_text(encoding="utf-8"))
    _, _, X_test, y_test = _load_balanced_split(config, out)
    with StageTimer(report, "evaluate"):
        metrics = evaluate(model, X_test, y_test)
    report.extend(metrics.as_entries(prefix="evaluate."))
    return {"accuracy": metrics.accuracy}


def _resolve_samples(config: PipelineConfig, model, X_test) -> list[int]:
    indices = config.explain_sample_indices()
    if indices is None:
        predicted = model.predict(X_test)
        benign = np.flatnonzero(predicted == 0)
        attack = np.flatnonzero(predicted == 1)
        indices = []
        if benign.size:
            indices.append(int(benign[0]))
        if attack.size:
            indices.append(int(attack[0]))
        return indices
    for i in indices:
        if i < 0 or i >= X_test.n_rows:
            raise SelectionError(
                f"sample index {i} outside the {X_test.n_rows}-row test set"
            )
    return indices


def cmd_explain(config: PipelineConfig, report: RunReport) -> dict:
    """Global SHAP summary plus per-sample SHAP force and LIME artifacts."""
    out = _out(config)
    model = deserialize((out / SELECTED_MODEL).read_text(encoding="utf-8"))
    X_train, _, X_test, _ = _load_balanced_split(config, out)

    rng = rng_for(config.seed, "background")
    bg_rows = rng.choice(
        X_train.n_rows, size=min(config.shap_background_rows, X_train.n_rows),
        replace=False,
    )
    background = X_train.values[np.sort(bg_rows)]
    names = list(model.schema.names)

    with StageTimer(report, "explain"):
        eval_rng = rng_for(config.seed, "shap-global")
        take = min(config.shap_global_rows, X_test.n_rows)
        eval_rows = np.sort(eval_rng.choice(X_test.n_rows, size=take, replace=False))
        summary = shap_global(
            model, X_test.values[eval_rows], background,
            floor=config.shap_significance_floor,
            sampling_permutations=config.shap_sampling_permutations,
            seed=child_seed(config.seed, "shap-global"),
        )
        artifacts.write_plot_data(
            out / "shap_global.csv",
            ["rank", "feature_index", "feature", "mean_abs_phi",
             "mean_abs_phi_class0", "mean_abs_phi_class1", "significant"],
            [
                (r, int(j), names[j], float(summary.mean_abs[j]),
                 float(summary.mean_abs_class0[j]), float(summary.mean_abs_class1[j]),
                 int(j in set(summary.significant.tolist())))
                for r, j in enumerate(summary.ranking)
            ],
        )
        if config.figures:
            figures.render_shap_summary(
                out / "shap_global.png", names,
                summary.mean_abs_class0, summary.mean_abs_class1,
                "Global SHAP summary (mean |phi| by predicted class)",
            )
        report.add("explain.global_rows", summary.n_rows)
        report.add("explain.significant_features", int(summary.significant.size))
        report.add("explain.top5", ",".join(summary.top(5)))

        samples = _resolve_samples(config, model, X_test)
        report.add("explain.samples", ",".join(str(s) for s in samples))
        scales = np.ones(model.schema.width)
        for ordinal, row in enumerate(samples, start=1):
            x = X_test.values[row]
            sv = explain_instances(
                model, x[None, :], background,
                sampling_permutations=config.shap_sampling_permutations,
                seed=child_seed(config.seed, "explain", row),
            )[0]
            force = force_breakdown(sv)
            artifacts.write_plot_data(
                out / f"force_sample{ordinal}.csv",
                ["position", "feature_index", "feature", "phi", "cumulative"],
                [
                    (k, int(j), names[j], float(force.phi[k]),
                     float(force.trajectory[k + 1]))
                    for k, j in enumerate(force.feature_indices)
                ],
            )
            lime = lime_explain(
                model.predict_proba, x, feature_scales=scales,
                n_samples=config.lime_samples,
                kernel_width=config.lime_kernel_width,
                top_k=config.lime_top_k, ridge=config.lime_ridge,
                seed=child_seed(config.seed, "lime", row),
                feature_names=model.schema.names,
            )
            artifacts.write_plot_data(
                out / f"lime_sample{ordinal}.csv",
                ["rank", "feature_index", "feature", "weight", "intercept",
                 "model_proba", "surrogate_at_x"],
                [
                    (r, int(j), names[j], float(w), lime.intercept,
                     lime.predicted_proba, lime.surrogate_at_x)
                    for r, (j, w) in enumerate(zip(lime.feature_indices, lime.weights))
                ],
            )
            if config.figures:
                figures.render_force(
                    out / f"force_sample{ordinal}.png",
                    [names[j] for j in force.feature_indices],
                    force.phi, force.trajectory, force.base_value,
                    f"Sample {ordinal} force breakdown ({force.output_space})",
                )
                figures.render_lime(
                    out / f"lime_sample{ordinal}.png",
                    [names[j] for j in lime.feature_indices], lime.weights,
                    f"Sample {ordinal} LIME weights",
                )
            report.add(f"explain.sample{ordinal}.row", row)
            report.add(f"explain.sample{ordinal}.shap_class", sv.implied_class())
            report.add(f"explain.sample{ordinal}.base_value", sv.base_value)
            if sv.probability_base is not None:
                report.add(
                    f"explain.sample{ordinal}.probability_base",
                    round(sv.probability_base, 6),
                )
    return {"samples": samples, "significant": int(summary.significant.size)}


def cmd_agree(config: PipelineConfig, report: RunReport) -> dict:
    """SHAP vs LIME cross-validation over a seeded test sample."""
    out = _out(config)
    model = deserialize((out / SELECTED_MODEL).read_text(encoding="utf-8"))
    X_train, y_train, X_test, y_test = _load_balanced_split(config, out)
    rng = rng_for(config.seed, "agree")
    take = min(config.agree_rows, X_test.n_rows)
    rows = np.sort(rng.choice(X_test.n_rows, size=take, replace=False))
    bg_rows = rng.choice(
        X_train.n_rows, size=min(config.shap_background_rows, X_train.n_rows),
        replace=False,
    )
    with StageTimer(report, "agree"):
        agreement = agreement_report(
            model, X_test.values[rows], X_train.values[np.sort(bg_rows)],
            k=config.agree_top_k,
            lime_samples=config.lime_samples,
            lime_kernel_width=config.lime_kernel_width,
            lime_top_k=config.lime_top_k,
            lime_ridge=config.lime_ridge,
            sampling_permutations=config.shap_sampling_permutations,
            seed=child_seed(config.seed, "agree"),
            importance_eval=(X_test, y_test),
        )
        kvdoc.dump(agreement.entries, out / "agreement.kv")
    report.extend(agreement.entries)
    return {
        "shap_model_rate": agreement.shap_model_rate,
        "shap_lime_rate": agreement.shap_lime_rate,
    }


def cmd_rfe(config: PipelineConfig, report: RunReport) -> dict:
    """XAI-guided recursive feature elimination on the selected model kind."""
    out = _out(config)
    X_train, y_train, X_test, y_test = _load_balanced_split(config, out)
    baseline_model = deserialize((out / SELECTED_MODEL).read_text(encoding="utf-8"))
    kind = baseline_model.kind
    names = list(X_train.schema.names)

    with StageTimer(report, "rfe"):
        baseline_metrics = evaluate(baseline_model, X_test, y_test)

        rng = rng_for(config.seed, "rfe-xai")
        bg = X_train.values[
            rng.choice(X_train.n_rows,
                       size=min(config.shap_background_rows, X_train.n_rows),
                       replace=False)
        ]
        ev = X_train.values[
            rng.choice(X_train.n_rows, size=min(100, X_train.n_rows), replace=False)
        ]
        summary = shap_global(
            model=baseline_model, X_eval=ev, background=bg,
            sampling_permutations=config.shap_sampling_permutations,
            seed=child_seed(config.seed, "rfe-shap"),
        )
        limes = [
            lime_explain(
                baseline_model.predict_proba, ev[i],
                n_samples=min(config.lime_samples, 2000),
                kernel_width=config.lime_kernel_width,
                top_k=config.lime_top_k, ridge=config.lime_ridge,
                seed=child_seed(config.seed, "rfe-lime", i),
            )
            for i in range(min(12, ev.shape[0]))
        ]
        lime_agg = aggregate_lime_weights(limes, X_train.n_features)
        if kind in ("gbt", "rf"):
            gain = importance_gain(baseline_model)
            nonzero = drop_zero_importance(baseline_model, X_train.schema)
        else:
            gain = importance_permutation(
                baseline_model, X_test, y_test,
                repeats=config.importance_repeats,
                seed=child_seed(config.seed, "rfe-perm"),
            )
            nonzero = np.arange(X_train.n_features)
        seed_set = xai_guided_seed(summary, lime_agg, gain, m=config.rfe_seed_top_m)
        start = sorted(set(int(i) for i in seed_set) & set(int(i) for i in nonzero))
        report.add("rfe.seed_features", len(start))

        def train_fn(values, labels):
            return _train_one(kind, config, values, labels)

        rfe_config = RfeConfig(
            min_features=config.rfe_min_features,
            tolerance=config.rfe_tolerance,
            batch_drop_zero=config.rfe_batch_drop_zero,
            importance_source=config.rfe_importance,
            val_ratio=config.rfe_val_ratio,
            seed_top_m=config.rfe_seed_top_m,
        )
        scoring_set = (X_test, y_test) if config.rfe_scoring == "test" else None
        trace, _ = rfe_run(
            train_fn, X_train, y_train,
            split_seed=child_seed(config.seed, "rfe-split"),
            config=rfe_config, scoring_set=scoring_set, start_features=start,
        )
        best = list(trace.best_features)
        final_model = _train_one(
            kind, config, X_train.take_columns(best), y_train
        )
        final_metrics = evaluate(final_model, X_test.take_columns(best), y_test)
        (out / RFE_MODEL).write_text(serialize(final_model), encoding="utf-8")

        artifacts.write_plot_data(
            out / "rfe_trace.csv",
            ["iteration", "n_features", "removed", "score", "accepted"],
            [
                (i, len(it.features), "|".join(names[j] for j in it.removed),
                 it.score, int(it.accepted))
                for i, it in enumerate(trace.iterations)
            ],
        )
        if config.figures:
            figures.render_rfe_trace(
                out / "rfe_trace.png",
                [len(it.features) for it in trace.iterations],
                [it.score for it in trace.iterations],
                [it.accepted for it in trace.iterations],
                "Recursive feature elimination trace",
            )
        kvdoc.dump(
            {
                "rfe.best_score": trace.best_score,
                "rfe.n_features": len(best),
                "rfe.features": ",".join(str(i) for i in best),
                "rfe.feature_names": "|".join(names[i] for i in best),
                "rfe.split_seed": trace.split_seed,
            },
            out / "feature_set.kv",
        )
    report.extend({
        "rfe.baseline_accuracy": baseline_metrics.accuracy,
        "rfe.final_accuracy": final_metrics.accuracy,
        "rfe.best_validation_score": trace.best_score,
        "rfe.iterations": len(trace.iterations),
        "rfe.final_features": len(best),
    })
    return {
        "baseline": baseline_metrics.accuracy,
        "final": final_metrics.accuracy,
        "features": len(best),
    }


def cmd_pipeline(config: PipelineConfig, report: RunReport) -> dict:
    """All stages in order; one report; artifact manifest at the end."""
    out = _out(config)
    for key, value in config.as_entries().items():
        report.add(f"config.{key}", value)
    results = {
        "ingest": cmd_ingest(config, report),
        "balance": cmd_balance(config, report),
        "train": cmd_train(config, report),
        "evaluate": cmd_evaluate(config, report),
        "explain": cmd_explain(config, report),
        "agree": cmd_agree(config, report),
        "rfe": cmd_rfe(config, report),
    }
    report.write(out / "report.kv")
    artifacts.write_manifest(out)
    return results
