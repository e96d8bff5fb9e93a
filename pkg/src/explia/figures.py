"""Matplotlib renderings of the plot-data artifacts.

Every renderer takes the same arrays its CSV twin carries and writes one
PNG; rendering is optional (``figures`` config key) and byte-stable, so
figure files participate in the artifact manifest. Fixed metadata keeps
PNG output identical across reruns.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_SAVE_KW = dict(dpi=110, metadata={"Software": "explia"})


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def render_class_counts(path, groups, before, after) -> None:
    x = np.arange(len(groups))
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.bar(x - 0.2, before, width=0.4, label="before", color="#8da0cb")
    ax.bar(x + 0.2, after, width=0.4, label="after", color="#fc8d62")
    ax.set_xticks(x, groups, rotation=30, ha="right")
    ax.set_ylabel("rows")
    ax.set_title("Class counts before/after balancing")
    ax.legend()
    _finish(fig, path)


def render_importance(path, names, scores, title) -> None:
    order = np.argsort(scores)
    fig, ax = plt.subplots(figsize=(7, max(3, 0.22 * len(names))))
    ax.barh(np.arange(len(names)), np.asarray(scores)[order], color="#66c2a5")
    ax.set_yticks(np.arange(len(names)), [names[i] for i in order], fontsize=7)
    ax.set_xlabel("importance")
    ax.set_title(title)
    _finish(fig, path)


def render_shap_summary(path, names, mean_abs_class0, mean_abs_class1, title) -> None:
    total = np.asarray(mean_abs_class0) + np.asarray(mean_abs_class1)
    order = np.argsort(total)
    y = np.arange(len(names))
    fig, ax = plt.subplots(figsize=(7, max(3, 0.22 * len(names))))
    ax.barh(y, np.asarray(mean_abs_class0)[order], color="#8da0cb", label="benign (0)")
    ax.barh(y, np.asarray(mean_abs_class1)[order],
            left=np.asarray(mean_abs_class0)[order], color="#fc8d62", label="attack (1)")
    ax.set_yticks(y, [names[i] for i in order], fontsize=7)
    ax.set_xlabel("mean |phi|")
    ax.set_title(title)
    ax.legend()
    _finish(fig, path)


def render_force(path, names, phi, trajectory, base_value, title) -> None:
    fig, (top, bottom) = plt.subplots(
        2, 1, figsize=(8, 6), height_ratios=[1, 2], sharex=False
    )
    top.plot(np.arange(len(trajectory)), trajectory, marker="o", color="#444444")
    top.axhline(base_value, linestyle="--", color="#999999", linewidth=1)
    top.set_ylabel("output")
    top.set_title(title)
    phi = np.asarray(phi)
    colors = np.where(phi >= 0, "#d53e4f", "#3288bd")
    bottom.barh(np.arange(len(names)), phi, color=colors)
    bottom.set_yticks(np.arange(len(names)), names, fontsize=6)
    bottom.invert_yaxis()
    bottom.set_xlabel("phi (positive pushes toward attack)")
    _finish(fig, path)


def render_lime(path, names, weights, title) -> None:
    weights = np.asarray(weights)
    order = np.argsort(np.abs(weights))
    colors = np.where(weights[order] >= 0, "#fc8d62", "#8da0cb")
    fig, ax = plt.subplots(figsize=(7, max(2.5, 0.35 * len(names))))
    ax.barh(np.arange(len(names)), weights[order], color=colors)
    ax.set_yticks(np.arange(len(names)), [names[i] for i in order], fontsize=8)
    ax.set_xlabel("surrogate weight (positive pushes toward attack)")
    ax.set_title(title)
    _finish(fig, path)


def render_rfe_trace(path, n_features, scores, accepted, title) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    n_features = np.asarray(n_features)
    scores = np.asarray(scores)
    accepted = np.asarray(accepted, dtype=bool)
    ax.plot(n_features, scores, color="#66c2a5", marker="o")
    if (~accepted).any():
        ax.scatter(n_features[~accepted], scores[~accepted], color="#d53e4f",
                   zorder=3, label="rejected")
        ax.legend()
    ax.set_xlabel("features in play")
    ax.set_ylabel("validation accuracy")
    ax.invert_xaxis()
    ax.set_title(title)
    _finish(fig, path)


def render_model_comparison(path, names, accuracies, title) -> None:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.bar(names, accuracies, color=["#66c2a5", "#8da0cb", "#fc8d62"][: len(names)])
    ax.set_ylim(0.0, 1.0)
    ax.set_ylabel("test accuracy")
    ax.set_title(title)
    for i, acc in enumerate(accuracies):
        ax.text(i, acc + 0.01, f"{acc:.4f}", ha="center", fontsize=8)
    _finish(fig, path)
