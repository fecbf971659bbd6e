"""Matplotlib renderings of corpus statistics and mining reports.

Figures are written next to the delimited output (stats.csv) so the report
path yields machine-readable tables plus visual summaries in one pass.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from dashmine.corpus import StatsReport  # noqa: E402
from dashmine.mining import RuleSet  # noqa: E402


def _bar(ax, labels, counts, title, color):
    ax.bar(range(len(labels)), counts, color=color)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=8)
    ax.set_title(title, fontsize=10)
    ax.set_ylabel("count", fontsize=8)
    ax.tick_params(axis="y", labelsize=8)
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)


def write_stats_csv(report: StatsReport, path: Path) -> None:
    """One row per histogram bucket: section, key, count, fraction."""
    data = report.to_dict()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["section", "key", "count", "fraction"])
        for section in ("view_count", "marks", "coordination"):
            for key, entry in data[section].items():
                writer.writerow([section, key, entry["count"], entry["fraction"]])


def render_stats_figures(report: StatsReport, out_dir: Path, stem: str = "stats") -> list[Path]:
    """Bar charts of the three corpus distributions; returns written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    panels = [
        ("view_count", "Views per dashboard", "#4c78a8"),
        ("marks", "Mark types", "#f58518"),
        ("coordination", "Coordination kinds", "#54a24b"),
    ]
    data = report.to_dict()
    written = []
    for section, title, color in panels:
        entries = data[section]
        keys = sorted(entries, key=lambda k: (len(k), k))
        fig, ax = plt.subplots(figsize=(4.2, 3.0), dpi=150)
        _bar(ax, keys, [entries[k]["count"] for k in keys], title, color)
        fig.tight_layout()
        path = out_dir / f"{stem}_{section}.png"
        fig.savefig(path)
        plt.close(fig)
        written.append(path)
    return written


def render_mining_figures(ruleset: RuleSet, out_dir: Path, stem: str = "rules") -> list[Path]:
    """Importance distribution and per-mapping accuracy charts."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    importances = sorted((r.importance for r in ruleset.rules), reverse=True)
    fig, ax = plt.subplots(figsize=(4.2, 3.0), dpi=150)
    ax.plot(range(1, len(importances) + 1), importances, color="#4c78a8")
    ax.set_title("Rule importance (ranked)", fontsize=10)
    ax.set_xlabel("rank", fontsize=8)
    ax.set_ylabel("importance", fontsize=8)
    ax.tick_params(labelsize=8)
    fig.tight_layout()
    path = out_dir / f"{stem}_importance.png"
    fig.savefig(path)
    plt.close(fig)
    written.append(path)

    models = ruleset.provenance.get("models", [])
    if models:
        by_mapping: dict[str, list[float]] = {}
        for m in models:
            if m["test_acc"] == m["test_acc"]:  # skip NaN
                by_mapping.setdefault(m["mapping"], []).append(m["test_acc"])
        mappings = sorted(by_mapping)
        means = [sum(by_mapping[k]) / len(by_mapping[k]) for k in mappings]
        fig, ax = plt.subplots(figsize=(4.6, 3.0), dpi=150)
        _bar(ax, mappings, means, "Mean test accuracy by mapping", "#54a24b")
        ax.set_ylabel("accuracy", fontsize=8)
        ax.set_ylim(0, 1)
        fig.tight_layout()
        path = out_dir / f"{stem}_accuracy.png"
        fig.savefig(path)
        plt.close(fig)
        written.append(path)
    return written
