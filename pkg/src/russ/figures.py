"""Render an evaluation report to figure files.

Uses the non-interactive Agg backend so the CLI works headless; every
function writes one PNG and returns its path.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluation import EvalReport


def _bar_pair(ax, labels, before, after, ylabel):
    x = range(len(labels))
    width = 0.38
    ax.bar([i - width / 2 for i in x], before, width, label="before", color="#4878a8")
    ax.bar([i + width / 2 for i in x], after, width, label="after", color="#e1812c")
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels)
    ax.set_ylabel(ylabel)
    ax.legend()
    ax.grid(axis="y", alpha=0.3)


def f1_figure(report: EvalReport, out_dir: Path) -> Path:
    roles = list(report.roles)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    _bar_pair(
        ax,
        roles,
        [report.roles[r].f1_before for r in roles],
        [report.roles[r].f1_after for r in roles],
        "mean token F1",
    )
    ax.set_title("Extraction F1 before/after simplification")
    path = out_dir / "f1.png"
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def delta_figure(report: EvalReport, out_dir: Path) -> Path:
    roles = list(report.roles)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    x = range(len(roles))
    width = 0.26
    for offset, (key, label, color) in enumerate(
        [("delta_pos", "improved", "#2e8b57"), ("delta_neg", "worsened", "#b22222"), ("delta_same", "unchanged", "#888888")]
    ):
        values = [getattr(report.roles[r], key) for r in roles]
        ax.bar([i + (offset - 1) * width for i in x], values, width, label=label, color=color)
    ax.set_xticks(list(x))
    ax.set_xticklabels(roles)
    ax.set_ylabel("% of records")
    ax.set_title("Per-record F1 change")
    ax.legend()
    ax.grid(axis="y", alpha=0.3)
    path = out_dir / "deltas.png"
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def distance_figure(report: EvalReport, out_dir: Path) -> Path:
    roles = [r for r in report.roles if report.roles[r].dist_before is not None]
    fig, ax = plt.subplots(figsize=(5, 3.5))
    _bar_pair(
        ax,
        roles,
        [report.roles[r].dist_before or 0 for r in roles],
        [report.roles[r].dist_after or 0 for r in roles],
        "mean tokens between trigger and answer",
    )
    ax.set_title("Predicate-argument distance")
    path = out_dir / "distance.png"
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def length_figure(report: EvalReport, out_dir: Path) -> Path:
    fig, ax = plt.subplots(figsize=(4, 3.5))
    ax.bar(["before", "after"], [report.mean_len_before, report.mean_len_after], color=["#4878a8", "#e1812c"])
    ax.set_ylabel("mean sentence length (tokens)")
    ax.set_title("Sentence length")
    ax.grid(axis="y", alpha=0.3)
    path = out_dir / "lengths.png"
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_report_figures(report: EvalReport, out_dir: str | Path) -> list[Path]:
    """Write all report figures into ``out_dir`` and return their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return [
        f1_figure(report, out),
        delta_figure(report, out),
        distance_figure(report, out),
        length_figure(report, out),
    ]
