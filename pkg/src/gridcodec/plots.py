"""Figure rendering for evaluation reports and training traces.

Renders to files only (Agg backend, no display).  Each function takes the
same report dict the JSON/CSV emitters consume, so figures always agree
with the delimited output written next to them.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def _task_label(report: dict) -> str:
    task = report["task"]
    return f"p = {task['p']}, E = {task['E']:g}"


def save_comparison_figure(report: dict, path) -> Path:
    """Bar chart of per-codec relative utility loss."""
    codecs = report["codecs"]
    names = [c["name"] for c in codecs]
    relative = [c["relative_percent"] for c in codecs]
    fig, ax = plt.subplots(figsize=(max(4.0, 1.4 * len(names) + 1.5), 3.6))
    ax.bar(range(len(names)), relative, color="#4878b0")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=20, ha="right")
    ax.set_ylabel("relative utility loss (%)")
    ax.set_title(f"Codec comparison ({_task_label(report)})")
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_sweep_figure(report: dict, path) -> Path:
    """Rate-loss tradeoff: relative loss vs bits per coefficient, one line
    per codec carrying a curve; the unquantized loss is a dashed floor."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    plotted = False
    for entry in report["codecs"]:
        curve = entry.get("curve")
        if not curve:
            continue
        bits = [point[0] for point in curve]
        relative = [point[2] for point in curve]
        line, = ax.plot(bits, relative, marker="o", label=entry["name"])
        ax.axhline(entry["relative_percent"], color=line.get_color(),
                   linestyle="--", linewidth=0.8, alpha=0.6)
        plotted = True
    if not plotted:
        raise ValueError("report carries no rate curves to plot")
    ax.set_xlabel("bits per coefficient")
    ax.set_ylabel("relative utility loss (%)")
    ax.set_title(f"Rate sweep ({_task_label(report)})")
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_trace_figure(loss_trace, path, title: str = "Training loss") -> Path:
    """Loss per iteration on a log scale (linear when values hit zero)."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(range(len(loss_trace)), loss_trace, color="#b04848")
    if min(loss_trace) > 0:
        ax.set_yscale("log")
    ax.set_xlabel("iteration")
    ax.set_ylabel("mean squared utility loss")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
