"""Figure rendering for the report path.

Each renderer takes the already-computed report structures and writes a PNG
next to the delimited output; no statistics are computed here.
"""

from __future__ import annotations

from pathlib import Path

MOTIVE_COLOR = "#f2e5cb"  # motive selections
APP_COLOR = "#c8e6e3"  # app-category selections


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_words_per_input(report: dict, path: str | Path) -> Path:
    """Bar chart of mean words per input by motive, SD as error bars."""
    plt = _pyplot()
    groups = report["words_per_input"]["motive"]
    labels = [g["label"] for g in groups]
    means = [g["mean"] for g in groups]
    sds = [g["sd"] for g in groups]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(labels, means, yerr=sds, capsize=3, color=MOTIVE_COLOR, edgecolor="black")
    ax.set_ylabel("words per text input (M, error bar = SD)")
    ax.set_xlabel("input motive")
    ax.tick_params(axis="x", rotation=30)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_matching_rates(comparison: dict, path: str | Path) -> Path:
    """Matching-rate M/SD per selection, motive vs app category side by side."""
    plt = _pyplot()
    rows = comparison["rows"]
    labels = [f"{r['kind']}: {r['label']}" for r in rows]
    means = [r["match_rate"]["mean"] * 100 for r in rows]
    sds = [r["match_rate"]["sd"] * 100 for r in rows]
    colors = [MOTIVE_COLOR if r["kind"] == "motive" else APP_COLOR for r in rows]
    fig, ax = plt.subplots(figsize=(7, 0.6 * max(4, len(rows))))
    y = range(len(rows))
    ax.barh(list(y), means, xerr=sds, capsize=3, color=colors, edgecolor="black")
    ax.set_yticks(list(y), labels)
    ax.invert_yaxis()
    ax.set_xlabel("dictionary matching rate % (M, error bar = SD)")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_longtail(report: dict, path: str | Path) -> Path:
    """Cumulative share of prompted records covered by the top-k prompts."""
    plt = _pyplot()
    prompted = report["prompted_records"] or 1
    cumulative = []
    total = 0
    for item in report["top"]:
        total += item["count"]
        cumulative.append(total / prompted)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(range(1, len(cumulative) + 1), cumulative, marker="o", color="#4a6fa5")
    ax.set_xlabel("prompt rank")
    ax.set_ylabel("cumulative share of prompted inputs")
    ax.set_ylim(0, 1)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
