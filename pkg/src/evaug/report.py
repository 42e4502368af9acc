"""Report writers: delimited tables plus matplotlib figures beside them."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def write_table(path: Path, header: Sequence[str], rows: Sequence[Sequence[object]]) -> None:
    """Tab-separated table with a header row."""
    lines = ["\t".join(str(h) for h in header)]
    lines.extend("\t".join(str(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def write_json(path: Path, payload: object) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def render_bars(
    path: Path,
    labels: Sequence[str],
    values: Sequence[float],
    ylabel: str,
    highlight: str | None = None,
) -> None:
    """Bar chart; an optionally highlighted bar is drawn in a warning color."""
    fig, ax = plt.subplots(figsize=(7, 4))
    colors = ["#d62728" if lab == highlight else "#4878a8" for lab in labels]
    ax.bar(range(len(labels)), values, color=colors)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=30, ha="right")
    ax.set_ylabel(ylabel)
    ax.set_ylim(0.0, 1.05)
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_hist(path: Path, samples_ms: Sequence[float], xlabel: str) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.hist(samples_ms, bins=50, color="#4878a8")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("samples")
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
