"""PNG figures rendered next to the CSV reports.

Uses the non-interactive Agg backend with fixed size and DPI, and strips the
PNG metadata that would otherwise embed the matplotlib version string.
"""

from __future__ import annotations

import io
from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .active import SEVERITY_EDGES, Severity  # noqa: E402
from .passive import CurvePoint  # noqa: E402
from .reports import atomic_write_bytes  # noqa: E402

DPI = 100

SEVERITY_COLOURS = {
    Severity.NO_ATTACK: "#4c72b0",
    Severity.MINOR: "#dd8452",
    Severity.MODERATE: "#ccb974",
    Severity.SEVERE: "#c44e52",
    Severity.CRITICAL: "#8c1c13",
}


def _save(fig, path: Path) -> None:
    buf = io.BytesIO()
    fig.savefig(buf, format="png", dpi=DPI, metadata={"Software": None})
    plt.close(fig)
    atomic_write_bytes(path, buf.getvalue())


def severity_bars(
    path: Path,
    labels: Sequence[str],
    deviations: Sequence[float],
    severities: Sequence[Severity],
    title: str,
    xlabel: str,
) -> None:
    """Bar per attack configuration, coloured by band, with the band edges drawn."""
    fig, ax = plt.subplots(figsize=(max(6.0, 0.28 * len(labels) + 2), 4.0))
    x = np.arange(len(labels))
    ax.bar(x, deviations, color=[SEVERITY_COLOURS[s] for s in severities])
    for edge, _ in SEVERITY_EDGES[:-1]:
        ax.axhline(edge, color="grey", lw=0.6, ls="--")
    ax.set_xticks(x)
    ax.set_xticklabels(labels, rotation=90, fontsize=7)
    ax.set_ylim(0, 100)
    ax.set_ylabel("deviation (%)")
    ax.set_xlabel(xlabel)
    ax.set_title(title)
    handles = [plt.Rectangle((0, 0), 1, 1, color=c) for c in SEVERITY_COLOURS.values()]
    ax.legend(handles, [s.label for s in SEVERITY_COLOURS], fontsize=7, loc="upper right")
    fig.tight_layout()
    _save(fig, path)


def tradeoff_curves(path: Path, curves: Mapping[str, Sequence[CurvePoint]], title: str) -> None:
    fig, (ax_acc, ax_conf) = plt.subplots(1, 2, figsize=(10, 4))
    for name, pts in curves.items():
        ks = [p.k for p in pts]
        ax_acc.plot(ks, [p.mean_acc1 for p in pts], marker="o", ms=3, label=name)
        ax_conf.plot(ks, [p.mean_confidence for p in pts], marker="o", ms=3, label=name)
    ax_acc.set_xlabel("listening qubits k")
    ax_acc.set_ylabel("mean Acc1")
    ax_conf.set_xlabel("listening qubits k")
    ax_conf.set_ylabel("mean confidence")
    ax_acc.legend(fontsize=8)
    fig.suptitle(title)
    fig.tight_layout()
    _save(fig, path)


def mse_heatmap(path: Path, matrix: np.ndarray, labels: Sequence[str], title: str) -> None:
    """Rows: observed configuration; columns: dataset label."""
    n = len(labels)
    fig, ax = plt.subplots(figsize=(6, 5.4))
    im = ax.imshow(matrix, cmap="viridis", interpolation="nearest")
    step = max(1, n // 16)
    ticks = np.arange(0, n, step)
    ax.set_xticks(ticks)
    ax.set_yticks(ticks)
    ax.set_xticklabels([labels[i] for i in ticks], rotation=90, fontsize=6)
    ax.set_yticklabels([labels[i] for i in ticks], fontsize=6)
    ax.set_xlabel("dataset label")
    ax.set_ylabel("observed")
    ax.set_title(title)
    fig.colorbar(im, ax=ax, label="MSE")
    fig.tight_layout()
    _save(fig, path)
