"""Figures for the analysis directory (PNG via the Agg canvas, no pyplot state)."""
from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure


def _save(fig: Figure, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    FigureCanvasAgg(fig)
    fig.savefig(path, dpi=110, bbox_inches="tight", metadata={"Software": None})
    return path


def aocc_boxplot(samples: Mapping[str, Sequence[float]], path, title: str = "") -> Path:
    """One box per algorithm of its AOCC samples."""
    names = list(samples)
    fig = Figure(figsize=(1.2 * max(len(names), 3) + 1, 4))
    ax = fig.add_subplot()
    ax.boxplot([np.asarray(samples[n], dtype=float) for n in names])
    ax.set_xticks(range(1, len(names) + 1), names, rotation=30, ha="right")
    ax.set_ylabel("AOCC")
    ax.set_title(title)
    ax.grid(axis="y", alpha=0.3)
    return _save(fig, path)


def eaf_curves(curves: Mapping[str, tuple[Sequence[int], Sequence[float]]], path, title: str = "") -> Path:
    """Mean attainment over targets against evaluations, one line per algorithm."""
    fig = Figure(figsize=(6, 4))
    ax = fig.add_subplot()
    for name, (budgets, values) in curves.items():
        ax.step(budgets, values, where="post", label=name)
    ax.set_xscale("log")
    ax.set_ylim(0, 1)
    ax.set_xlabel("function evaluations")
    ax.set_ylabel("attainment (mean over targets)")
    ax.set_title(title)
    ax.legend(fontsize="small")
    ax.grid(alpha=0.3)
    return _save(fig, path)


def elo_bars(ratings: Mapping[str, float], path, title: str = "") -> Path:
    names = sorted(ratings, key=lambda n: -ratings[n])
    fig = Figure(figsize=(6, 0.4 * len(names) + 1.5))
    ax = fig.add_subplot()
    ax.barh(names[::-1], [ratings[n] for n in names[::-1]], color="tab:blue")
    ax.axvline(1000.0, color="grey", lw=0.8, ls="--")
    lo = min(ratings.values())
    ax.set_xlim(min(lo, 1000.0) - 50, max(ratings.values()) + 50)
    ax.set_xlabel("ELO rating")
    ax.set_title(title)
    return _save(fig, path)


def convergence_curves(curves: Mapping[str, Sequence[float]], path, title: str = "") -> Path:
    """Mean best-so-far training fitness against the number of generated candidates."""
    fig = Figure(figsize=(6, 4))
    ax = fig.add_subplot()
    for name, curve in curves.items():
        curve = np.asarray(curve, dtype=float)
        ax.plot(np.arange(1, len(curve) + 1), curve, label=name)
    ax.set_xlabel("candidates generated")
    ax.set_ylabel("best-so-far fitness (AOCC)")
    ax.set_title(title)
    ax.legend(fontsize="small")
    ax.grid(alpha=0.3)
    return _save(fig, path)
