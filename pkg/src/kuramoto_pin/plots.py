"""Figure rendering for sweep reports and simulation runs."""

from __future__ import annotations

from pathlib import Path
from typing import Iterable

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .dynamics import Trajectory
from .experiments import SweepRecord

_MARKERS = {"optimal": "s", "submodular": "o", "greedy": "^", "random": "x"}


def sweep_figure(
    records: Iterable[SweepRecord],
    out_path: str | Path,
    axis_label: str = "sweep point",
) -> Path:
    """Mean selected-input count per axis point, one curve per algorithm."""
    records = [r for r in records if r.num_inputs >= 0]
    if not records:
        raise ValueError("no successful records to plot")
    kinds = sorted({r.graph_kind for r in records})
    if len(kinds) != 1:
        raise ValueError(f"one kind per figure; got {kinds}")
    by_alg: dict[str, dict[float, list[int]]] = {}
    for r in records:
        by_alg.setdefault(r.algorithm, {}).setdefault(r.point, []).append(r.num_inputs)
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    for alg in sorted(by_alg):
        pts = sorted(by_alg[alg])
        means = [sum(by_alg[alg][p]) / len(by_alg[alg][p]) for p in pts]
        ax.plot(pts, means, marker=_MARKERS.get(alg, "."), label=alg)
    ax.set_xlabel(axis_label)
    ax.set_ylabel("mean number of inputs")
    ax.set_title(kinds[0])
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    out_path = Path(out_path)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def trajectory_figure(traj: Trajectory, out_path: str | Path) -> Path:
    """Phases, sup|sin z|, and edge energy stacked on the time axis."""
    fig, axes = plt.subplots(3, 1, figsize=(6.0, 6.4), sharex=True)
    for i in range(traj.theta.shape[1]):
        axes[0].plot(traj.times, traj.theta[:, i], lw=0.8)
    axes[0].set_ylabel("theta")
    axes[1].plot(traj.times, traj.sinz_inf_series, lw=0.9)
    axes[1].axhline(1.0, color="k", ls=":", lw=0.8)
    axes[1].set_ylabel("sup |sin z|")
    axes[2].plot(traj.times, traj.V_series, lw=0.9)
    axes[2].set_ylabel("edge energy")
    axes[2].set_xlabel("t")
    for ax in axes:
        ax.grid(alpha=0.3)
    out_path = Path(out_path)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path
