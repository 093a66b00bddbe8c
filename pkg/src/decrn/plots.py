"""Matplotlib rendering of trajectory and convergence reports.

Figures are written straight to files with the Agg backend (no display),
with fixed metadata so repeated runs produce byte-identical images.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .dynamics import Trajectory

__all__ = ["plot_trajectory", "plot_chain_gaps"]

_SAVE_KWARGS = {"dpi": 150, "metadata": {"Software": None}}


def plot_trajectory(trajectory: Trajectory, species_names, path: str | Path,
                    title: str = "") -> None:
    """Concentration evolution per species, with in-class equilibrium guides."""
    fig, ax = plt.subplots(figsize=(6.0, 3.8))
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for j, name in enumerate(species_names):
        color = colors[j % len(colors)]
        ax.plot(trajectory.monitor_times, trajectory.monitor_states[:, j],
                color=color, label=name)
        if trajectory.equilibrium is not None:
            ax.axhline(trajectory.equilibrium[j], color=color, linestyle="--",
                       linewidth=0.8, alpha=0.6)
    ax.set_xlabel("t")
    ax.set_ylabel("concentration")
    if title:
        ax.set_title(title, fontsize=10)
    ax.legend(loc="best", fontsize=9)
    ax.margins(x=0)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def plot_chain_gaps(stage_counts, gaps, path: str | Path, title: str = "") -> None:
    """Sup-norm gap to the method-of-steps reference versus chain length."""
    fig, ax = plt.subplots(figsize=(4.8, 3.6))
    ax.loglog(stage_counts, gaps, "o-")
    ax.set_xlabel("chain stages N")
    ax.set_ylabel("sup-norm gap")
    if title:
        ax.set_title(title, fontsize=10)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)
