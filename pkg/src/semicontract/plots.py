"""File-rendered figures for the CLI report paths.

Kept separate from the numerical core so that importing the library never
pulls in a matplotlib backend. All functions save to a path and return it.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

__all__ = ["plot_figure1", "plot_trajectory", "plot_decay"]


def plot_figure1(rows, path):
    """Mean deflated abscissa vs edge probability for both couplings."""
    p = [row.p for row in rows]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.errorbar(
        p,
        [row.mean_abscissa_laplacian for row in rows],
        yerr=[row.ci_laplacian for row in rows],
        marker="o", capsize=3, label="Laplacian coupling",
    )
    ax.errorbar(
        p,
        [row.mean_abscissa_incidence for row in rows],
        yerr=[row.ci_incidence for row in rows],
        marker="s", capsize=3, label="incidence coupling",
    )
    ax.axhline(0.0, color="k", linewidth=0.6, alpha=0.4)
    ax.set_xlabel("edge probability")
    ax.set_ylabel("mean dominant eigenvalue (deflated)")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_trajectory(trajectory, path, primal_dim=None):
    """State components against time; duals drawn dashed when split."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    t = trajectory.times
    d = trajectory.dim
    split = d if primal_dim is None else int(primal_dim)
    for k in range(d):
        style = "-" if k < split else "--"
        ax.plot(t, trajectory.states[:, k], style, linewidth=0.9)
    ax.set_xlabel("t")
    ax.set_ylabel("state")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_decay(report, path):
    """Observed seminorm distance against the certified envelope."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    positive = report.distances > 0
    ax.semilogy(
        report.times[positive], report.distances[positive],
        label="observed distance",
    )
    env = np.maximum(report.envelope, np.finfo(float).tiny)
    ax.semilogy(report.times, env, "--", label=f"envelope (rate {report.rate:.4g})")
    ax.set_xlabel("t")
    ax.set_ylabel("weighted seminorm distance")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
