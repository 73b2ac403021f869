"""Figure rendering for the experiment drivers.

All functions write PNG files and never open a window; the Agg backend
is forced so the drivers stay usable on headless machines.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["convergence_curve", "density_map", "particle_paths", "sweep_curve"]


def particle_paths(result, turning_rows, path: Path) -> None:
    """Trajectories in the (x, t) plane with the turning curve overlaid."""
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    times = result.times
    for i in range(result.trajectories.shape[1]):
        ax.plot(result.trajectories[:, i], times, color="0.3", lw=0.5)
    if turning_rows:
        t_vals = [row[0] for row in turning_rows]
        xi_vals = [row[2] for row in turning_rows]
        ax.plot(xi_vals, t_vals, color="green", lw=1.8, label="turning curve")
        ax.legend(loc="upper right")
    ax.axvline(-1.0, color="k", lw=1.0)
    ax.axvline(1.0, color="k", lw=1.0)
    ax.set_xlim(-1.1, 1.1)
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    ax.set_title(f"particle paths, alpha={result.alpha:g}, n={result.n}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def density_map(result, path: Path, x_points: int = 400) -> None:
    """Heat map of the reconstructed density over space and time."""
    xs = np.linspace(-1.0, 1.0, x_points)
    grid = np.zeros((len(result.times), x_points))
    for k, row in enumerate(result.trajectories):
        values = np.append(result.ell / np.diff(row), 0.0)
        idx = np.searchsorted(row, xs, side="right") - 1
        inside = (idx >= 0) & (xs < row[-1])
        grid[k, inside] = values[idx[inside]]
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    mesh = ax.pcolormesh(xs, result.times, grid, cmap="viridis", shading="nearest")
    fig.colorbar(mesh, ax=ax, label="density")
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    ax.set_title(f"density, alpha={result.alpha:g}, n={result.n}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def sweep_curve(sweep, path: Path) -> None:
    """Evacuation time against alpha with detected jumps marked."""
    good = [r for r in sweep.rows if r.error is None]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(
        [r.alpha for r in good],
        [r.evacuation_time for r in good],
        marker=".",
        ms=3,
        lw=1.0,
    )
    for jump in sweep.jumps:
        ax.axvline(jump["alpha_right"], color="red", lw=0.8, ls="--")
    ax.set_xlabel("alpha")
    ax.set_ylabel("evacuation time")
    ax.set_title("evacuation time over the cost weight")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def convergence_curve(rows, path: Path) -> None:
    """Turning-point gap and reference distance against n, log-log."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ns = [r.n for r in rows]
    ax.loglog(ns, [r.max_xi_zeta_gap for r in rows], marker="o", label="max |xi - zeta|")
    ax.loglog(ns, [r.xi_zeta_bound for r in rows], ls="--", label="alpha*ell/2 bound")
    l1 = [(r.n, r.l1_to_reference) for r in rows if r.l1_to_reference is not None]
    if l1:
        ax.loglog(
            [n for n, _ in l1],
            [d for _, d in l1],
            marker="s",
            label="L1 distance to reference",
        )
    ax.set_xlabel("n")
    ax.set_ylabel("error")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
