"""Figure rendering for experiment outputs (written next to the CSVs)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

METHOD_COLORS = {"frechet": "tab:blue", "point4": "tab:orange", "point2": "tab:green",
                 "point": "tab:orange"}


def render_shape_fitting(rows: list[dict], out_path: Path) -> Path:
    """Convergence curves of the averaged shape and EE errors per method."""
    out_path = Path(out_path)
    methods = sorted({r["method"] for r in rows}, key=str)
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    for m in methods:
        sub = [r for r in rows if r["method"] == m]
        it = np.array([float(r["iteration"]) for r in sub])
        df = np.array([float(r["mean_frechet_over_h"]) for r in sub])
        x3t = np.array([float(r["mean_x3t_over_h"]) for r in sub])
        color = METHOD_COLORS.get(m)
        axes[0].plot(it, df, label=m, color=color)
        axes[1].semilogy(it, np.maximum(x3t, 1e-12), label=m, color=color)
    axes[0].set_xlabel("iteration")
    axes[0].set_ylabel("mean shape error $d_F/h$")
    axes[0].legend()
    axes[0].grid(alpha=0.3)
    axes[1].set_xlabel("iteration")
    axes[1].set_ylabel("mean EE position error / h")
    axes[1].grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=130)
    plt.close(fig)
    return out_path


def render_pivot(rows: list[dict], out_path: Path) -> Path:
    """Shape change vs cone opening angle, averaged over azimuth, per path."""
    out_path = Path(out_path)
    paths = sorted({r["path"] for r in rows})
    fig, axes = plt.subplots(1, len(paths), figsize=(4 * len(paths), 3.6), squeeze=False)
    for ax, path_name in zip(axes[0], paths):
        for method in sorted({r["method"] for r in rows}):
            sub = [r for r in rows if r["path"] == path_name and r["method"] == method]
            thetas = sorted({float(r["theta_deg"]) for r in sub})
            means = [
                np.mean([float(r["frechet_over_h"]) for r in sub
                         if float(r["theta_deg"]) == t])
                for t in thetas
            ]
            ax.plot(thetas, means, marker="o", ms=3,
                    label=method, color=METHOD_COLORS.get(method))
        ax.set_title(path_name)
        ax.set_xlabel(r"$\theta$ [deg]")
        ax.set_ylabel("$d_F/h$ to initial shape")
        ax.grid(alpha=0.3)
        ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=130)
    plt.close(fig)
    return out_path


def render_locomotion(results, out_path: Path) -> Path:
    """Final backbone vs target path, one 3D panel per path."""
    out_path = Path(out_path)
    fig = plt.figure(figsize=(4 * len(results), 4))
    for i, res in enumerate(results):
        ax = fig.add_subplot(1, len(results), i + 1, projection="3d")
        ax.plot(*res.path.T, color="tab:green", lw=1.5, label="path")
        ax.plot(*res.backbone.T, color="tab:blue", marker="o", ms=2, lw=1, label="backbone")
        ax.set_title(f"{res.path_name}: $d_F/h$={res.final_frechet_over_h:.2f}")
        ax.legend()
        lims = np.array([res.path.min(axis=0), res.path.max(axis=0)])
        center = lims.mean(axis=0)
        radius = max((lims[1] - lims[0]).max() / 2, 1e-3)
        ax.set_xlim(center[0] - radius, center[0] + radius)
        ax.set_ylim(center[1] - radius, center[1] + radius)
        ax.set_zlim(center[2] - radius, center[2] + radius)
    fig.tight_layout()
    fig.savefig(out_path, dpi=130)
    plt.close(fig)
    return out_path
