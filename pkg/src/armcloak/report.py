"""Run reporting: delimited metrics/placement files and matplotlib figures."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .scenario import MetricsReport, ScenarioResult


def write_metrics_csv(path, metrics: MetricsReport) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["trial", "frame", "t", "pos_err_m", "roll_err_deg", "pitch_err_deg", "yaw_err_deg"])
        for trial in range(metrics.trials):
            for i, t in enumerate(metrics.times):
                w.writerow(
                    [trial, i, f"{t:.9g}", f"{metrics.pos_err[trial, i]:.9g}"]
                    + [f"{metrics.rpy_err[trial, i, k]:.9g}" for k in range(3)]
                )


def write_summary(path, metrics: MetricsReport) -> None:
    Path(path).write_text(metrics.summary_text() + "\n")


def write_placements_csv(path, placements) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["t", "x_v", "y_v", "z_v", "s_v"])
        for row in placements:
            w.writerow([f"{v:.9g}" for v in row])


def write_figures(out_dir, result: ScenarioResult, dt: float) -> list[Path]:
    """Trajectory, position-error and orientation-error figures for trial 0."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    trace = result.traces[0]
    t = np.arange(len(trace.twin_traj)) * dt
    twin = np.array([p.position for p in trace.twin_traj])
    real = np.array([p.position for p in trace.real_traj])
    paths = []

    fig, axes = plt.subplots(3, 1, figsize=(7, 6), sharex=True)
    for k, label in enumerate("xyz"):
        axes[k].plot(t, real[:, k], "-", color="tab:blue", label="real object")
        axes[k].plot(t, twin[:, k], ":", color="tab:orange", label="digital twin")
        axes[k].set_ylabel(f"{label} [m]")
        axes[k].grid(alpha=0.3)
    axes[0].legend(loc="best", fontsize=8)
    axes[2].set_xlabel("time [s]")
    fig.suptitle("Object trajectories (solid: real, dotted: twin)")
    p = out_dir / "trajectories.png"
    fig.savefig(p, dpi=110)
    plt.close(fig)
    paths.append(p)

    metrics = result.metrics
    fig, ax = plt.subplots(figsize=(7, 3))
    for trial in range(metrics.trials):
        ax.plot(metrics.times, metrics.pos_err[trial], lw=0.8,
                alpha=0.9 if metrics.trials == 1 else 0.5)
    ax.set_xlabel("time [s]")
    ax.set_ylabel("position error [m]")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    p = out_dir / "position_error.png"
    fig.savefig(p, dpi=110)
    plt.close(fig)
    paths.append(p)

    fig, axes = plt.subplots(3, 1, figsize=(7, 6), sharex=True)
    for k, label in enumerate(["roll", "pitch", "yaw"]):
        for trial in range(metrics.trials):
            axes[k].plot(metrics.times, metrics.rpy_err[trial, :, k], lw=0.8,
                         alpha=0.9 if metrics.trials == 1 else 0.5)
        axes[k].set_ylabel(f"{label} [deg]")
        axes[k].grid(alpha=0.3)
    axes[2].set_xlabel("time [s]")
    fig.suptitle("Orientation error (twin vs real)")
    p = out_dir / "orientation_error.png"
    fig.savefig(p, dpi=110)
    plt.close(fig)
    paths.append(p)
    return paths
