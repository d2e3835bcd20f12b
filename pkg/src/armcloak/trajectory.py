"""Contact trajectory files and the scripted pouring motion.

CSV layout (one row per contact per frame, header included):
    t, contact, px, py, pz, rx, ry, rz, fx, fy, fz, tx, ty, tz,
    vx, vy, vz, wx, wy, wz
Positions/orientations (axis-angle) are world frame; forces, torques and
velocities are contact frame. Per-contact velocities are authored as the
minimum-norm stacked velocities realizing the scripted object twist through
the grasp matrix, so the block-sum recovery returns that twist exactly —
the same convention the real-side redistribution uses.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import Pose, axis_angle_to_matrix, reorthonormalize, rotation_log, skew

HEADER = [
    "t", "contact", "px", "py", "pz", "rx", "ry", "rz",
    "fx", "fy", "fz", "tx", "ty", "tz", "vx", "vy", "vz", "wx", "wy", "wz",
]


@dataclass(frozen=True)
class ContactRow:
    t: float
    index: int
    position: np.ndarray
    orientation: np.ndarray
    force: np.ndarray
    torque: np.ndarray
    linear_velocity: np.ndarray
    angular_velocity: np.ndarray


def write_trajectory(path, rows: list[ContactRow]) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(HEADER)
        for r in rows:
            aa = rotation_log(r.orientation)
            w.writerow(
                [f"{r.t:.9g}", r.index]
                + [f"{v:.12g}" for v in (*r.position, *aa, *r.force, *r.torque,
                                         *r.linear_velocity, *r.angular_velocity)]
            )


def read_trajectory(path) -> list[list[ContactRow]]:
    """Rows grouped by frame (unique, increasing t), contacts ordered by index."""
    path = Path(path)
    frames: dict[float, list[ContactRow]] = {}
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != HEADER:
            raise ValueError(f"{path}: bad or missing trajectory header")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(HEADER):
                raise ValueError(f"{path}:{lineno}: expected {len(HEADER)} fields, got {len(row)}")
            vals = [float(v) for v in row]
            t = vals[0]
            frames.setdefault(t, []).append(
                ContactRow(
                    t=t,
                    index=int(vals[1]),
                    position=np.array(vals[2:5]),
                    orientation=axis_angle_to_matrix(np.array(vals[5:8])),
                    force=np.array(vals[8:11]),
                    torque=np.array(vals[11:14]),
                    linear_velocity=np.array(vals[14:17]),
                    angular_velocity=np.array(vals[17:20]),
                )
            )
    out = []
    for t in sorted(frames):
        out.append(sorted(frames[t], key=lambda r: r.index))
    return out


def _bump(t: float, t0: float, total: float, peak: float) -> float:
    """Raised-cosine velocity bump: zero outside [t0, t0+total], integral peak*total/2."""
    if t < t0 or t >= t0 + total:
        return 0.0
    return peak / 2.0 * (1.0 - np.cos(2.0 * np.pi * (t - t0) / total))


def pouring_twist(t: float) -> tuple[np.ndarray, np.ndarray]:
    """World-frame (linear, angular) object twist of the scripted pour.

    Vertical lift, tilt about the world x axis, untilt, final raise; all
    linear motion stays on the world z axis so the focal-ratio twist
    scaling (which touches x/y only) leaves the path invariant.
    """
    v = np.zeros(3)
    w = np.zeros(3)
    v[2] += _bump(t, 1.0, 1.5, 2.0 * 0.05 / 1.5)    # lift 5 cm
    w[0] += -_bump(t, 3.0, 2.0, 2.0 * 1.2 / 2.0)    # tilt 1.2 rad
    w[0] += _bump(t, 5.5, 2.0, 2.0 * 1.2 / 2.0)     # untilt
    v[2] += _bump(t, 7.6, 1.8, 2.0 * 0.09 / 1.8)    # raise 9 cm
    return v, w


def generate_contact_rows(
    initial_pose: Pose,
    grasp_points: list[tuple[np.ndarray, np.ndarray]],  # object frame (p, R)
    twist_fn,
    dt: float,
    duration: float,
    squeeze: float = 2.0,
) -> list[ContactRow]:
    """Integrate the twist profile and emit self-consistent per-contact rows.

    Velocities per frame are the minimum-norm solution of the block-sum
    twist relation at the integrated pose. Each contact squeezes inward
    (contact z) with the given force; the net transported wrench of the
    squeeze alone is zero for antipodal grasps.
    """
    from .grasp_mapping import grasp_block

    rows: list[ContactRow] = []
    pose = initial_pose
    steps = int(round(duration / dt))
    for i in range(steps):
        t = i * dt
        v, w = twist_fn(t)
        placed = [
            (pose.apply(p_obj), pose.rotation @ R_obj) for p_obj, R_obj in grasp_points
        ]
        G = np.vstack([grasp_block(p_w, R_w, pose.position) for p_w, R_w in placed])
        nu = np.linalg.pinv(G.T) @ np.concatenate([v, w])
        for j, (p_w, R_w) in enumerate(placed):
            rows.append(
                ContactRow(
                    t=t,
                    index=j,
                    position=p_w,
                    orientation=R_w,
                    force=np.array([0.0, 0.0, squeeze]),
                    torque=np.zeros(3),
                    linear_velocity=nu[6 * j : 6 * j + 3],
                    angular_velocity=nu[6 * j + 3 : 6 * j + 6],
                )
            )
        R = reorthonormalize(axis_angle_to_matrix(w * dt) @ pose.rotation)
        pose = Pose(pose.position + v * dt, R)
    return rows
