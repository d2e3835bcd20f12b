#!/usr/bin/env python3
"""Regenerate scenarios/pouring.cfg and scenarios/pouring_contacts.csv.

Builds the illustrative 7-DOF arm (plausible link lengths, not any real
robot's parameters), places the cameras so the workspace sits inside the
75..95 cm visible depth band, derives the grasp offset that keeps the
bottle upright at the start, and writes the scripted pouring contact
trajectory.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from armcloak.geometry import Pose, rotation_log
from armcloak.kinematics import Joint, KinematicChain, forward_kinematics, jacobian
from armcloak.trajectory import generate_contact_rows, pouring_twist, write_trajectory

LINK_LENGTHS = [0.10, 0.10, 0.15, 0.15, 0.15, 0.12, 0.10]
AXES = ["z", "y", "z", "y", "z", "y", "z"]
RADII = [0.055, 0.050, 0.045, 0.045, 0.040, 0.035, 0.030]
Q0 = [0.10, 0.85, -0.15, 0.95, 0.10, 0.55, 0.00]
EE_LEN = 0.08
DT = 1.0 / 60.0
DURATION = 10.0

AXIS_VEC = {"x": (1, 0, 0), "y": (0, 1, 0), "z": (0, 0, 1)}


def build_chain() -> KinematicChain:
    joints = []
    links = []
    for L, ax, r in zip(LINK_LENGTHS, AXES, RADII):
        joints.append(Joint(Pose(np.array([0.0, 0.0, L]), np.eye(3)),
                            np.array(AXIS_VEC[ax], dtype=float), (-2.9, 2.9)))
    # Link i body: capsule from this joint up to the next joint origin.
    next_lengths = LINK_LENGTHS[1:] + [EE_LEN]
    from armcloak.geometry import Capsule

    for L, r in zip(next_lengths, RADII):
        links.append((Capsule(np.zeros(3), np.array([0.0, 0.0, L]), r),))
    return KinematicChain(tuple(joints), tuple(links),
                          ee_offset=Pose(np.array([0.0, 0.0, EE_LEN]), np.eye(3)))


def pad_rotation(inward: np.ndarray) -> np.ndarray:
    """Contact frame with z = inward object normal."""
    z = inward / np.linalg.norm(inward)
    up = np.array([0.0, 0.0, 1.0])
    if abs(z @ up) > 0.9:
        up = np.array([0.0, 1.0, 0.0])
    x = np.cross(up, z)
    x /= np.linalg.norm(x)
    y = np.cross(z, x)
    return np.column_stack([x, y, z])


def fmt(vals) -> str:
    return " ".join(f"{v:.12g}" for v in np.atleast_1d(np.asarray(vals, dtype=float)))


def main() -> None:
    chain = build_chain()
    q0 = np.array(Q0)
    ee = forward_kinematics(chain, q0)[-1]
    J = jacobian(chain, q0)
    sv = np.linalg.svd(J, compute_uv=False)
    print(f"ee position: {ee.position}, J conditioning sigma_min/max = {sv[-1]:.4f}/{sv[0]:.4f}")

    # Bottle upright, centered 6 cm below the end-effector.
    obj_pos = ee.position + np.array([0.0, 0.0, -0.06])
    object_in_ee = Pose(ee.rotation.T @ (obj_pos - ee.position), ee.rotation.T)
    obj_pose = Pose(obj_pos, np.eye(3))

    pads = [
        (np.array([0.035, 0.0, 0.02]), pad_rotation(np.array([-1.0, 0.0, 0.0]))),
        (np.array([-0.035, 0.0, 0.02]), pad_rotation(np.array([1.0, 0.0, 0.0]))),
    ]

    cam_pos = np.array([obj_pos[0], obj_pos[1] - 0.85, 0.30])

    rows = generate_contact_rows(obj_pose, pads, pouring_twist, DT, DURATION)
    write_trajectory(ROOT / "scenarios" / "pouring_contacts.csv", rows)
    print(f"wrote {len(rows)} contact rows")

    lines = [
        "# Pouring scenario: illustrative 7-DOF arm, tabulated camera parameters.",
        "",
        "[chain]",
        f"dof = {chain.dof}",
        "q0 = " + fmt(q0),
        "ee_origin = " + fmt(chain.ee_offset.position),
        "ee_axis_angle = 0 0 0",
        "",
    ]
    for i, joint in enumerate(chain.joints, start=1):
        lines += [
            f"[joint{i}]",
            "origin = " + fmt(joint.origin.position),
            "axis_angle = 0 0 0",
            "axis = " + fmt(joint.axis),
            f"limits = {fmt(joint.limits)}",
            "",
        ]
    for i, prims in enumerate(chain.link_primitives, start=1):
        cap = prims[0]
        lines += [f"[link{i}]", "capsule = " + fmt([*cap.a, *cap.b, cap.radius]), ""]

    for name, focal_cm in (("real", 75), ("service", 75), ("interaction", 70)):
        lines += [
            f"[camera.{name}]",
            f"focal_cm = {focal_cm}",
            "near_cm = 75",
            "far_cm = 95",
            "sensor_width_cm = 75",
            "resolution = 640 480",
            "position = " + fmt(cam_pos),
            # camera-to-world axes (columns): x = world x, y = world -z (down), z = world +y
            "axis_angle = " + fmt(rotation_log(np.column_stack([[1, 0, 0], [0, 0, -1], [0, 1, 0]]).astype(float))),
            "",
        ]
    lines += [
        "[mask]",
        "range_r = 240 255",
        "range_g = 240 255",
        "range_b = 240 255",
        "range_a = 240 255",
        "",
        "[object]",
        "capsule = 0 0 -0.09 0 0 0.07 0.035",
        "color = 60 90 200 255",
        "initial_pose = from_robot",
        "",
        "[gripper]",
        "object_offset_position = " + fmt(object_in_ee.position),
        "object_offset_axis_angle = " + fmt(rotation_log(object_in_ee.rotation)),
    ]
    for i, (p, R) in enumerate(pads, start=1):
        lines.append(f"contact{i}_position = " + fmt(p))
        lines.append(f"contact{i}_axis_angle = " + fmt(rotation_log(R)))
    lines += [
        "",
        "[backdrop]",
        "point = " + fmt([obj_pos[0], obj_pos[1] + 0.12, 0.0]),
        "normal = 0 -1 0",
        "u_axis = 1 0 0",
        "checker = 0.06",
        "",
        "[simulation]",
        f"dt = {DT:.12g}",
        f"duration = {DURATION}",
        "clamp = 0.25",
        "latency = 0",
        "seed = 0",
        "trials = 1",
        "tracking_gain = 4.0",
        "trajectory = pouring_contacts.csv",
        "",
    ]
    (ROOT / "scenarios" / "pouring.cfg").write_text("\n".join(lines))
    print("wrote scenarios/pouring.cfg")
    print(f"object center: {obj_pos}; camera: {cam_pos}")


if __name__ == "__main__":
    main()
