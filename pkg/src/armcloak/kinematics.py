"""Serial-manipulator model: forward kinematics, geometric Jacobian, and
world poses of the per-link collision primitives.

All joints are revolute. Joint i contributes T_fixed_i @ Rot(axis_i, q_i);
link frame i coincides with the frame after joint i's rotation. An extra
fixed transform places the end-effector after the last joint.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import Capsule, OrientedBox, Pose, Primitive, rotation_about_axis


class JointLimitError(ValueError):
    """A joint value lies outside its configured limits."""


@dataclass(frozen=True)
class Joint:
    origin: Pose                 # fixed parent-to-joint transform
    axis: np.ndarray             # unit rotation axis, joint frame
    limits: tuple[float, float]  # [min, max] radians

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float).reshape(3)
        n = np.linalg.norm(axis)
        if abs(n - 1.0) > 1e-12:
            raise ValueError(f"joint axis must have unit norm (got {n!r})")
        object.__setattr__(self, "axis", axis)
        if self.limits[0] > self.limits[1]:
            raise ValueError("joint limits must satisfy min <= max")


@dataclass(frozen=True)
class KinematicChain:
    joints: tuple[Joint, ...]
    link_primitives: tuple[tuple[Primitive, ...], ...]  # one tuple per link
    ee_offset: Pose = field(default_factory=Pose.identity)
    base: Pose = field(default_factory=Pose.identity)

    def __post_init__(self):
        if len(self.joints) < 1:
            raise ValueError("chain needs at least one joint")
        if len(self.link_primitives) != len(self.joints):
            raise ValueError("need one primitive list per link")

    @property
    def dof(self) -> int:
        return len(self.joints)

    def check_q(self, q: np.ndarray, enforce_limits: bool = True) -> np.ndarray:
        q = np.asarray(q, dtype=float).reshape(-1)
        if q.shape[0] != self.dof:
            raise ValueError(f"expected {self.dof} joint values, got {q.shape[0]}")
        if enforce_limits:
            for i, (joint, qi) in enumerate(zip(self.joints, q)):
                lo, hi = joint.limits
                if qi < lo - 1e-12 or qi > hi + 1e-12:
                    raise JointLimitError(f"joint {i} value {qi:.6f} outside [{lo}, {hi}]")
        return q


@dataclass(frozen=True)
class JointState:
    """Measured configuration: positions, velocities, torques."""

    q: np.ndarray
    qdot: np.ndarray
    tau: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float).reshape(-1)
        qdot = np.asarray(self.qdot, dtype=float).reshape(-1)
        tau = np.asarray(self.tau, dtype=float).reshape(-1)
        if not (q.shape == qdot.shape == tau.shape):
            raise ValueError("q, qdot, tau must share one dimension")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "qdot", qdot)
        object.__setattr__(self, "tau", tau)

    @staticmethod
    def resting(q: np.ndarray) -> "JointState":
        q = np.asarray(q, dtype=float).reshape(-1)
        return JointState(q, np.zeros_like(q), np.zeros_like(q))


def forward_kinematics(chain: KinematicChain, q, enforce_limits: bool = True) -> list[Pose]:
    """World pose of every link frame plus the end-effector (dof + 1 poses)."""
    q = chain.check_q(q, enforce_limits)
    poses = []
    T = chain.base
    for joint, qi in zip(chain.joints, q):
        T = T.compose(joint.origin).compose(
            Pose(np.zeros(3), rotation_about_axis(joint.axis, qi))
        )
        poses.append(T)
    poses.append(T.compose(chain.ee_offset))
    return poses


def jacobian(chain: KinematicChain, q, enforce_limits: bool = True) -> np.ndarray:
    """Geometric Jacobian of the end-effector, rows = [linear; angular].

    Column i = [z_i x (p_ee - p_i); z_i] with z_i the world-frame axis of
    joint i and p_i that joint's origin.
    """
    q = chain.check_q(q, enforce_limits)
    J = np.zeros((6, chain.dof))
    T = chain.base
    axes = []
    origins = []
    for joint, qi in zip(chain.joints, q):
        T_joint = T.compose(joint.origin)
        axes.append(T_joint.rotation @ joint.axis)
        origins.append(T_joint.position)
        T = T_joint.compose(Pose(np.zeros(3), rotation_about_axis(joint.axis, qi)))
    p_ee = T.compose(chain.ee_offset).position
    for i in range(chain.dof):
        J[:3, i] = np.cross(axes[i], p_ee - origins[i])
        J[3:, i] = axes[i]
    return J


def link_primitive_poses(
    chain: KinematicChain, q, enforce_limits: bool = True
) -> list[tuple[Primitive, Pose]]:
    """Every link primitive paired with its link's world pose."""
    poses = forward_kinematics(chain, q, enforce_limits)
    out = []
    for link_pose, prims in zip(poses, chain.link_primitives):
        for prim in prims:
            out.append((prim, link_pose))
    return out


def world_primitives(chain: KinematicChain, q, enforce_limits: bool = True) -> list[Primitive]:
    """Link primitives expressed in the world frame (convenience for rendering)."""
    return [prim.transformed(pose) for prim, pose in link_primitive_poses(chain, q, enforce_limits)]
