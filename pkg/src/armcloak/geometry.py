"""Rigid-body geometry: rotations, poses, and convex collision primitives.

Conventions: right-handed frames, rotation matrices map local coordinates
into the parent frame, positions in meters, angles in radians.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ORTHONORMAL_TOL = 1e-9


def skew(v: np.ndarray) -> np.ndarray:
    """Cross-product matrix S(v) with S(v) @ u == np.cross(v, u)."""
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def axis_angle_to_matrix(r: np.ndarray) -> np.ndarray:
    """Rodrigues formula; r is axis * angle, zero vector gives identity."""
    r = np.asarray(r, dtype=float)
    angle = np.linalg.norm(r)
    if angle < 1e-14:
        return np.eye(3)
    axis = r / angle
    K = skew(axis)
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)


def rotation_about_axis(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rotation by `angle` about a unit `axis`."""
    return axis_angle_to_matrix(np.asarray(axis, dtype=float) * angle)


def reorthonormalize(R: np.ndarray) -> np.ndarray:
    """Nearest rotation matrix (Frobenius) via SVD; keeps det = +1."""
    U, _, Vt = np.linalg.svd(R)
    D = np.diag([1.0, 1.0, np.sign(np.linalg.det(U @ Vt))])
    return U @ D @ Vt


def rotation_to_rpy(R: np.ndarray) -> tuple[float, float, float]:
    """Roll, pitch, yaw (radians) of R = Rz(yaw) @ Ry(pitch) @ Rx(roll)."""
    pitch = np.arcsin(np.clip(-R[2, 0], -1.0, 1.0))
    if abs(R[2, 0]) < 1.0 - 1e-12:
        roll = np.arctan2(R[2, 1], R[2, 2])
        yaw = np.arctan2(R[1, 0], R[0, 0])
    else:
        # Gimbal lock: fold yaw into roll.
        roll = np.arctan2(-R[1, 2], R[1, 1])
        yaw = 0.0
    return float(roll), float(pitch), float(yaw)


def rotation_log(R: np.ndarray) -> np.ndarray:
    """Axis-angle vector of a rotation matrix (inverse of Rodrigues)."""
    cos_a = np.clip((np.trace(R) - 1.0) / 2.0, -1.0, 1.0)
    angle = np.arccos(cos_a)
    if angle < 1e-12:
        return np.zeros(3)
    if angle > np.pi - 1e-6:
        # Near pi: extract axis from R + I.
        A = (R + np.eye(3)) / 2.0
        axis = np.sqrt(np.maximum(np.diag(A), 0.0))
        # Fix signs from off-diagonals using the largest component.
        k = int(np.argmax(axis))
        for i in range(3):
            if i != k and A[k, i] < 0:
                axis[i] = -axis[i]
        axis /= np.linalg.norm(axis)
        return axis * angle
    w = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    return w * (angle / (2.0 * np.sin(angle)))


@dataclass(frozen=True)
class Pose:
    """Rigid transform: p_parent = rotation @ p_local + position."""

    position: np.ndarray
    rotation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))
        R = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        object.__setattr__(self, "rotation", R)
        err = np.abs(R.T @ R - np.eye(3)).max()
        if err > ORTHONORMAL_TOL or np.linalg.det(R) < 0.0:
            raise ValueError(f"rotation is not orthonormal (max deviation {err:.2e})")
        self.position.setflags(write=False)
        R.setflags(write=False)

    @staticmethod
    def identity() -> "Pose":
        return Pose(np.zeros(3), np.eye(3))

    @staticmethod
    def from_axis_angle(position, axis_angle) -> "Pose":
        return Pose(np.asarray(position, dtype=float), axis_angle_to_matrix(axis_angle))

    def compose(self, other: "Pose") -> "Pose":
        """self applied after other: (self * other)(x) = self(other(x))."""
        return Pose(self.rotation @ other.position + self.position, self.rotation @ other.rotation)

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transform points of shape (3,) or (N, 3)."""
        pts = np.asarray(points, dtype=float)
        return pts @ self.rotation.T + self.position

    def inverse(self) -> "Pose":
        Rinv = self.rotation.T
        return Pose(-(Rinv @ self.position), Rinv)


@dataclass(frozen=True)
class Capsule:
    """Capsule (or sphere when a == b): segment [a, b] inflated by radius."""

    a: np.ndarray
    b: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "a", np.asarray(self.a, dtype=float).reshape(3))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float).reshape(3))
        if self.radius <= 0.0:
            raise ValueError("capsule radius must be positive")

    def transformed(self, pose: Pose, scale: float = 1.0) -> "Capsule":
        return Capsule(pose.apply(self.a * scale), pose.apply(self.b * scale), self.radius * scale)

    def bounding_sphere(self) -> tuple[np.ndarray, float]:
        center = (self.a + self.b) / 2.0
        return center, float(np.linalg.norm(self.b - self.a) / 2.0 + self.radius)

    def max_extent(self) -> float:
        return max(np.linalg.norm(self.a), np.linalg.norm(self.b)) + self.radius


@dataclass(frozen=True)
class OrientedBox:
    """Box with center, half-extents and orientation (box-to-parent)."""

    center: np.ndarray
    half_extents: np.ndarray
    orientation: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).reshape(3))
        object.__setattr__(self, "half_extents", np.asarray(self.half_extents, dtype=float).reshape(3))
        object.__setattr__(self, "orientation", np.asarray(self.orientation, dtype=float).reshape(3, 3))
        if np.any(self.half_extents <= 0.0):
            raise ValueError("box half-extents must be positive")

    def transformed(self, pose: Pose, scale: float = 1.0) -> "OrientedBox":
        return OrientedBox(
            pose.apply(self.center * scale),
            self.half_extents * scale,
            pose.rotation @ self.orientation,
        )

    def bounding_sphere(self) -> tuple[np.ndarray, float]:
        return self.center, float(np.linalg.norm(self.half_extents))

    def max_extent(self) -> float:
        return float(np.linalg.norm(self.center) + np.linalg.norm(self.half_extents))


Primitive = Capsule | OrientedBox
