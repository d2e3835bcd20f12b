"""Pinhole camera model and the interaction-layer projection matrix.

Camera frame: +x right, +y down (image rows), +z forward. `pose` is the
world-to-camera transform, so pose.apply(p_world) is in camera coordinates.

Pixel mapping: a camera-space point (x, y, z) lands at
    u = X/2 + focal * (x / z) * (X / sensor_width)
    v = Y/2 + focal * (y / z) * (X / sensor_width)
with focal and sensor_width in scene length units. The default sensor
width equals the horizontal field at unit magnification (a 0.75 focal at
0.75 depth maps the full 0.75-wide field onto the X pixels).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import Pose


@dataclass(frozen=True)
class CameraModel:
    focal: float
    resolution: tuple[int, int]      # (X, Y) pixels
    near: float
    far: float
    pose: Pose = field(default_factory=Pose.identity)  # world-to-camera
    sensor_width: float = 0.75

    def __post_init__(self):
        if not (0.0 < self.near < self.far):
            raise ValueError(f"camera requires 0 < near < far (got {self.near}, {self.far})")
        if self.focal <= 0.0:
            raise ValueError("focal must be positive")
        X, Y = self.resolution
        if X < 1 or Y < 1:
            raise ValueError("resolution must be at least 1x1")

    @staticmethod
    def looking(position, x_axis, y_axis, z_axis, **kwargs) -> "CameraModel":
        """Camera placed at `position` with the given world-frame axes."""
        R_c2w = np.column_stack([x_axis, y_axis, z_axis]).astype(float)
        cam_to_world = Pose(np.asarray(position, dtype=float), R_c2w)
        return CameraModel(pose=cam_to_world.inverse(), **kwargs)

    @property
    def pixels_per_unit(self) -> float:
        return self.resolution[0] / self.sensor_width

    def ray_directions(self) -> np.ndarray:
        """Camera-frame direction (x/z, y/z, 1) per pixel center, shape (Y, X, 3).

        The z component is 1, so the ray parameter equals camera depth.
        """
        X, Y = self.resolution
        us = (np.arange(X) + 0.5) - X / 2.0
        vs = (np.arange(Y) + 0.5) - Y / 2.0
        sx = us / (self.focal * self.pixels_per_unit)
        sy = vs / (self.focal * self.pixels_per_unit)
        dirs = np.empty((Y, X, 3))
        dirs[:, :, 0] = sx[None, :]
        dirs[:, :, 1] = sy[:, None]
        dirs[:, :, 2] = 1.0
        return dirs

    def project(self, points_world: np.ndarray) -> np.ndarray:
        """Pixel coordinates (u, v) of world points; depth must be positive."""
        pts = self.pose.apply(points_world)
        pts = np.atleast_2d(pts)
        X, Y = self.resolution
        ppu = self.pixels_per_unit
        z = pts[:, 2]
        u = X / 2.0 + self.focal * (pts[:, 0] / z) * ppu
        v = Y / 2.0 + self.focal * (pts[:, 1] / z) * ppu
        out = np.column_stack([u, v])
        return out[0] if np.asarray(points_world).ndim == 1 else out

    def unproject(self, pixel: tuple[float, float], depth: float) -> np.ndarray:
        """Camera-frame point at `depth` whose projection is `pixel`."""
        X, Y = self.resolution
        ppu = self.pixels_per_unit
        x = (pixel[0] - X / 2.0) * depth / (self.focal * ppu)
        y = (pixel[1] - Y / 2.0) * depth / (self.focal * ppu)
        return np.array([x, y, depth])

    def depth_of(self, point_world: np.ndarray) -> float:
        return float(self.pose.apply(point_world)[2])


def projection_matrix(focal: float, near: float, far: float, width: int, height: int) -> np.ndarray:
    """Interaction-layer 4x4 perspective matrix.

    Entries follow the OpenGL layout with the aspect folded into the first
    diagonal term; near/far and focal must share one length unit.
    """
    if not (0.0 < near < far):
        raise ValueError("requires 0 < near < far")
    return np.array(
        [
            [(height / width) * focal, 0.0, 0.0, 0.0],
            [0.0, focal, 0.0, 0.0],
            [0.0, 0.0, (far + near) / (near - far), 2.0 * far * near / (near - far)],
            [0.0, 0.0, -1.0, 0.0],
        ]
    )
