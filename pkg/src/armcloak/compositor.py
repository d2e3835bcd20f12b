"""Frame fusion and digital-twin placement.

The live frame and the masked static background are fused per pixel to
erase the robot; the twin is then positioned/scaled from the real object's
pixel anchor via the perspective relation and drawn on top, followed by an
optional virtual-hand overlay. Draw order is fixed: panel, twin, hand.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .camera import CameraModel, projection_matrix
from .frames import BinaryMask, FrameRGBA
from .objects import RigidObjectState
from .render import SceneItem, render_items


def _check_dims(mask: BinaryMask, *frames: FrameRGBA) -> None:
    for f in frames:
        if not mask.matches(f):
            raise ValueError(
                f"dimension mismatch: mask {mask.width}x{mask.height} vs "
                f"frame {f.width}x{f.height}"
            )


def compose_frame(live: FrameRGBA, background: FrameRGBA, mask: BinaryMask) -> FrameRGBA:
    """Per pixel: background where the mask bit is set, live elsewhere.

    Output alpha is 255 everywhere.
    """
    _check_dims(mask, live, background)
    m = mask.bits[:, :, None]
    out = np.where(m, background.pixels, live.pixels).copy()
    out[:, :, 3] = 255
    return FrameRGBA(out)


def masked_overlay(background: FrameRGBA, mask: BinaryMask) -> FrameRGBA:
    """Background rgb with alpha gated by the mask (0 outside, alpha_H inside)."""
    _check_dims(mask, background)
    out = background.pixels.copy()
    out[:, :, 3] = np.where(mask.bits, background.pixels[:, :, 3], 0)
    return FrameRGBA(out)


def alpha_over(top: FrameRGBA, bottom: FrameRGBA) -> FrameRGBA:
    """Standard over operator on rgb; exact for alpha values 0 and 255."""
    if (top.height, top.width) != (bottom.height, bottom.width):
        raise ValueError("dimension mismatch in alpha_over")
    a = top.pixels[:, :, 3:4].astype(np.uint16)
    top_rgb = top.pixels[:, :, :3].astype(np.uint16)
    bot_rgb = bottom.pixels[:, :, :3].astype(np.uint16)
    rgb = (top_rgb * a + bot_rgb * (255 - a) + 127) // 255
    out = np.dstack([rgb.astype(np.uint8), np.full((top.height, top.width), 255, np.uint8)])
    return FrameRGBA(out)


@dataclass(frozen=True)
class TwinPlacement:
    """Twin center/scale plus its clip-space image under the 4x4 projection."""

    center: np.ndarray        # (x_v, y_v, z_v); z_v = positive camera depth
    scale: float              # s_v, uniform geometric scale of the twin
    clip: np.ndarray          # (x_v', y_v', z_v', s_v')
    anchor: tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).reshape(3))
        object.__setattr__(self, "clip", np.asarray(self.clip, dtype=float).reshape(4))
        if self.scale <= 0.0:
            raise ValueError("twin scale must be positive")


def pixel_map(clip: np.ndarray, width: int, height: int) -> tuple[float, float]:
    """Pixel coordinates recovered from clip values via the anchor relation."""
    xv, yv, _, sv = clip
    return ((xv + 1.0) * width / (2.0 * sv), (yv + 1.0) * height / (2.0 * sv))


def place_twin(
    pixel_anchor: tuple[float, float],
    z_v: float,
    cam_i: CameraModel,
    real_cam: CameraModel | None = None,
    real_depth: float | None = None,
) -> TwinPlacement:
    """Solve the twin center so its clip-space image reprojects to the anchor.

    z_v is the chosen twin depth (positive, inside the camera's depth band,
    in front of the panel at the far plane). When the real camera and the
    real object's depth are supplied, the scale makes the twin's rendered
    pixel footprint match the real object's.
    """
    X, Y = cam_i.resolution
    x_a, y_a = pixel_anchor
    if not (0.0 <= x_a <= X and 0.0 <= y_a <= Y):
        raise ValueError(f"anchor {pixel_anchor} outside the {X}x{Y} image")
    if not (cam_i.near < z_v < cam_i.far):
        raise ValueError(
            f"twin depth {z_v} violates the panel constraint "
            f"(must lie inside ({cam_i.near}, {cam_i.far}))"
        )
    phi = cam_i.focal
    # Invert the anchor relation given s_v' = z_v.
    x_v = (2.0 * z_v * x_a / X - 1.0) * X / (Y * phi)
    y_v = (2.0 * z_v * y_a / Y - 1.0) / phi

    if real_cam is not None and real_depth is not None:
        if real_depth <= 0.0:
            raise ValueError("real object depth must be positive")
        s_v = (z_v * real_cam.focal * real_cam.pixels_per_unit) / (
            real_depth * cam_i.focal * cam_i.pixels_per_unit
        )
    else:
        s_v = 1.0

    M = projection_matrix(phi, cam_i.near, cam_i.far, X, Y)
    clip = M @ np.array([x_v, y_v, -z_v, s_v])
    return TwinPlacement(np.array([x_v, y_v, z_v]), s_v, clip, (float(x_a), float(y_a)))


def twin_render_pose(placement: TwinPlacement, cam_i: CameraModel, orientation: np.ndarray):
    """World pose used to draw the twin: the anchor unprojected to depth z_v.

    The clip-space solution fixes the placement algebra; the ray-cast
    renderer needs the metric center whose pinhole projection is the anchor.
    """
    from .geometry import Pose

    center_cam = cam_i.unproject(placement.anchor, placement.center[2])
    center_world = cam_i.pose.inverse().apply(center_cam)
    return Pose(center_world, orientation)


def render_scene(
    composited: FrameRGBA,
    twin: RigidObjectState,
    placement: TwinPlacement,
    cam_i: CameraModel,
    hand_overlay: FrameRGBA | None = None,
) -> FrameRGBA:
    """Draw the placed twin over the fused frame, then the hand overlay."""
    pose = twin_render_pose(placement, cam_i, twin.pose.rotation)
    items = [
        SceneItem(p.transformed(pose, placement.scale), tuple(twin.color))
        for p in twin.geometry
    ]
    out = render_items(items, cam_i, base=composited)
    if hand_overlay is not None:
        out = alpha_over(hand_overlay, out)
    return out
