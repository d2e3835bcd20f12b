"""Software ray casting of capsule/box primitives through a pinhole camera.

Rays go through pixel centers with camera-frame direction (x/z, y/z, 1),
so the ray parameter t is camera depth directly. A pixel sees a primitive
when the ray's entry/exit interval overlaps [near, far]. Per-primitive
bounding rectangles keep the per-frame cost proportional to the covered
pixels rather than the full resolution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .camera import CameraModel
from .frames import FrameRGBA
from .geometry import Capsule, OrientedBox, Pose, Primitive

_PARALLEL_EPS = 1e-14


def _capsule_interval(cap: Capsule, dirs: np.ndarray):
    """Ray/capsule overlap interval per ray; returns (t_enter, t_exit, valid).

    `cap` is in camera coordinates, rays start at the origin with the given
    (unnormalized) directions of shape (N, 3).
    """
    A, B, r = cap.a, cap.b, cap.radius
    axis = B - A
    L = np.linalg.norm(axis)
    n = dirs.shape[0]
    t_lo = np.full(n, np.inf)
    t_hi = np.full(n, -np.inf)

    def merge(lo, hi, ok):
        nonlocal t_lo, t_hi
        t_lo = np.where(ok, np.minimum(t_lo, lo), t_lo)
        t_hi = np.where(ok, np.maximum(t_hi, hi), t_hi)

    # Sphere caps (a degenerate capsule is a single sphere).
    centers = [A] if L < 1e-12 else [A, B]
    for C in centers:
        a = np.einsum("ij,ij->i", dirs, dirs)
        b = -2.0 * dirs @ C
        c = C @ C - r * r
        disc = b * b - 4.0 * a * c
        ok = disc >= 0.0
        sq = np.sqrt(np.maximum(disc, 0.0))
        merge((-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a), ok)

    if L >= 1e-12:
        u = axis / L
        m = -A  # ray origin minus A
        du = dirs @ u
        mu = m @ u
        w = dirs - du[:, None] * u[None, :]
        v0 = m - mu * u
        a = np.einsum("ij,ij->i", w, w)
        b = 2.0 * w @ v0
        c = v0 @ v0 - r * r
        # Axial band 0 <= mu + t*du <= L as a t-interval.
        safe_du = np.where(np.abs(du) < _PARALLEL_EPS, _PARALLEL_EPS, du)
        tb0 = (0.0 - mu) / safe_du
        tb1 = (L - mu) / safe_du
        band_lo = np.minimum(tb0, tb1)
        band_hi = np.maximum(tb0, tb1)
        parallel = np.abs(du) < _PARALLEL_EPS
        inside_band = (mu >= 0.0) & (mu <= L)
        band_lo = np.where(parallel, np.where(inside_band, -np.inf, np.inf), band_lo)
        band_hi = np.where(parallel, np.where(inside_band, np.inf, -np.inf), band_hi)

        degenerate = a < _PARALLEL_EPS  # ray parallel to the axis
        safe_a = np.where(degenerate, 1.0, a)
        disc = b * b - 4.0 * safe_a * c
        sq = np.sqrt(np.maximum(disc, 0.0))
        q_lo = (-b - sq) / (2.0 * safe_a)
        q_hi = (-b + sq) / (2.0 * safe_a)
        q_lo = np.where(degenerate, np.where(c <= 0.0, -np.inf, np.inf), q_lo)
        q_hi = np.where(degenerate, np.where(c <= 0.0, np.inf, -np.inf), q_hi)
        ok = np.where(degenerate, c <= 0.0, disc >= 0.0)
        lo = np.maximum(q_lo, band_lo)
        hi = np.minimum(q_hi, band_hi)
        merge(lo, hi, ok & (lo <= hi))

    valid = t_lo <= t_hi
    return t_lo, t_hi, valid


def _box_interval(box: OrientedBox, dirs: np.ndarray):
    """Ray/box overlap interval per ray via the slab method in box frame."""
    R = box.orientation
    o = -(R.T @ box.center)
    d = dirs @ R
    h = box.half_extents
    t_lo = np.full(dirs.shape[0], -np.inf)
    t_hi = np.full(dirs.shape[0], np.inf)
    for k in range(3):
        dk = d[:, k]
        parallel = np.abs(dk) < _PARALLEL_EPS
        safe = np.where(parallel, _PARALLEL_EPS, dk)
        t1 = (-h[k] - o[k]) / safe
        t2 = (h[k] - o[k]) / safe
        lo = np.minimum(t1, t2)
        hi = np.maximum(t1, t2)
        inside = np.abs(o[k]) <= h[k]
        lo = np.where(parallel, np.where(inside, -np.inf, np.inf), lo)
        hi = np.where(parallel, np.where(inside, np.inf, -np.inf), hi)
        t_lo = np.maximum(t_lo, lo)
        t_hi = np.minimum(t_hi, hi)
    valid = t_lo <= t_hi
    return t_lo, t_hi, valid


def _pixel_rect(cam: CameraModel, center_cam: np.ndarray, radius: float):
    """Conservative pixel rectangle covering a camera-frame bounding sphere.

    Returns (x0, x1, y0, y1) half-open, or None when the sphere cannot reach
    the [near, far] depth band.
    """
    X, Y = cam.resolution
    cz = center_cam[2]
    if cz + radius < cam.near or cz - radius > cam.far or cz + radius <= 0.0:
        return None
    if cz - radius <= 1e-9:
        return (0, X, 0, Y)
    f = cam.focal * cam.pixels_per_unit

    def bound(cc):
        corners = [(cc - radius) / (cz - radius), (cc - radius) / (cz + radius),
                   (cc + radius) / (cz - radius), (cc + radius) / (cz + radius)]
        return min(corners), max(corners)

    sx0, sx1 = bound(center_cam[0])
    sy0, sy1 = bound(center_cam[1])
    x0 = max(0, int(np.floor(X / 2.0 + f * sx0)))
    x1 = min(X, int(np.ceil(X / 2.0 + f * sx1)) + 1)
    y0 = max(0, int(np.floor(Y / 2.0 + f * sy0)))
    y1 = min(Y, int(np.ceil(Y / 2.0 + f * sy1)) + 1)
    if x0 >= x1 or y0 >= y1:
        return None
    return (x0, x1, y0, y1)


def _to_camera(prim: Primitive, world_to_cam: Pose) -> Primitive:
    return prim.transformed(world_to_cam)


_ray_cache: dict = {}


def _rays(cam: CameraModel) -> np.ndarray:
    key = (cam.resolution, cam.focal, cam.sensor_width)
    if key not in _ray_cache:
        if len(_ray_cache) > 8:
            _ray_cache.clear()
        _ray_cache[key] = cam.ray_directions()
    return _ray_cache[key]


def hit_mask(primitives: list[Primitive], cam: CameraModel) -> np.ndarray:
    """Boolean (Y, X) array: ray through the pixel center meets some primitive
    within the [near, far] depth band."""
    X, Y = cam.resolution
    dirs = _rays(cam)
    hits = np.zeros((Y, X), dtype=bool)
    for prim in primitives:
        pc = _to_camera(prim, cam.pose)
        center, radius = pc.bounding_sphere()
        rect = _pixel_rect(cam, center, radius)
        if rect is None:
            continue
        x0, x1, y0, y1 = rect
        sub = dirs[y0:y1, x0:x1].reshape(-1, 3)
        if isinstance(pc, Capsule):
            lo, hi, ok = _capsule_interval(pc, sub)
        else:
            lo, hi, ok = _box_interval(pc, sub)
        hit = ok & (hi >= cam.near) & (lo <= cam.far)
        hits[y0:y1, x0:x1] |= hit.reshape(y1 - y0, x1 - x0)
    return hits


@dataclass(frozen=True)
class Backdrop:
    """Infinite textured plane behind the scene, checkered in its own axes.

    Rendered without far clipping so misses against scene primitives still
    produce a structured background.
    """

    point: np.ndarray
    normal: np.ndarray
    u_axis: np.ndarray
    checker: float = 0.08
    color_a: tuple = (96, 96, 104, 255)
    color_b: tuple = (140, 140, 150, 255)

    def __post_init__(self):
        object.__setattr__(self, "point", np.asarray(self.point, dtype=float).reshape(3))
        n = np.asarray(self.normal, dtype=float).reshape(3)
        object.__setattr__(self, "normal", n / np.linalg.norm(n))
        u = np.asarray(self.u_axis, dtype=float).reshape(3)
        u = u - (u @ self.normal) * self.normal
        object.__setattr__(self, "u_axis", u / np.linalg.norm(u))


def _shade_backdrop(bd: Backdrop, cam: CameraModel, dirs_flat: np.ndarray) -> np.ndarray:
    """RGBA of the backdrop per ray (flat N x 4); rays that miss get color_a."""
    cam_to_world = cam.pose.inverse()
    o = cam_to_world.position
    d = dirs_flat @ cam_to_world.rotation.T
    n, p0 = bd.normal, bd.point
    denom = d @ n
    safe = np.where(np.abs(denom) < _PARALLEL_EPS, _PARALLEL_EPS, denom)
    t = ((p0 - o) @ n) / safe
    hit = (np.abs(denom) >= _PARALLEL_EPS) & (t > 0.0)
    pts = o[None, :] + t[:, None] * d
    v_axis = np.cross(n, bd.u_axis)
    uu = (pts - p0) @ bd.u_axis
    vv = (pts - p0) @ v_axis
    cell = (np.floor(uu / bd.checker) + np.floor(vv / bd.checker)).astype(np.int64) % 2
    out = np.empty((dirs_flat.shape[0], 4), dtype=np.uint8)
    ca = np.asarray(bd.color_a, dtype=np.uint8)
    cb = np.asarray(bd.color_b, dtype=np.uint8)
    out[:] = ca
    out[hit & (cell == 1)] = cb
    return out


@dataclass(frozen=True)
class SceneItem:
    primitive: Primitive  # world frame
    color: tuple = (255, 255, 255, 255)


def render_items(
    items: list[SceneItem],
    cam: CameraModel,
    backdrop: Backdrop | None = None,
    base: FrameRGBA | None = None,
) -> FrameRGBA:
    """Nearest-hit flat-shaded render of world-frame primitives.

    Pixels not covered by any primitive show `backdrop` if given, else the
    `base` frame if given, else opaque black. Entry depths are clamped to the
    near plane so a primitive straddling it still wins the depth test.
    """
    X, Y = cam.resolution
    dirs = _rays(cam)
    if base is not None:
        if (base.height, base.width) != (Y, X):
            raise ValueError("base frame resolution does not match camera")
        out = base.pixels.copy()
    elif backdrop is not None:
        out = _shade_backdrop(backdrop, cam, dirs.reshape(-1, 3)).reshape(Y, X, 4)
    else:
        out = np.zeros((Y, X, 4), dtype=np.uint8)
        out[:, :, 3] = 255
    depth = np.full((Y, X), np.inf)
    for item in items:
        pc = _to_camera(item.primitive, cam.pose)
        center, radius = pc.bounding_sphere()
        rect = _pixel_rect(cam, center, radius)
        if rect is None:
            continue
        x0, x1, y0, y1 = rect
        sub = dirs[y0:y1, x0:x1].reshape(-1, 3)
        if isinstance(pc, Capsule):
            lo, hi, ok = _capsule_interval(pc, sub)
        else:
            lo, hi, ok = _box_interval(pc, sub)
        hit = ok & (hi >= cam.near) & (lo <= cam.far)
        t = np.maximum(lo, cam.near)
        shape = (y1 - y0, x1 - x0)
        hit = hit.reshape(shape)
        t = t.reshape(shape)
        dwin = depth[y0:y1, x0:x1]
        closer = hit & (t < dwin)
        dwin[closer] = t[closer]
        out[y0:y1, x0:x1][closer] = np.asarray(item.color, dtype=np.uint8)
    return FrameRGBA(out)
