"""Independent brute-force oracles used by the tests.

These deliberately do not share formulations with the library:
- mask oracle: per-pixel ray/capsule hit decided by minimizing the squared
  ray-to-segment distance over the (depth, segment-parameter) box in closed
  form, instead of the library's entry/exit interval intersection;
- wrench/twist oracle: naive per-contact block accumulation with explicit
  python loops.
"""

import numpy as np

from armcloak.camera import CameraModel
from armcloak.geometry import Capsule


def ray_dirs(cam: CameraModel) -> np.ndarray:
    """Pixel-center ray directions (x/z, y/z, 1), shape (Y, X, 3)."""
    X, Y = cam.resolution
    k = cam.focal * cam.resolution[0] / cam.sensor_width
    sx = ((np.arange(X) + 0.5) - X / 2.0) / k
    sy = ((np.arange(Y) + 0.5) - Y / 2.0) / k
    d = np.empty((Y, X, 3))
    d[:, :, 0] = sx[None, :]
    d[:, :, 1] = sy[:, None]
    d[:, :, 2] = 1.0
    return d


def capsule_hits(cap_cam: Capsule, dirs: np.ndarray, near: float, far: float) -> np.ndarray:
    """True where the depth-clipped pixel ray passes within the capsule radius.

    Minimizes f(t, s) = |t d - (A + s (B - A))|^2 over [near, far] x [0, 1]:
    the convex quadratic attains its constrained minimum at the interior
    stationary point or on one of the four clamped edges.
    """
    A, u = cap_cam.a, cap_cam.b - cap_cam.a
    d = dirs
    D = (d * d).sum(axis=2)
    U = float(u @ u)
    C = d @ u
    E = d @ A
    F = float(u @ A)
    AA = float(A @ A)

    def f(t, s):
        return t * t * D - 2.0 * t * E - 2.0 * t * s * C + 2.0 * s * F + s * s * U + AA

    candidates = []
    # interior stationary point
    den = D * U - C * C
    safe = den > 1e-18
    t_i = np.where(safe, (E * U - C * F) / np.where(safe, den, 1.0), np.nan)
    s_i = np.where(safe & (U > 0), (t_i * C - F) / max(U, 1e-300), np.nan)
    if U == 0.0:
        t_i = E / D
        s_i = np.zeros_like(t_i)
    feas = (t_i >= near) & (t_i <= far) & (s_i >= 0.0) & (s_i <= 1.0)
    candidates.append(np.where(feas, f(np.nan_to_num(t_i), np.nan_to_num(s_i)), np.inf))
    # s = 0 and s = 1 edges, t clamped
    for s_val in (0.0, 1.0):
        t_e = np.clip((E + s_val * C) / D, near, far)
        candidates.append(f(t_e, s_val))
    # t = near and t = far edges, s clamped
    for t_val in (near, far):
        if U > 0:
            s_e = np.clip((t_val * C - F) / U, 0.0, 1.0)
        else:
            s_e = np.zeros_like(C)
        candidates.append(f(t_val, s_e))

    best = np.min(np.stack(candidates), axis=0)
    return best <= cap_cam.radius**2


def mask_oracle(primitives, cam: CameraModel) -> np.ndarray:
    """Per-pixel hit-any-primitive mask; capsule primitives only."""
    dirs = ray_dirs(cam)
    Y, X = dirs.shape[:2]
    hit = np.zeros((Y, X), dtype=bool)
    for prim in primitives:
        if not isinstance(prim, Capsule):
            raise NotImplementedError("oracle covers capsules only")
        cap_cam = Capsule(cam.pose.apply(prim.a), cam.pose.apply(prim.b), prim.radius)
        hit |= capsule_hits(cap_cam, dirs, cam.near, cam.far)
    return hit


def transported_wrench_oracle(contacts, center: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """Naive per-contact accumulation of G^T lambda, block by block."""
    out = np.zeros(6)
    for j, c in enumerate(contacts):
        Rwc = c.orientation.T
        S = np.array(
            [
                [0.0, -(c.position - center)[2], (c.position - center)[1]],
                [(c.position - center)[2], 0.0, -(c.position - center)[0]],
                [-(c.position - center)[1], (c.position - center)[0], 0.0],
            ]
        )
        B = np.zeros((6, 6))
        B[:3, :3] = Rwc
        B[3:, :3] = Rwc @ S
        B[3:, 3:] = Rwc
        out += B.T @ lam[6 * j : 6 * j + 6]
    return out


def fk_matrix_oracle(chain, q) -> list[np.ndarray]:
    """Naive 4x4 homogeneous matrix-chain forward kinematics."""

    def hom(R, p):
        T = np.eye(4)
        T[:3, :3] = R
        T[:3, 3] = p
        return T

    def rot(axis, angle):
        axis = np.asarray(axis, dtype=float)
        K = np.array(
            [
                [0.0, -axis[2], axis[1]],
                [axis[2], 0.0, -axis[0]],
                [-axis[1], axis[0], 0.0],
            ]
        )
        return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)

    T = hom(chain.base.rotation, chain.base.position)
    out = []
    for joint, qi in zip(chain.joints, q):
        T = T @ hom(joint.origin.rotation, joint.origin.position) @ hom(rot(joint.axis, qi), np.zeros(3))
        out.append(T.copy())
    out.append(T @ hom(chain.ee_offset.rotation, chain.ee_offset.position))
    return out
