"""Multi-contact kinetostatic mapping.

From per-contact forces/velocities on the virtual object, compute the
object-level squeeze (internal-force mean) and twist, scale the twist for
the focal-length disparity between the two camera views, redistribute both
to the real-side gripper contacts, and turn the result into joint velocity
and torque references through the arm Jacobian.

Frame conventions: contact forces/velocities are expressed in their own
contact frames whose z axis is the inward object normal; object-level
wrenches/twists are world-frame at the gravity center. The grasp-matrix
blocks therefore rotate world quantities into each contact frame, which is
the unique frame-consistent reading of the block product.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Pose, skew

PINV_RCOND = 1e-10
DAMPING = 1e-6
SINGULARITY_RATIO = 1e-8


@dataclass(frozen=True)
class Contact:
    """One contact: world pose plus contact-frame force/torque/velocities."""

    position: np.ndarray
    orientation: np.ndarray  # contact frame in world
    force: np.ndarray = None
    torque: np.ndarray = None
    linear_velocity: np.ndarray = None
    angular_velocity: np.ndarray = None

    def __post_init__(self):
        def vec(name, v):
            v = np.zeros(3) if v is None else np.asarray(v, dtype=float).reshape(3)
            if not np.all(np.isfinite(v)):
                raise ValueError(f"contact {name} must be finite")
            object.__setattr__(self, name, v)

        vec("position", self.position)
        R = np.asarray(self.orientation, dtype=float).reshape(3, 3)
        if np.abs(R.T @ R - np.eye(3)).max() > 1e-9:
            raise ValueError("contact orientation is not orthonormal")
        object.__setattr__(self, "orientation", R)
        vec("force", self.force)
        vec("torque", self.torque)
        vec("linear_velocity", self.linear_velocity)
        vec("angular_velocity", self.angular_velocity)


@dataclass(frozen=True)
class ContactSet:
    contacts: tuple[Contact, ...]
    object_center: Pose

    def __post_init__(self):
        if len(self.contacts) < 1:
            raise ValueError("contact set must hold at least one contact")

    @property
    def n(self) -> int:
        return len(self.contacts)

    def stacked_forces(self) -> np.ndarray:
        """6n vector of per-contact (force; torque), contact frames."""
        return np.concatenate([np.concatenate([c.force, c.torque]) for c in self.contacts])

    def stacked_velocities(self) -> np.ndarray:
        """6n vector of per-contact (linear; angular), contact frames."""
        return np.concatenate(
            [np.concatenate([c.linear_velocity, c.angular_velocity]) for c in self.contacts]
        )


@dataclass(frozen=True)
class Wrench:
    force: np.ndarray
    torque: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "force", np.asarray(self.force, dtype=float).reshape(3))
        object.__setattr__(self, "torque", np.asarray(self.torque, dtype=float).reshape(3))

    @staticmethod
    def from_vec(v: np.ndarray) -> "Wrench":
        v = np.asarray(v, dtype=float).reshape(6)
        return Wrench(v[:3], v[3:])

    @property
    def vec(self) -> np.ndarray:
        return np.concatenate([self.force, self.torque])


@dataclass(frozen=True)
class Twist:
    linear: np.ndarray
    angular: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "linear", np.asarray(self.linear, dtype=float).reshape(3))
        object.__setattr__(self, "angular", np.asarray(self.angular, dtype=float).reshape(3))

    @staticmethod
    def from_vec(v: np.ndarray) -> "Twist":
        v = np.asarray(v, dtype=float).reshape(6)
        return Twist(v[:3], v[3:])

    @property
    def vec(self) -> np.ndarray:
        return np.concatenate([self.linear, self.angular])


@dataclass(frozen=True)
class GraspMap:
    """Stacked 6n x 6 grasp matrix; block j couples contact j to the object.

    The transpose block sum aggregates per-contact quantities at the object
    center; its pseudoinverse distributes object-level quantities back to
    the contacts (minimum norm).
    """

    G: np.ndarray

    def __post_init__(self):
        G = np.asarray(self.G, dtype=float)
        if G.ndim != 2 or G.shape[1] != 6 or G.shape[0] % 6 != 0 or G.shape[0] == 0:
            raise ValueError(f"grasp map must be 6n x 6, got {G.shape}")
        object.__setattr__(self, "G", G)

    @property
    def n(self) -> int:
        return self.G.shape[0] // 6

    def block(self, j: int) -> np.ndarray:
        return self.G[6 * j : 6 * (j + 1), :]

    def null_projector(self, rcond: float = PINV_RCOND) -> np.ndarray:
        """Orthogonal projector onto the left null space: I - G G+."""
        m = self.G.shape[0]
        return np.eye(m) - self.G @ np.linalg.pinv(self.G, rcond=rcond)

    def transported_wrench(self, lam: np.ndarray) -> np.ndarray:
        """Block sum of per-contact contributions at the object center."""
        return self.G.T @ np.asarray(lam, dtype=float).reshape(-1)


def grasp_block(position: np.ndarray, orientation: np.ndarray, center: np.ndarray) -> np.ndarray:
    """6x6 block [R, 0; R S(p - c), R] with R the world-to-contact rotation."""
    Rwc = np.asarray(orientation, dtype=float).T  # world -> contact
    S = skew(np.asarray(position, dtype=float) - np.asarray(center, dtype=float))
    B = np.zeros((6, 6))
    B[:3, :3] = Rwc
    B[3:, :3] = Rwc @ S
    B[3:, 3:] = Rwc
    return B


def build_grasp_map(contacts: ContactSet) -> GraspMap:
    center = contacts.object_center.position
    blocks = [grasp_block(c.position, c.orientation, center) for c in contacts.contacts]
    return GraspMap(np.vstack(blocks))


def internal_forces(gmap: GraspMap, lam: np.ndarray, rcond: float = PINV_RCOND) -> np.ndarray:
    """Contact-force component with zero transported object wrench."""
    lam = np.asarray(lam, dtype=float).reshape(-1)
    if lam.shape[0] != gmap.G.shape[0]:
        raise ValueError(f"force vector length {lam.shape[0]} != {gmap.G.shape[0]}")
    return gmap.null_projector(rcond) @ lam


def squeeze_force(xi: np.ndarray, n: int) -> Wrench:
    """Block-wise mean of the n per-contact internal contributions."""
    xi = np.asarray(xi, dtype=float).reshape(-1)
    if xi.shape[0] != 6 * n:
        raise ValueError(f"expected length {6 * n}, got {xi.shape[0]}")
    return Wrench.from_vec(xi.reshape(n, 6).mean(axis=0))


def object_twist(gmap: GraspMap, nu: np.ndarray) -> Twist:
    """Object-center generalized velocity: the literal block sum G^T nu."""
    nu = np.asarray(nu, dtype=float).reshape(-1)
    if nu.shape[0] != gmap.G.shape[0]:
        raise ValueError(f"velocity vector length {nu.shape[0]} != {gmap.G.shape[0]}")
    return Twist.from_vec(gmap.G.T @ nu)


@dataclass(frozen=True)
class ScaleMap:
    """Diagonal twist scaling: x/y linear by focal ratio, rest untouched."""

    focal_real: float
    focal_virtual: float

    def __post_init__(self):
        if self.focal_real <= 0.0 or self.focal_virtual <= 0.0:
            raise ValueError("focal lengths must be positive")

    @property
    def ratio(self) -> float:
        return self.focal_real / self.focal_virtual

    @property
    def matrix(self) -> np.ndarray:
        return np.diag([self.ratio, self.ratio, 1.0, 1.0, 1.0, 1.0])


def scale_twist(twist: Twist, k: ScaleMap) -> Twist:
    return Twist.from_vec(k.matrix @ twist.vec)


def pass_squeeze(squeeze: Wrench) -> Wrench:
    """The squeeze maps one-to-one to the real side."""
    return squeeze


@dataclass(frozen=True)
class RealContactTargets:
    lambda_r: np.ndarray       # 6m contact-frame forces
    nu_r: np.ndarray           # 6m contact-frame velocities
    twist_residual: float      # ||G_r^T nu_r - c_r||, nonzero when unattainable


def real_contact_targets(
    gmap_r: GraspMap, squeeze_r: Wrench, twist_r: Twist, rcond: float = PINV_RCOND
) -> RealContactTargets:
    """Redistribute squeeze and twist to the m real contacts.

    Forces: left-null-space projection of the replicated squeeze. Velocities:
    minimum-norm contact velocities realizing the twist; any unattainable
    twist component is reported as a residual, never dropped silently.
    """
    m = gmap_r.n
    gamma = m * np.vstack([np.eye(6)] * m)
    lambda_r = gmap_r.null_projector(rcond) @ (gamma @ squeeze_r.vec)
    GT_pinv = np.linalg.pinv(gmap_r.G.T, rcond=rcond)
    nu_r = GT_pinv @ twist_r.vec
    residual = float(np.linalg.norm(gmap_r.G.T @ nu_r - twist_r.vec))
    return RealContactTargets(lambda_r, nu_r, residual)


@dataclass(frozen=True)
class JointReferences:
    tau: np.ndarray
    qdot: np.ndarray
    damped: bool  # True when the Jacobian was near-singular


def damped_pinv(J: np.ndarray, damping: float = DAMPING) -> np.ndarray:
    JJt = J @ J.T
    return J.T @ np.linalg.inv(JJt + damping**2 * np.eye(J.shape[0]))


def joint_references(
    J: np.ndarray,
    lambda_r: np.ndarray,
    nu_r: np.ndarray,
    gmap_r: GraspMap,
    ee_offset: np.ndarray,
    rcond: float = PINV_RCOND,
    damping: float = DAMPING,
) -> JointReferences:
    """Joint torque/velocity references from real-side contact targets.

    Contact quantities are transported to the object center through the
    grasp map, then rigidly to the end-effector located at center +
    `ee_offset` (world frame); torques go through J^T, velocities through
    the (damped near singularities) pseudoinverse of J.
    """
    J = np.asarray(J, dtype=float)
    r = np.asarray(ee_offset, dtype=float).reshape(3)
    w_obj = gmap_r.transported_wrench(lambda_r)
    t_obj = gmap_r.G.T @ np.asarray(nu_r, dtype=float).reshape(-1)
    f, tq = w_obj[:3], w_obj[3:]
    wrench_ee = np.concatenate([f, tq - np.cross(r, f)])
    v, w = t_obj[:3], t_obj[3:]
    twist_ee = np.concatenate([v + np.cross(w, r), w])

    tau = J.T @ wrench_ee
    sv = np.linalg.svd(J, compute_uv=False)
    damped = bool(sv[-1] < SINGULARITY_RATIO * sv[0])
    if damped:
        qdot = damped_pinv(J, damping) @ twist_ee
    else:
        qdot = np.linalg.pinv(J, rcond=rcond) @ twist_ee
    return JointReferences(tau, qdot, damped)


def virtual_object_state(contacts: ContactSet, rcond: float = PINV_RCOND) -> tuple[Wrench, Twist]:
    """Squeeze and twist of the virtual object from its contact set."""
    gmap = build_grasp_map(contacts)
    xi = internal_forces(gmap, contacts.stacked_forces(), rcond)
    squeeze = squeeze_force(xi, contacts.n)
    twist = object_twist(gmap, contacts.stacked_velocities())
    return squeeze, twist
