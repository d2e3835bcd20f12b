"""End-to-end simulation loop.

Per step: the virtual contact rows give the object squeeze and twist; the
twist is scaled for the focal disparity and redistributed to the gripper
contacts; joint references drive the arm through a velocity-clamped,
latency-injected tracking controller; the twin integrates the virtual
twist. The frame pipeline (mask, fusion, twin placement, overlay render)
runs on the resulting states, and twin-vs-real pose errors feed the
metrics report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .camera import CameraModel
from .compositor import compose_frame, place_twin, render_scene
from .config import ScenarioConfig
from .frames import BinaryMask, FrameRGBA
from .geometry import (
    Pose,
    axis_angle_to_matrix,
    reorthonormalize,
    rotation_log,
    rotation_to_rpy,
)
from .grasp_mapping import (
    Contact,
    ContactSet,
    ScaleMap,
    Twist,
    build_grasp_map,
    joint_references,
    pass_squeeze,
    real_contact_targets,
    scale_twist,
    virtual_object_state,
)
from .kinematics import JointState, forward_kinematics, jacobian, world_primitives
from .objects import RigidObjectState
from .render import SceneItem, render_items
from .mask_service import service_mask
from .trajectory import ContactRow, read_trajectory


def step_twin(state: RigidObjectState, twist: Twist, dt: float) -> RigidObjectState:
    """Explicit Euler pose integration with rotation re-orthonormalization."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if not (np.all(np.isfinite(twist.linear)) and np.all(np.isfinite(twist.angular))):
        raise ValueError("twist must be finite")
    p = state.pose.position + twist.linear * dt
    R = reorthonormalize(axis_angle_to_matrix(twist.angular * dt) @ state.pose.rotation)
    return RigidObjectState(Pose(p, R), state.geometry, state.color)


@dataclass
class TrackingController:
    """Velocity tracking with command transport delay and an ISO speed clamp.

    Commands pass through a FIFO of ceil(latency/dt) steps; the delayed
    command is scaled down uniformly whenever the end-effector linear speed
    J(q) qdot would exceed the clamp; joints at their limits get their
    velocity zeroed (and the event flagged) before integration.
    """

    chain: object
    clamp: float
    latency: float
    dt: float
    _fifo: list = field(default_factory=list)

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        delay_steps = int(math.ceil(self.latency / self.dt - 1e-12)) if self.latency > 0 else 0
        self._fifo = [np.zeros(self.chain.dof) for _ in range(delay_steps)]

    def step(self, state: JointState, qdot_cmd: np.ndarray):
        """Returns (new_state, realized_speed, limit_hits, saturated)."""
        qdot_cmd = np.asarray(qdot_cmd, dtype=float).reshape(self.chain.dof)
        self._fifo.append(qdot_cmd)
        qdot = self._fifo.pop(0).copy()

        limit_hits = []
        for i, joint in enumerate(self.chain.joints):
            lo, hi = joint.limits
            q_next = state.q[i] + qdot[i] * self.dt
            if q_next < lo or q_next > hi:
                qdot[i] = 0.0
                limit_hits.append(i)

        J = jacobian(self.chain, state.q, enforce_limits=False)
        speed = float(np.linalg.norm((J @ qdot)[:3]))
        saturated = speed > self.clamp
        if saturated:
            qdot = qdot * (self.clamp / speed)
            speed = float(np.linalg.norm((J @ qdot)[:3]))
        q_new = state.q + qdot * self.dt
        return JointState(q_new, qdot, state.tau), speed, limit_hits, saturated


@dataclass
class MetricsReport:
    """Per-frame twin-vs-real errors plus the across-trials summary."""

    times: np.ndarray            # (frames,)
    pos_err: np.ndarray          # (trials, frames) meters
    rpy_err: np.ndarray          # (trials, frames, 3) degrees

    @property
    def trials(self) -> int:
        return self.pos_err.shape[0]

    @property
    def frames(self) -> int:
        return self.pos_err.shape[1]

    def rmse_pos(self) -> tuple[float, float]:
        e = self.pos_err.ravel()
        return float(np.sqrt(np.mean(e**2))), float(np.std(e))

    def rmse_rpy(self) -> list[tuple[float, float]]:
        out = []
        for k in range(3):
            e = self.rpy_err[:, :, k].ravel()
            out.append((float(np.sqrt(np.mean(e**2))), float(np.std(np.abs(e)))))
        return out

    def summary_text(self) -> str:
        p, ps = self.rmse_pos()
        (r, rs), (pi, pis), (y, ys) = self.rmse_rpy()
        return (
            f"position RMSE: {p:.4f} ± {ps:.4f} m; "
            f"roll/pitch/yaw RMSE: {r:.2f} ± {rs:.2f}, "
            f"{pi:.2f} ± {pis:.2f}, {y:.2f} ± {ys:.2f} deg"
        )


def _wrap_deg(d: np.ndarray) -> np.ndarray:
    return (d + 180.0) % 360.0 - 180.0


def compute_metrics(twin_traj, real_traj, dt: float) -> MetricsReport:
    """Errors between time-aligned pose trajectories (single trial).

    Position error is the Euclidean distance of the gravity centers;
    angular errors are per-axis roll/pitch/yaw differences (Z-Y-X
    convention) in degrees.
    """
    if len(twin_traj) != len(real_traj):
        raise ValueError(f"trajectory length mismatch: {len(twin_traj)} vs {len(real_traj)}")
    n = len(twin_traj)
    pos = np.empty(n)
    rpy = np.empty((n, 3))
    for i, (a, b) in enumerate(zip(twin_traj, real_traj)):
        pos[i] = np.linalg.norm(a.position - b.position)
        ra = np.degrees(rotation_to_rpy(a.rotation))
        rb = np.degrees(rotation_to_rpy(b.rotation))
        rpy[i] = _wrap_deg(np.asarray(ra) - np.asarray(rb))
    times = np.arange(n) * dt
    return MetricsReport(times, pos[None, :], rpy[None, :, :])


def merge_metrics(reports: list[MetricsReport]) -> MetricsReport:
    times = reports[0].times
    return MetricsReport(
        times,
        np.vstack([r.pos_err for r in reports]),
        np.concatenate([r.rpy_err for r in reports], axis=0),
    )


class FramePipeline:
    """Per-frame mask -> fuse -> place -> overlay pipeline for one scenario."""

    def __init__(self, cfg: ScenarioConfig, background: FrameRGBA):
        self.cfg = cfg
        self.background = background
        # The static backdrop renders once; per-frame renders draw on top.
        self.backdrop_base = render_items([], cfg.cam_real, backdrop=cfg.backdrop)
        h = max(p.max_extent() for p in cfg.object_geometry)
        cam_i = cfg.cam_interaction
        if cfg.twin_depth is not None:
            self.z_v = cfg.twin_depth
        else:
            # Midway between camera and panel (far plane), pulled back by the
            # object's half-extent, clamped into the valid depth band.
            lo = cam_i.near + h + 0.01
            hi = cam_i.far - h - 0.01
            self.z_v = float(np.clip(cam_i.far / 2.0 - h, min(lo, hi), max(lo, hi)))
        if not (cam_i.near < self.z_v < cam_i.far):
            raise ValueError(f"twin depth {self.z_v} outside the interaction depth band")

    def shift_mask(self, mask: BinaryMask) -> BinaryMask:
        dx, dy = self.cfg.misregistration
        if dx == 0 and dy == 0:
            return mask
        bits = np.zeros_like(mask.bits)
        src = mask.bits
        h, w = src.shape
        ys = slice(max(0, dy), min(h, h + dy))
        xs = slice(max(0, dx), min(w, w + dx))
        yd = slice(max(0, -dy), min(h, h - dy))
        xd = slice(max(0, -dx), min(w, w - dx))
        bits[ys, xs] = src[yd, xd]
        return BinaryMask(bits)

    def render_frame(
        self,
        q: np.ndarray,
        real_obj: RigidObjectState,
        twin: RigidObjectState,
        hand_overlay: FrameRGBA | None = None,
    ):
        """Returns (display frame, placement, mask)."""
        cfg = self.cfg
        mask = self.shift_mask(service_mask(cfg.chain, q, cfg.cam_service, cfg.ranges))
        live_items = [SceneItem(p) for p in world_primitives(cfg.chain, q, enforce_limits=False)]
        live_items += [SceneItem(p, tuple(real_obj.color)) for p in real_obj.world_primitives()]
        live = render_items(live_items, cfg.cam_real, base=self.backdrop_base)
        fused = compose_frame(live, self.background, mask)
        anchor = cfg.cam_real.project(real_obj.pose.position)
        X, Y = cfg.cam_real.resolution
        anchor = (float(np.clip(anchor[0], 0.0, X)), float(np.clip(anchor[1], 0.0, Y)))
        depth = cfg.cam_real.depth_of(real_obj.pose.position)
        placement = place_twin(anchor, self.z_v, cfg.cam_interaction, cfg.cam_real, depth)
        out = render_scene(fused, twin, placement, cfg.cam_interaction, hand_overlay)
        return out, placement, mask


def synthesize_background(cfg: ScenarioConfig, obj: RigidObjectState) -> FrameRGBA:
    """Robot-free capture: backdrop plus the object at its initial pose."""
    items = [SceneItem(p, tuple(obj.color)) for p in obj.world_primitives()]
    return render_items(items, cfg.cam_real, backdrop=cfg.backdrop)


def initial_object_pose(cfg: ScenarioConfig) -> Pose:
    if cfg.object_initial_pose is not None:
        return cfg.object_initial_pose
    ee = forward_kinematics(cfg.chain, cfg.q0)[-1]
    return ee.compose(cfg.object_in_ee)


@dataclass
class TrialTrace:
    twin_traj: list
    real_traj: list
    realized_speeds: np.ndarray
    saturation_steps: int
    limit_hits: int
    damped_steps: int
    commanded_twists: list


@dataclass
class ScenarioResult:
    metrics: MetricsReport
    traces: list[TrialTrace]
    placements: list  # (t, x_v, y_v, z_v, s_v) for rendered frames
    frames_rendered: int

    @property
    def max_realized_speed(self) -> float:
        return float(max(t.realized_speeds.max() for t in self.traces))


def _pose_error(target: Pose, actual: Pose) -> np.ndarray:
    lin = target.position - actual.position
    ang = rotation_log(target.rotation @ actual.rotation.T)
    return np.concatenate([lin, ang])


def run_scenario(
    cfg: ScenarioConfig,
    frame_sink=None,
    frames_range: tuple[int, int] | None = None,
    render: bool = True,
    hand_loader=None,
) -> ScenarioResult:
    """Run all trials; frames render for trial 0 only and go to `frame_sink`.

    frame_sink(index, frame, mask) persists outputs; hand_loader(index)
    may supply an RGBA hand sprite for the overlay.
    """
    traj_frames = read_trajectory(cfg.resolve_path(cfg.trajectory_path))
    steps = int(round(cfg.duration / cfg.dt))
    if len(traj_frames) < steps:
        steps = len(traj_frames)

    rng = np.random.default_rng(cfg.seed)
    obj0 = initial_object_pose(cfg)
    k = ScaleMap(cfg.cam_real.focal, cfg.cam_interaction.focal)

    reports = []
    traces = []
    placements = []
    frames_rendered = 0

    for trial in range(cfg.trials):
        # Trial 0 runs the nominal trajectory; later trials jitter the speed.
        jitter = 1.0 if trial == 0 else float(1.0 + 0.05 * rng.standard_normal())
        state = JointState.resting(cfg.q0)
        ee = forward_kinematics(cfg.chain, state.q)[-1]
        real_obj = RigidObjectState(ee.compose(cfg.object_in_ee), cfg.object_geometry, cfg.object_color)
        twin = RigidObjectState(obj0, cfg.object_geometry, cfg.object_color)
        reference = real_obj.pose  # real-side reference integrates the scaled twist
        controller = TrackingController(cfg.chain, cfg.clamp, cfg.latency, cfg.dt)
        pipeline = None
        if render and trial == 0:
            if cfg.background_path is not None:
                from .netpbm import read_frame

                background = read_frame(cfg.resolve_path(cfg.background_path))
            else:
                background = synthesize_background(cfg, real_obj)
            pipeline = FramePipeline(cfg, background)

        twin_traj = []
        real_traj = []
        speeds = np.zeros(steps)
        saturations = 0
        limit_hits = 0
        damped_steps = 0
        cmd_twists = []

        for i in range(steps):
            twin_traj.append(twin.pose)
            real_traj.append(real_obj.pose)

            if pipeline is not None:
                a, b = frames_range if frames_range is not None else (0, steps)
                if a <= i < b:
                    hand = hand_loader(i) if hand_loader is not None else None
                    frame, placement, mask = pipeline.render_frame(state.q, real_obj, twin, hand)
                    if frame_sink is not None:
                        frame_sink(i, frame, mask)
                    placements.append(
                        (i * cfg.dt, *placement.center, placement.scale)
                    )
                    frames_rendered += 1

            rows = traj_frames[i]
            contacts = tuple(
                Contact(
                    r.position,
                    r.orientation,
                    r.force,
                    r.torque,
                    r.linear_velocity * jitter,
                    r.angular_velocity * jitter,
                )
                for r in rows
            )
            cset = ContactSet(contacts, twin.pose)
            squeeze_v, twist_v = virtual_object_state(cset)
            squeeze_r = pass_squeeze(squeeze_v)
            twist_r = scale_twist(twist_v, k)
            cmd_twists.append(twist_r.vec)

            # Real-side gripper contacts ride on the real object.
            pads = tuple(
                Contact(real_obj.pose.apply(p), real_obj.pose.rotation @ R)
                for p, R in cfg.gripper_contacts
            )
            gmap_r = build_grasp_map(ContactSet(pads, real_obj.pose))
            err = _pose_error(reference, real_obj.pose)
            twist_cmd = Twist.from_vec(twist_r.vec + cfg.tracking_gain * err)
            targets = real_contact_targets(gmap_r, squeeze_r, twist_cmd)
            ee = forward_kinematics(cfg.chain, state.q, enforce_limits=False)[-1]
            J = jacobian(cfg.chain, state.q, enforce_limits=False)
            refs = joint_references(
                J, targets.lambda_r, targets.nu_r, gmap_r, ee.position - real_obj.pose.position
            )
            if refs.damped:
                damped_steps += 1
            state, speed, hits, sat = controller.step(
                JointState(state.q, state.qdot, refs.tau), refs.qdot
            )
            speeds[i] = speed
            saturations += int(sat)
            limit_hits += len(hits)

            ee = forward_kinematics(cfg.chain, state.q, enforce_limits=False)[-1]
            real_obj = RigidObjectState(
                ee.compose(cfg.object_in_ee), cfg.object_geometry, cfg.object_color
            )
            twin = step_twin(twin, twist_v, cfg.dt)
            ref_p = reference.position + twist_r.linear * cfg.dt
            ref_R = reorthonormalize(
                axis_angle_to_matrix(twist_r.angular * cfg.dt) @ reference.rotation
            )
            reference = Pose(ref_p, ref_R)

        reports.append(compute_metrics(twin_traj, real_traj, cfg.dt))
        traces.append(
            TrialTrace(twin_traj, real_traj, speeds, saturations, limit_hits, damped_steps, cmd_twists)
        )

    return ScenarioResult(merge_metrics(reports), traces, placements, frames_rendered)
