"""Scenario configuration: flat `key = value` sections, fully validated.

Camera lengths are written in centimeters (the natural unit for the
tabulated parameters) and converted to meters internally; everything else
is SI (meters, seconds, radians). The resolved configuration can be dumped
back out in the same grammar so every run is self-describing.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .camera import CameraModel
from .frames import ChannelRanges
from .geometry import Capsule, OrientedBox, Pose, Primitive, axis_angle_to_matrix, rotation_log
from .kinematics import Joint, KinematicChain
from .render import Backdrop

DEFAULT_DT = 1.0 / 60.0


class ConfigError(ValueError):
    """Configuration rejected; message names the offending section/key."""


def _floats(raw: str, n: int, where: str) -> np.ndarray:
    parts = raw.split()
    if len(parts) != n:
        raise ConfigError(f"{where}: expected {n} numbers, got {len(parts)} ({raw!r})")
    try:
        return np.array([float(p) for p in parts])
    except ValueError as e:
        raise ConfigError(f"{where}: {e}") from None


@dataclass(frozen=True)
class ScenarioConfig:
    chain: KinematicChain
    q0: np.ndarray
    cam_real: CameraModel
    cam_service: CameraModel
    cam_interaction: CameraModel
    ranges: ChannelRanges
    object_geometry: tuple[Primitive, ...]
    object_color: tuple[int, int, int, int]
    object_initial_pose: Pose | None       # None: derived from q0 and the grasp offset
    object_in_ee: Pose                     # object pose = ee_pose o object_in_ee
    gripper_contacts: tuple[tuple[np.ndarray, np.ndarray], ...]  # object frame (p, R)
    trajectory_path: str
    backdrop: Backdrop
    dt: float = DEFAULT_DT
    duration: float = 10.0
    clamp: float = 0.25
    latency: float = 0.0
    seed: int = 0
    trials: int = 1
    tracking_gain: float = 4.0
    twin_depth: float | None = None
    misregistration: tuple[int, int] = (0, 0)
    background_path: str | None = None     # None: synthesize the robot-free scene
    hand_overlay_dir: str | None = None
    base_dir: Path = field(default_factory=Path)

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ConfigError("simulation.dt must be positive")
        if self.clamp <= 0.0:
            raise ConfigError("simulation.clamp must be positive")
        if self.latency < 0.0:
            raise ConfigError("simulation.latency must be non-negative")
        if self.trials < 1:
            raise ConfigError("simulation.trials must be at least 1")

    def resolve_path(self, p: str) -> Path:
        path = Path(p)
        return path if path.is_absolute() else self.base_dir / path

    def with_overrides(self, latency=None, clamp=None, seed=None) -> "ScenarioConfig":
        kw = {}
        if latency is not None:
            kw["latency"] = latency
        if clamp is not None:
            kw["clamp"] = clamp
        if seed is not None:
            kw["seed"] = seed
        return replace(self, **kw) if kw else self


def _parse_primitives(section, where: str) -> list[Primitive]:
    prims: list[Primitive] = []
    for key, raw in section.items():
        if key.startswith("capsule"):
            v = _floats(raw, 7, f"{where}.{key}")
            if v[6] <= 0.0:
                raise ConfigError(f"{where}.{key}: capsule radius must be positive")
            prims.append(Capsule(v[:3], v[3:6], float(v[6])))
        elif key.startswith("box"):
            v = _floats(raw, 9, f"{where}.{key}")
            if np.any(v[3:6] <= 0.0):
                raise ConfigError(f"{where}.{key}: box half-extents must be positive")
            prims.append(OrientedBox(v[:3], v[3:6], axis_angle_to_matrix(v[6:9])))
    return prims


def _parse_camera(cp, name: str) -> CameraModel:
    sec = f"camera.{name}"
    if sec not in cp:
        raise ConfigError(f"missing section [{sec}]")
    s = cp[sec]
    try:
        focal = float(s.get("focal_cm")) / 100.0
        near = float(s.get("near_cm")) / 100.0
        far = float(s.get("far_cm")) / 100.0
        sensor = float(s.get("sensor_width_cm", "75")) / 100.0
    except (TypeError, ValueError) as e:
        raise ConfigError(f"[{sec}]: bad or missing camera length ({e})") from None
    res = _floats(s.get("resolution", ""), 2, f"{sec}.resolution")
    pos = _floats(s.get("position", "0 0 0"), 3, f"{sec}.position")
    aa = _floats(s.get("axis_angle", "0 0 0"), 3, f"{sec}.axis_angle")
    if not (0.0 < near < far):
        raise ConfigError(f"[{sec}]: requires 0 < near_cm < far_cm (got {near * 100:g}, {far * 100:g})")
    cam_to_world = Pose(pos, axis_angle_to_matrix(aa))
    try:
        return CameraModel(
            focal=focal,
            resolution=(int(res[0]), int(res[1])),
            near=near,
            far=far,
            pose=cam_to_world.inverse(),
            sensor_width=sensor,
        )
    except ValueError as e:
        raise ConfigError(f"[{sec}]: {e}") from None


def _parse_range(s, key: str) -> tuple[int, int]:
    v = _floats(s.get(key, "240 255"), 2, f"mask.{key}")
    lo, hi = int(v[0]), int(v[1])
    if not (0 <= lo <= hi <= 255):
        raise ConfigError(f"mask.{key}: need 0 <= min <= max <= 255")
    return lo, hi


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(path.read_text(), source=str(path))
    except configparser.Error as e:
        raise ConfigError(f"parse error in {path}: {e}") from None

    # Kinematic chain.
    if "chain" not in cp:
        raise ConfigError("missing section [chain]")
    dof = cp["chain"].getint("dof", fallback=None)
    if not dof or dof < 1:
        raise ConfigError("chain.dof must be a positive integer")
    joints = []
    links = []
    q0 = _floats(cp["chain"].get("q0", " ".join(["0"] * dof)), dof, "chain.q0")
    for i in range(1, dof + 1):
        jsec = f"joint{i}"
        if jsec not in cp:
            raise ConfigError(f"missing section [{jsec}]")
        s = cp[jsec]
        origin = _floats(s.get("origin", "0 0 0"), 3, f"{jsec}.origin")
        aa = _floats(s.get("axis_angle", "0 0 0"), 3, f"{jsec}.axis_angle")
        axis = _floats(s.get("axis", ""), 3, f"{jsec}.axis")
        norm = np.linalg.norm(axis)
        if abs(norm - 1.0) > 1e-6:
            raise ConfigError(f"{jsec}.axis: must be a unit vector (norm {norm:.6g})")
        axis = axis / norm  # exact unit within 1e-12 after renormalizing
        lim = _floats(s.get("limits", "-3.1416 3.1416"), 2, f"{jsec}.limits")
        if lim[0] > lim[1]:
            raise ConfigError(f"{jsec}.limits: min must not exceed max")
        joints.append(Joint(Pose(origin, axis_angle_to_matrix(aa)), axis, (lim[0], lim[1])))
        lsec = f"link{i}"
        links.append(tuple(_parse_primitives(cp[lsec], lsec)) if lsec in cp else ())
    ee_origin = _floats(cp["chain"].get("ee_origin", "0 0 0"), 3, "chain.ee_origin")
    ee_aa = _floats(cp["chain"].get("ee_axis_angle", "0 0 0"), 3, "chain.ee_axis_angle")
    base_pos = _floats(cp["chain"].get("base_position", "0 0 0"), 3, "chain.base_position")
    base_aa = _floats(cp["chain"].get("base_axis_angle", "0 0 0"), 3, "chain.base_axis_angle")
    chain = KinematicChain(
        tuple(joints),
        tuple(links),
        ee_offset=Pose(ee_origin, axis_angle_to_matrix(ee_aa)),
        base=Pose(base_pos, axis_angle_to_matrix(base_aa)),
    )
    for i, (joint, qi) in enumerate(zip(chain.joints, q0)):
        if not (joint.limits[0] <= qi <= joint.limits[1]):
            raise ConfigError(f"chain.q0: joint {i + 1} value {qi:g} outside limits {joint.limits}")

    cam_real = _parse_camera(cp, "real")
    cam_service = _parse_camera(cp, "service")
    cam_interaction = _parse_camera(cp, "interaction")

    msec = cp["mask"] if "mask" in cp else {}
    ranges = ChannelRanges(
        _parse_range(msec, "range_r") if msec else (240, 255),
        _parse_range(msec, "range_g") if msec else (240, 255),
        _parse_range(msec, "range_b") if msec else (240, 255),
        _parse_range(msec, "range_a") if msec else (240, 255),
    )

    if "object" not in cp:
        raise ConfigError("missing section [object]")
    osec = cp["object"]
    geometry = tuple(_parse_primitives(osec, "object"))
    if not geometry:
        raise ConfigError("object: needs at least one capsule/box primitive")
    color_v = _floats(osec.get("color", "60 90 200 255"), 4, "object.color")
    if np.any(color_v < 0) or np.any(color_v > 255):
        raise ConfigError("object.color: channels must lie in [0, 255]")
    color = tuple(int(c) for c in color_v)
    pose_mode = osec.get("initial_pose", "from_robot").strip()
    if pose_mode == "from_robot":
        initial_pose = None
    elif pose_mode == "explicit":
        initial_pose = Pose(
            _floats(osec.get("position", "0 0 0"), 3, "object.position"),
            axis_angle_to_matrix(_floats(osec.get("axis_angle", "0 0 0"), 3, "object.axis_angle")),
        )
    else:
        raise ConfigError("object.initial_pose must be 'from_robot' or 'explicit'")

    if "gripper" not in cp:
        raise ConfigError("missing section [gripper]")
    gsec = cp["gripper"]
    off_p = _floats(gsec.get("object_offset_position", "0 0 0"), 3, "gripper.object_offset_position")
    off_aa = _floats(gsec.get("object_offset_axis_angle", "0 0 0"), 3, "gripper.object_offset_axis_angle")
    object_in_ee = Pose(off_p, axis_angle_to_matrix(off_aa))
    pads = []
    for i in range(1, 17):
        pk = f"contact{i}_position"
        if pk not in gsec:
            break
        p = _floats(gsec.get(pk), 3, f"gripper.{pk}")
        aa = _floats(gsec.get(f"contact{i}_axis_angle", "0 0 0"), 3, f"gripper.contact{i}_axis_angle")
        pads.append((p, axis_angle_to_matrix(aa)))
    if not pads:
        raise ConfigError("gripper: needs contact1_position (at least one pad contact)")

    ssec = cp["simulation"] if "simulation" in cp else {}

    def sget(key, default):
        return ssec.get(key, default) if ssec else default

    trajectory = sget("trajectory", "")
    if not trajectory:
        raise ConfigError("simulation.trajectory is required (contact trajectory CSV)")

    if "backdrop" in cp:
        b = cp["backdrop"]
        backdrop = Backdrop(
            point=_floats(b.get("point", "0 1 0"), 3, "backdrop.point"),
            normal=_floats(b.get("normal", "0 -1 0"), 3, "backdrop.normal"),
            u_axis=_floats(b.get("u_axis", "1 0 0"), 3, "backdrop.u_axis"),
            checker=float(b.get("checker", "0.08")),
        )
    else:
        backdrop = Backdrop(point=[0.45, 0.4, 0.25], normal=[0, -1, 0], u_axis=[1, 0, 0])

    misreg = _floats(sget("misregistration", "0 0"), 2, "simulation.misregistration")
    twin_depth_raw = sget("twin_depth", "")
    background = sget("background", "synth").strip()
    hand_dir = sget("hand_overlay", "").strip()

    try:
        return ScenarioConfig(
            chain=chain,
            q0=q0,
            cam_real=cam_real,
            cam_service=cam_service,
            cam_interaction=cam_interaction,
            ranges=ranges,
            object_geometry=geometry,
            object_color=color,
            object_initial_pose=initial_pose,
            object_in_ee=object_in_ee,
            gripper_contacts=tuple(pads),
            trajectory_path=trajectory,
            backdrop=backdrop,
            dt=float(sget("dt", str(DEFAULT_DT))),
            duration=float(sget("duration", "10")),
            clamp=float(sget("clamp", "0.25")),
            latency=float(sget("latency", "0")),
            seed=int(sget("seed", "0")),
            trials=int(sget("trials", "1")),
            tracking_gain=float(sget("tracking_gain", "4.0")),
            twin_depth=float(twin_depth_raw) if twin_depth_raw else None,
            misregistration=(int(misreg[0]), int(misreg[1])),
            background_path=None if background in ("", "synth") else background,
            hand_overlay_dir=hand_dir or None,
            base_dir=path.parent,
        )
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(str(e)) from None


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def resolved_text(cfg: ScenarioConfig) -> str:
    """Dump the fully-resolved configuration in the config grammar."""
    lines = ["# resolved configuration (defaults applied, overrides included)", ""]
    lines += ["[chain]", f"dof = {cfg.chain.dof}",
              "q0 = " + " ".join(_fmt(v) for v in cfg.q0),
              "ee_origin = " + " ".join(_fmt(v) for v in cfg.chain.ee_offset.position),
              "ee_axis_angle = " + " ".join(_fmt(v) for v in rotation_log(cfg.chain.ee_offset.rotation)),
              "base_position = " + " ".join(_fmt(v) for v in cfg.chain.base.position),
              "base_axis_angle = " + " ".join(_fmt(v) for v in rotation_log(cfg.chain.base.rotation)), ""]
    for i, (joint, prims) in enumerate(zip(cfg.chain.joints, cfg.chain.link_primitives), start=1):
        lines += [f"[joint{i}]",
                  "origin = " + " ".join(_fmt(v) for v in joint.origin.position),
                  "axis_angle = " + " ".join(_fmt(v) for v in rotation_log(joint.origin.rotation)),
                  "axis = " + " ".join(_fmt(v) for v in joint.axis),
                  f"limits = {_fmt(joint.limits[0])} {_fmt(joint.limits[1])}", ""]
        if prims:
            lines.append(f"[link{i}]")
            lines += _primitive_lines(prims)
            lines.append("")
    for name in ("real", "service", "interaction"):
        cam: CameraModel = getattr(cfg, f"cam_{name}")
        c2w = cam.pose.inverse()
        lines += [f"[camera.{name}]",
                  f"focal_cm = {_fmt(cam.focal * 100)}",
                  f"near_cm = {_fmt(cam.near * 100)}",
                  f"far_cm = {_fmt(cam.far * 100)}",
                  f"sensor_width_cm = {_fmt(cam.sensor_width * 100)}",
                  f"resolution = {cam.resolution[0]} {cam.resolution[1]}",
                  "position = " + " ".join(_fmt(v) for v in c2w.position),
                  "axis_angle = " + " ".join(_fmt(v) for v in rotation_log(c2w.rotation)), ""]
    r = cfg.ranges
    lines += ["[mask]",
              f"range_r = {r.r[0]} {r.r[1]}", f"range_g = {r.g[0]} {r.g[1]}",
              f"range_b = {r.b[0]} {r.b[1]}", f"range_a = {r.a[0]} {r.a[1]}", ""]
    lines.append("[object]")
    lines += _primitive_lines(cfg.object_geometry)
    lines.append("color = " + " ".join(str(c) for c in cfg.object_color))
    if cfg.object_initial_pose is None:
        lines.append("initial_pose = from_robot")
    else:
        lines += ["initial_pose = explicit",
                  "position = " + " ".join(_fmt(v) for v in cfg.object_initial_pose.position),
                  "axis_angle = " + " ".join(_fmt(v) for v in rotation_log(cfg.object_initial_pose.rotation))]
    lines.append("")
    lines += ["[gripper]",
              "object_offset_position = " + " ".join(_fmt(v) for v in cfg.object_in_ee.position),
              "object_offset_axis_angle = " + " ".join(_fmt(v) for v in rotation_log(cfg.object_in_ee.rotation))]
    for i, (p, R) in enumerate(cfg.gripper_contacts, start=1):
        lines.append(f"contact{i}_position = " + " ".join(_fmt(v) for v in p))
        lines.append(f"contact{i}_axis_angle = " + " ".join(_fmt(v) for v in rotation_log(R)))
    lines.append("")
    bd = cfg.backdrop
    lines += ["[backdrop]",
              "point = " + " ".join(_fmt(v) for v in bd.point),
              "normal = " + " ".join(_fmt(v) for v in bd.normal),
              "u_axis = " + " ".join(_fmt(v) for v in bd.u_axis),
              f"checker = {_fmt(bd.checker)}", ""]
    lines += ["[simulation]",
              f"dt = {_fmt(cfg.dt)}", f"duration = {_fmt(cfg.duration)}",
              f"clamp = {_fmt(cfg.clamp)}", f"latency = {_fmt(cfg.latency)}",
              f"seed = {cfg.seed}", f"trials = {cfg.trials}",
              f"tracking_gain = {_fmt(cfg.tracking_gain)}",
              f"trajectory = {cfg.trajectory_path}",
              f"misregistration = {cfg.misregistration[0]} {cfg.misregistration[1]}",
              f"background = {cfg.background_path or 'synth'}"]
    if cfg.twin_depth is not None:
        lines.append(f"twin_depth = {_fmt(cfg.twin_depth)}")
    if cfg.hand_overlay_dir:
        lines.append(f"hand_overlay = {cfg.hand_overlay_dir}")
    lines.append("")
    return "\n".join(lines)


def _primitive_lines(prims) -> list[str]:
    out = []
    ncap = nbox = 0
    for p in prims:
        if isinstance(p, Capsule):
            ncap += 1
            key = "capsule" if ncap == 1 else f"capsule{ncap}"
            out.append(f"{key} = " + " ".join(_fmt(v) for v in [*p.a, *p.b, p.radius]))
        else:
            nbox += 1
            key = "box" if nbox == 1 else f"box{nbox}"
            aa = rotation_log(p.orientation)
            out.append(f"{key} = " + " ".join(_fmt(v) for v in [*p.center, *p.half_extents, *aa]))
    return out
