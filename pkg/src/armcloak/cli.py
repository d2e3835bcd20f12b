"""Command-line front end.

Subcommands: simulate (full scenario: frames, metrics, figures), mask
(cancellation mask for one joint state), compose (fuse a frame/background/
mask triple), grasp-map (one contact-trajectory step to joint references).
Overrides given on the command line beat config values; the resolved
configuration is always dumped next to the outputs.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import netpbm
from .compositor import compose_frame
from .config import ConfigError, ScenarioConfig, load_config, resolved_text
from .frames import FrameRGBA
from .geometry import Pose
from .grasp_mapping import (
    Contact,
    ContactSet,
    ScaleMap,
    build_grasp_map,
    joint_references,
    pass_squeeze,
    real_contact_targets,
    scale_twist,
    virtual_object_state,
)
from .kinematics import forward_kinematics, jacobian
from .mask_service import render_silhouette, service_mask
from .frames import binarize_mask
from .objects import RigidObjectState
from .scenario import initial_object_pose, run_scenario
from .trajectory import read_trajectory

log = logging.getLogger("armcloak")


def _setup_logging():
    level = os.environ.get("ARMCLOAK_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _parse_frames(text: str) -> tuple[int, int]:
    try:
        a, b = text.split("..")
        lo, hi = int(a), int(b)
    except ValueError:
        raise SystemExit(f"error: bad --frames range {text!r}, expected A..B")
    if lo < 0 or hi < lo:
        raise SystemExit(f"error: bad --frames range {text!r}")
    return lo, hi


def _load(args) -> ScenarioConfig:
    cfg = load_config(args.config)
    log.info("loaded config %s (latency %.3f s, clamp %.2f m/s, seed %d)",
             args.config, cfg.latency, cfg.clamp, cfg.seed)
    return cfg.with_overrides(
        latency=args.latency_ms / 1000.0 if args.latency_ms is not None else None,
        clamp=args.clamp,
        seed=args.seed,
    )


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    from .report import write_figures, write_metrics_csv, write_placements_csv, write_summary

    cfg = _load(args)
    out = _outdir(args)
    (out / "resolved.cfg").write_text(resolved_text(cfg))
    frames_range = _parse_frames(args.frames) if args.frames else None
    frames_dir = out / "frames"
    frames_dir.mkdir(exist_ok=True)

    hand_loader = None
    if cfg.hand_overlay_dir:
        hand_dir = cfg.resolve_path(cfg.hand_overlay_dir)

        def hand_loader(i):
            ppm = hand_dir / f"hand_{i:04d}.ppm"
            pgm = hand_dir / f"hand_{i:04d}.alpha.pgm"
            if ppm.exists() and pgm.exists():
                return netpbm.read_frame(ppm, pgm)
            return None

    def sink(i, frame, mask):
        log.debug("writing frame %d", i)
        netpbm.write_frame(frames_dir / f"frame_{i:04d}.ppm", frame)
        netpbm.write_mask(frames_dir / f"mask_{i:04d}.pgm", mask)

    result = run_scenario(cfg, frame_sink=sink, frames_range=frames_range, hand_loader=hand_loader)
    write_metrics_csv(out / "metrics.csv", result.metrics)
    write_summary(out / "summary.txt", result.metrics)
    write_placements_csv(out / "placements.csv", result.placements)
    write_figures(out / "figures", result, cfg.dt)
    print(result.metrics.summary_text())
    print(f"frames rendered: {result.frames_rendered}; "
          f"max end-effector speed: {result.max_realized_speed:.4f} m/s")
    return 0


def cmd_mask(args) -> int:
    cfg = _load(args)
    out = _outdir(args)
    (out / "resolved.cfg").write_text(resolved_text(cfg))
    q = cfg.q0 if args.q is None else np.array([float(v) for v in args.q.split(",")])
    mask = service_mask(cfg.chain, q, cfg.cam_service, cfg.ranges)
    silhouette = render_silhouette(cfg.chain, q, cfg.cam_service)
    netpbm.write_mask(out / "mask.pgm", mask)
    netpbm.write_frame(out / "silhouette.ppm", silhouette, out / "silhouette.alpha.pgm")
    print(f"mask: {int(mask.bits.sum())} set pixels of {mask.width * mask.height}")
    return 0


def cmd_compose(args) -> int:
    out = _outdir(args)
    live = netpbm.read_frame(args.frame)
    background = netpbm.read_frame(args.background)
    mask = netpbm.read_mask(args.mask)
    fused = compose_frame(live, background, mask)
    netpbm.write_frame(out / "composed.ppm", fused)
    print(f"composed {fused.width}x{fused.height} -> {out / 'composed.ppm'}")
    return 0


def cmd_grasp_map(args) -> int:
    cfg = _load(args)
    traj = read_trajectory(cfg.resolve_path(cfg.trajectory_path))
    idx = min(int(round(args.time / cfg.dt)), len(traj) - 1)
    rows = traj[idx]
    obj0 = initial_object_pose(cfg)
    contacts = tuple(
        Contact(r.position, r.orientation, r.force, r.torque,
                r.linear_velocity, r.angular_velocity)
        for r in rows
    )
    squeeze_v, twist_v = virtual_object_state(ContactSet(contacts, obj0))
    k = ScaleMap(cfg.cam_real.focal, cfg.cam_interaction.focal)
    squeeze_r = pass_squeeze(squeeze_v)
    twist_r = scale_twist(twist_v, k)
    pads = tuple(Contact(obj0.apply(p), obj0.rotation @ R) for p, R in cfg.gripper_contacts)
    gmap_r = build_grasp_map(ContactSet(pads, obj0))
    targets = real_contact_targets(gmap_r, squeeze_r, twist_r)
    ee = forward_kinematics(cfg.chain, cfg.q0)[-1]
    J = jacobian(cfg.chain, cfg.q0)
    refs = joint_references(J, targets.lambda_r, targets.nu_r, gmap_r,
                            ee.position - obj0.position)
    print(f"t = {idx * cfg.dt:.6g} s  (trajectory step {idx}, {len(rows)} contacts)")
    print("squeeze  :", " ".join(f"{v: .6g}" for v in squeeze_r.vec))
    print("twist    :", " ".join(f"{v: .6g}" for v in twist_r.vec))
    print("tau_q    :", " ".join(f"{v: .6g}" for v in refs.tau))
    print("qdot     :", " ".join(f"{v: .6g}" for v in refs.qdot))
    if refs.damped:
        print("note: Jacobian near-singular, damped pseudoinverse used")
    if targets.twist_residual > 1e-9:
        print(f"note: unattainable twist residual {targets.twist_residual:.3g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="armcloak",
                                 description="Robot-cancellation pipeline simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="scenario config path")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--latency-ms", type=float, default=None, help="override latency (ms)")
        p.add_argument("--clamp", type=float, default=None, help="override speed clamp (m/s)")
        p.add_argument("--seed", type=int, default=None, help="override RNG seed")

    p = sub.add_parser("simulate", help="run the full scenario")
    common(p)
    p.add_argument("--frames", default=None, help="render only frames A..B")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("mask", help="emit the cancellation mask for one joint state")
    common(p)
    p.add_argument("--q", default=None, help="comma-separated joint values (default: config q0)")
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("compose", help="fuse a frame/background/mask triple")
    p.add_argument("--frame", required=True)
    p.add_argument("--background", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("grasp-map", help="map one trajectory step to joint references")
    common(p)
    p.add_argument("--time", type=float, default=0.0, help="trajectory time (s)")
    p.set_defaults(func=cmd_grasp_map)
    return ap


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
