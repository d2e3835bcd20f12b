"""Shared fixtures: the shipped pouring scenario and small helper chains."""

from pathlib import Path

import numpy as np
import pytest

from armcloak.config import ScenarioConfig, load_config
from armcloak.geometry import Capsule, Pose
from armcloak.kinematics import Joint, KinematicChain

REPO = Path(__file__).resolve().parents[1]
POURING_CFG = REPO / "scenarios" / "pouring.cfg"


@pytest.fixture(scope="session")
def pouring_cfg() -> ScenarioConfig:
    return load_config(POURING_CFG)


def planar_two_link(L1: float = 1.0, L2: float = 1.0) -> KinematicChain:
    """Two revolute z joints in the xy plane, links along local x."""
    z = np.array([0.0, 0.0, 1.0])
    joints = (
        Joint(Pose.identity(), z, (-np.pi, np.pi)),
        Joint(Pose(np.array([L1, 0.0, 0.0]), np.eye(3)), z, (-np.pi, np.pi)),
    )
    links = (
        (Capsule(np.zeros(3), np.array([L1, 0.0, 0.0]), 0.04),),
        (Capsule(np.zeros(3), np.array([L2, 0.0, 0.0]), 0.04),),
    )
    return KinematicChain(joints, links, ee_offset=Pose(np.array([L2, 0.0, 0.0]), np.eye(3)))


def random_q(chain, rng, margin: float = 0.1) -> np.ndarray:
    lo = np.array([j.limits[0] for j in chain.joints]) + margin
    hi = np.array([j.limits[1] for j in chain.joints]) - margin
    return rng.uniform(lo, hi)
