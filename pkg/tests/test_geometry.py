import numpy as np
import pytest

from armcloak.geometry import (
    Capsule,
    OrientedBox,
    Pose,
    axis_angle_to_matrix,
    reorthonormalize,
    rotation_about_axis,
    rotation_log,
    rotation_to_rpy,
    skew,
)


def test_skew_matches_cross_product():
    rng = np.random.default_rng(0)
    for _ in range(20):
        a, b = rng.standard_normal(3), rng.standard_normal(3)
        assert np.allclose(skew(a) @ b, np.cross(a, b), atol=1e-15)
        assert np.allclose(skew(a).T, -skew(a))


def test_axis_angle_round_trip():
    rng = np.random.default_rng(1)
    for _ in range(50):
        r = rng.standard_normal(3)
        r *= rng.uniform(0.01, 3.0) / np.linalg.norm(r)
        R = axis_angle_to_matrix(r)
        assert np.abs(R.T @ R - np.eye(3)).max() < 1e-12
        assert np.allclose(rotation_log(R), r, atol=1e-9)


def test_rotation_about_axis_quarter_turn():
    R = rotation_about_axis(np.array([0.0, 0.0, 1.0]), np.pi / 2)
    assert np.allclose(R @ [1, 0, 0], [0, 1, 0], atol=1e-15)


def test_reorthonormalize_restores_orthonormality():
    rng = np.random.default_rng(2)
    R = axis_angle_to_matrix(rng.standard_normal(3))
    noisy = R + 1e-6 * rng.standard_normal((3, 3))
    R2 = reorthonormalize(noisy)
    assert np.abs(R2.T @ R2 - np.eye(3)).max() < 1e-12
    assert np.abs(R2 - R).max() < 1e-5


def test_rotation_to_rpy_zyx_convention():
    # yaw then pitch then roll (Z-Y-X), applied R = Rz Ry Rx
    roll, pitch, yaw = 0.2, -0.3, 0.7
    R = (
        rotation_about_axis(np.array([0.0, 0.0, 1.0]), yaw)
        @ rotation_about_axis(np.array([0.0, 1.0, 0.0]), pitch)
        @ rotation_about_axis(np.array([1.0, 0.0, 0.0]), roll)
    )
    got = rotation_to_rpy(R)
    assert np.allclose(got, (roll, pitch, yaw), atol=1e-12)


def test_pose_compose_apply_inverse_against_homogeneous_oracle():
    rng = np.random.default_rng(3)
    for _ in range(25):
        pa = Pose(rng.standard_normal(3), axis_angle_to_matrix(rng.standard_normal(3)))
        pb = Pose(rng.standard_normal(3), axis_angle_to_matrix(rng.standard_normal(3)))

        def hom(p):
            T = np.eye(4)
            T[:3, :3] = p.rotation
            T[:3, 3] = p.position
            return T

        Tab = hom(pa) @ hom(pb)
        pc = pa.compose(pb)
        assert np.abs(hom(pc) - Tab).max() < 1e-12
        x = rng.standard_normal(3)
        assert np.allclose(pc.apply(x), (Tab @ np.append(x, 1.0))[:3], atol=1e-12)
        assert np.abs(hom(pa.inverse()) - np.linalg.inv(hom(pa))).max() < 1e-12


def test_pose_rejects_non_orthonormal_rotation():
    with pytest.raises(ValueError):
        Pose(np.zeros(3), np.eye(3) * 1.01)


def test_capsule_transform_and_bounds():
    cap = Capsule([0, 0, 0], [0.2, 0, 0], 0.05)
    pose = Pose([1, 2, 3], rotation_about_axis(np.array([0.0, 0.0, 1.0]), np.pi / 2))
    moved = cap.transformed(pose)
    assert np.allclose(moved.a, [1, 2, 3], atol=1e-15)
    assert np.allclose(moved.b, [1, 2.2, 3], atol=1e-12)
    c, r = cap.bounding_sphere()
    assert np.allclose(c, [0.1, 0, 0]) and abs(r - 0.15) < 1e-15
    with pytest.raises(ValueError):
        Capsule([0, 0, 0], [1, 0, 0], 0.0)


def test_box_transform_scales_and_rotates():
    box = OrientedBox([0.1, 0, 0], [0.1, 0.2, 0.3])
    pose = Pose([0, 0, 1], np.eye(3))
    big = box.transformed(pose, scale=2.0)
    assert np.allclose(big.center, [0.2, 0, 1])
    assert np.allclose(big.half_extents, [0.2, 0.4, 0.6])
    with pytest.raises(ValueError):
        OrientedBox([0, 0, 0], [0.0, 1, 1])
