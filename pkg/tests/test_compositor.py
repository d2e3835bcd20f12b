import numpy as np
import pytest

from armcloak.camera import CameraModel, projection_matrix
from armcloak.compositor import (
    alpha_over,
    compose_frame,
    masked_overlay,
    pixel_map,
    place_twin,
    render_scene,
    twin_render_pose,
)
from armcloak.frames import BinaryMask, FrameRGBA
from armcloak.geometry import Capsule, Pose
from armcloak.objects import RigidObjectState
from armcloak.render import hit_mask


def _random_case(rng, size=16):
    live = FrameRGBA(rng.integers(0, 256, size=(size, size, 4), dtype=np.uint8))
    background = FrameRGBA(rng.integers(0, 256, size=(size, size, 4), dtype=np.uint8))
    mask = BinaryMask(rng.integers(0, 2, size=(size, size)).astype(bool))
    return live, background, mask


def test_compose_partition_property():
    rng = np.random.default_rng(30)
    for _ in range(50):
        live, background, mask = _random_case(rng)
        out = compose_frame(live, background, mask)
        assert np.array_equal(out.pixels[mask.bits][:, :3], background.pixels[mask.bits][:, :3])
        assert np.array_equal(out.pixels[~mask.bits][:, :3], live.pixels[~mask.bits][:, :3])
        assert np.all(out.pixels[:, :, 3] == 255)


def test_compose_trivial_masks():
    rng = np.random.default_rng(31)
    live, background, _ = _random_case(rng)
    zeros = BinaryMask(np.zeros((16, 16), dtype=bool))
    ones = BinaryMask(np.ones((16, 16), dtype=bool))
    assert np.array_equal(compose_frame(live, background, zeros).pixels[:, :, :3], live.pixels[:, :, :3])
    assert np.array_equal(compose_frame(live, background, ones).pixels[:, :, :3], background.pixels[:, :, :3])


def test_compose_identity_when_background_equals_live():
    rng = np.random.default_rng(32)
    live, _, mask = _random_case(rng)
    out = compose_frame(live, live, mask)
    assert np.array_equal(out.pixels[:, :, :3], live.pixels[:, :, :3])


def test_compose_checkerboard_oracle():
    a = FrameRGBA.filled(8, 8, (10, 20, 30, 255))
    b = FrameRGBA.filled(8, 8, (200, 150, 100, 255))
    yy, xx = np.mgrid[0:8, 0:8]
    mask = BinaryMask((yy + xx) % 2 == 0)
    out = compose_frame(a, b, mask)
    for y in range(8):
        for x in range(8):
            want = b.pixels[y, x, :3] if (x + y) % 2 == 0 else a.pixels[y, x, :3]
            assert np.array_equal(out.pixels[y, x, :3], want)


def test_masked_overlay_alpha_semantics():
    rng = np.random.default_rng(33)
    _, background, mask = _random_case(rng)
    ov = masked_overlay(background, mask)
    assert np.array_equal(ov.pixels[:, :, :3], background.pixels[:, :, :3])
    assert np.array_equal(ov.pixels[:, :, 3][mask.bits], background.pixels[:, :, 3][mask.bits])
    assert np.all(ov.pixels[:, :, 3][~mask.bits] == 0)


def test_overlay_blend_reproduces_compose_for_opaque_background():
    rng = np.random.default_rng(34)
    for _ in range(50):
        live, background, mask = _random_case(rng)
        px = background.pixels.copy()
        px[:, :, 3] = 255  # opaque capture
        opaque = FrameRGBA(px)
        blended = alpha_over(masked_overlay(opaque, mask), live)
        composed = compose_frame(live, opaque, mask)
        assert np.array_equal(blended.pixels, composed.pixels)


def test_dimension_mismatch_rejected():
    live = FrameRGBA.filled(8, 8, (0, 0, 0, 255))
    background = FrameRGBA.filled(9, 8, (0, 0, 0, 255))
    mask = BinaryMask(np.zeros((8, 8), dtype=bool))
    with pytest.raises(ValueError):
        compose_frame(live, background, mask)
    with pytest.raises(ValueError):
        masked_overlay(background, mask)


def test_projection_matrix_tabulated_entries():
    M = projection_matrix(70.0, 75.0, 95.0, 640, 480)
    assert abs(M[0, 0] - 52.5) < 1e-12
    assert abs(M[1, 1] - 70.0) < 1e-12
    assert abs(M[2, 2] - (-8.5)) < 1e-12
    assert abs(M[2, 3] - (-712.5)) < 1e-12
    assert M[3, 2] == -1.0
    with pytest.raises(ValueError):
        projection_matrix(70.0, 95.0, 75.0, 640, 480)


def test_place_twin_center_anchor_zero_clip():
    # depth 1 makes the clip w equal 1, so a centered anchor must give
    # normalized clip coordinates exactly zero
    cam = CameraModel(focal=0.70, resolution=(640, 480), near=0.5, far=2.0)
    placement = place_twin((320.0, 240.0), 1.0, cam)
    assert abs(placement.clip[0]) < 1e-12
    assert abs(placement.clip[1]) < 1e-12
    assert abs(placement.clip[3] - 1.0) < 1e-12


def test_place_twin_round_trip():
    rng = np.random.default_rng(35)
    cam = CameraModel(focal=0.70, resolution=(640, 480), near=0.75, far=0.95)
    for _ in range(100):
        anchor = (rng.uniform(0, 640), rng.uniform(0, 480))
        z_v = rng.uniform(0.76, 0.94)
        placement = place_twin(anchor, z_v, cam)
        back = pixel_map(placement.clip, 640, 480)
        assert abs(back[0] - anchor[0]) < 1e-9
        assert abs(back[1] - anchor[1]) < 1e-9


def test_place_twin_validation():
    cam = CameraModel(focal=0.70, resolution=(640, 480), near=0.75, far=0.95)
    with pytest.raises(ValueError):
        place_twin((700.0, 240.0), 0.85, cam)
    with pytest.raises(ValueError):
        place_twin((320.0, 240.0), 0.96, cam)
    with pytest.raises(ValueError):
        place_twin((320.0, 240.0), 0.85, cam, cam, -1.0)


def _pixel_width(frame_bits):
    cols = np.where(frame_bits.any(axis=0))[0]
    return cols.max() - cols.min() + 1 if cols.size else 0


def test_twin_scale_matches_real_pixel_footprint():
    cam_r = CameraModel(focal=0.75, resolution=(320, 240), near=0.75, far=0.95)
    cam_i = CameraModel(focal=0.70, resolution=(320, 240), near=0.75, far=0.95)
    rho = 0.05
    real_depth = 0.90
    real = Capsule([0.0, 0.0, real_depth], [0.0, 0.0, real_depth], rho)
    real_w = _pixel_width(hit_mask([real], cam_r))
    placement = place_twin((160.0, 120.0), 0.80, cam_i, cam_r, real_depth)
    geom = (Capsule([0, 0, 0], [0, 0, 0], rho),)
    twin = RigidObjectState(Pose([0, 0, 0], np.eye(3)), geom, (0, 0, 255, 255))
    pose = twin_render_pose(placement, cam_i, np.eye(3))
    twin_w = _pixel_width(
        hit_mask([geom[0].transformed(pose, placement.scale)], cam_i)
    )
    assert abs(twin_w - real_w) <= 1


def test_render_scene_layering_matches_painter_oracle():
    rng = np.random.default_rng(36)
    cam = CameraModel(focal=0.75, resolution=(16, 16), near=0.5, far=2.0)
    for _ in range(20):
        base = FrameRGBA(rng.integers(0, 256, size=(16, 16, 4), dtype=np.uint8))
        anchor = (rng.uniform(4, 12), rng.uniform(4, 12))
        placement = place_twin(anchor, rng.uniform(0.6, 1.8), cam)
        geom = (Capsule([0, 0, 0], [0, 0, 0], rng.uniform(0.05, 0.3)),)
        color = tuple(int(v) for v in rng.integers(0, 256, 3)) + (255,)
        twin = RigidObjectState(Pose([0, 0, 0], np.eye(3)), geom, color)
        hand_px = rng.integers(0, 256, size=(16, 16, 4), dtype=np.uint8)
        hand_px[:, :, 3] = rng.choice([0, 255], size=(16, 16))
        hand = FrameRGBA(hand_px)

        out = render_scene(base, twin, placement, cam, hand)

        # painter oracle: twin silhouette over base, hand sprite over that
        pose = twin_render_pose(placement, cam, np.eye(3))
        twin_hits = hit_mask([geom[0].transformed(pose, placement.scale)], cam)
        want = base.pixels[:, :, :3].copy()
        want[twin_hits] = color[:3]
        opaque = hand_px[:, :, 3] == 255
        want[opaque] = hand_px[opaque][:, :3]
        assert np.array_equal(out.pixels[:, :, :3], want)
        assert np.all(out.pixels[:, :, 3] == 255)


def test_render_scene_identity_when_twin_behind_and_hand_transparent():
    cam = CameraModel(focal=0.75, resolution=(16, 16), near=0.5, far=2.0)
    base = FrameRGBA.filled(16, 16, (9, 9, 9, 255))
    placement = place_twin((8.0, 8.0), 1.0, cam)
    # geometry offset so the placed primitive sits behind the camera
    geom = (Capsule([0, 0, -5.0], [0, 0, -5.0], 0.2),)
    twin = RigidObjectState(Pose([0, 0, 0], np.eye(3)), geom, (255, 0, 0, 255))
    hand = FrameRGBA.filled(16, 16, (1, 2, 3, 0))
    out = render_scene(base, twin, placement, cam, hand)
    assert np.array_equal(out.pixels[:, :, :3], base.pixels[:, :, :3])
