import warnings

import numpy as np
import pytest

from lidarcam.camera import Intrinsics, project
from lidarcam.correspondence import canonical_sort, sensor_view, sort_order
from lidarcam.extrinsic import (
    CalibrationResult,
    Correspondences,
    IllPosedWarning,
    NoOverlapError,
    SolverOptions,
    associate,
    mean_iou,
    pnp_cost,
    rms_per_corner,
    solve,
    solve_iou,
    solve_pnp,
)
from lidarcam.geometry import RigidTransform, perturb
from lidarcam.simulate import perturbed

DIAMOND = np.array([[0.0, -1.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])  # top, right, bottom, left (v down)


def rotate2d(pts, deg):
    t = np.deg2rad(deg)
    r = np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])
    return pts @ r.T


def truth_correspondences(scene):
    truth = scene.truth.extrinsics
    return associate(list(scene.truth.target_vertices), [t.corners for t in scene.targets], scene.intrinsics, truth)


def errors(a: RigidTransform, b: RigidTransform):
    return np.rad2deg(a.angle_to(b)), float(np.linalg.norm(a.translation - b.translation))


def test_sort_diamond():
    rng = np.random.default_rng(0)
    shuffled = DIAMOND[rng.permutation(4)]
    assert np.array_equal(canonical_sort(shuffled), DIAMOND)


def test_sort_stable_under_small_rotation():
    for deg in (-5.0, 5.0):
        rotated = rotate2d(DIAMOND, deg)
        assert np.array_equal(canonical_sort(rotated[::-1]), rotated)


def test_sort_coincident_corners():
    bad = DIAMOND.copy()
    bad[1] = bad[0]
    with pytest.raises(ValueError):
        sort_order(bad)


def test_sort_3d_with_default_projector():
    # a diamond facing the sensor at x = 3: top has largest z, right has most negative y
    verts = np.array([[3.0, 0, 0.5], [3.0, -0.5, 0], [3.0, 0, -0.5], [3.0, 0.5, 0]])
    assert np.array_equal(canonical_sort(verts[[2, 0, 3, 1]]), verts)
    with pytest.raises(ValueError):
        sensor_view(np.array([[-1.0, 0, 0]]))


def test_sort_is_idempotent(noisy_scenes):
    for t in noisy_scenes[0].targets:
        assert np.array_equal(canonical_sort(t.corners), t.corners)


def test_correspondence_shape_checks():
    with pytest.raises(ValueError):
        Correspondences(np.zeros((3, 3)), np.zeros((3, 2)))
    with pytest.raises(ValueError):
        Correspondences(np.zeros((4, 3)), np.zeros((8, 2)))
    c = Correspondences(np.zeros((8, 3)), np.zeros((8, 2)))
    assert c.n_targets == 2 and len(c.groups()) == 2


def test_rms_three_four_five():
    intr = Intrinsics(100.0, 100.0, 0.0, 0.0)
    extr = RigidTransform.identity()
    pts = np.array([[0.1, 0.2, 1.0], [0.3, -0.1, 2.0], [-0.2, 0.0, 1.5], [0.0, 0.0, 3.0]])
    uv = project(pts, intr, extr)
    c = Correspondences(pts, uv + [3.0, 4.0])
    assert rms_per_corner(c, intr, extr) == pytest.approx(5.0, abs=1e-12)
    assert pnp_cost(c, intr, extr) == pytest.approx(4 * 25.0, abs=1e-9)


def test_rms_zero_at_truth(noisy_scenes):
    s = noisy_scenes[1]
    assert rms_per_corner(truth_correspondences(s), s.intrinsics, s.truth.extrinsics) < 1e-9


def test_pnp_exact_init_stays(noisy_scenes):
    s = noisy_scenes[0]
    res = solve_pnp(truth_correspondences(s), s.intrinsics, s.truth.extrinsics)
    assert res.final_cost < 1e-12
    a, t = errors(res.extrinsics, s.truth.extrinsics)
    assert a < 1e-6 and t < 1e-8


def test_pnp_recovers_from_cad_guess(noisy_scenes):
    for s in noisy_scenes[:3]:
        c = truth_correspondences(s)
        res = solve_pnp(c, s.intrinsics, s.init)
        a, t = errors(res.extrinsics, s.truth.extrinsics)
        assert a < 0.1 and t < 0.01
        assert res.converged
        assert res.final_cost <= res.initial_cost
        assert res.rms_per_corner == pytest.approx(np.sqrt(res.final_cost / (4 * c.n_targets)), abs=1e-9)
        assert res.rms_per_corner == pytest.approx(rms_per_corner(c, s.intrinsics, res.extrinsics), abs=1e-9)


def test_pnp_single_target_warns(noisy_scenes):
    s = noisy_scenes[0]
    full = truth_correspondences(s)
    one = Correspondences(full.lidar_vertices[:4], full.image_corners[:4])
    with pytest.warns(IllPosedWarning):
        res = solve_pnp(one, s.intrinsics, s.init)
    assert res.rms_per_corner < 1e-3
    assert res.warnings


def test_pnp_all_behind_camera(noisy_scenes):
    s = noisy_scenes[0]
    flipped = RigidTransform(s.init.rotation, s.init.translation + [0.0, 0.0, -100.0])
    with pytest.raises(ValueError):
        solve_pnp(truth_correspondences(s), s.intrinsics, flipped)


def test_pnp_pixel_shift_equivariance(noisy_scenes):
    s = noisy_scenes[2]
    c = truth_correspondences(s)
    rng = np.random.default_rng(3)
    noisy = Correspondences(c.lidar_vertices, c.image_corners + rng.normal(0, 1.0, c.image_corners.shape))
    shifted = Correspondences(noisy.lidar_vertices, noisy.image_corners + [17.0, -9.0])
    a = solve_pnp(noisy, s.intrinsics, s.init)
    b = solve_pnp(shifted, s.intrinsics.shifted(17.0, -9.0), s.init)
    ang, tr = errors(a.extrinsics, b.extrinsics)
    assert np.deg2rad(ang) < 1e-6 and tr < 1e-6


def test_iou_perfect_at_truth(noisy_scenes):
    s = noisy_scenes[0]
    assert mean_iou(truth_correspondences(s), s.intrinsics, s.truth.extrinsics) == pytest.approx(1.0, abs=1e-6)


def test_iou_recovers_small_perturbation(noisy_scenes):
    s = noisy_scenes[3]
    rng = np.random.default_rng(4)
    init = perturbed(s.truth.extrinsics, rng, 2.0, 0.05)
    res = solve_iou(truth_correspondences(s), s.intrinsics, init)
    a, t = errors(res.extrinsics, s.truth.extrinsics)
    assert a < 0.3 and t < 0.02
    assert res.objective == "iou"
    assert 0.0 <= res.final_cost < res.initial_cost


def test_iou_no_overlap(noisy_scenes):
    s = noisy_scenes[0]
    c = truth_correspondences(s)
    far = Correspondences(c.lidar_vertices, c.image_corners + [2000.0, 0.0])
    with pytest.raises(NoOverlapError):
        solve_iou(far, s.intrinsics, s.truth.extrinsics)


def test_iou_uses_probe_when_start_misses(noisy_scenes):
    s = noisy_scenes[0]
    c = truth_correspondences(s)
    small = Correspondences(c.lidar_vertices[4:], c.image_corners[4:])
    init = perturb(s.truth.extrinsics, np.array([0.0, 0.0, np.deg2rad(8.0), 0.0, 0.0, 0.0]))
    assert mean_iou(small, s.intrinsics, init) == 0.0
    with pytest.warns(IllPosedWarning):
        res = solve_iou(small, s.intrinsics, init)
    assert any("probe" in w for w in res.warnings)
    assert res.final_cost < 0.1


def test_solve_dispatch_and_result_dict(noisy_scenes):
    s = noisy_scenes[0]
    c = truth_correspondences(s)
    res = solve(c, s.intrinsics, s.init, "pnp", SolverOptions(refine=False))
    assert isinstance(res, CalibrationResult)
    d = res.to_dict()
    assert set(d) >= {"extrinsics", "objective", "final_cost", "rms_per_corner", "converged"}
    with pytest.raises(ValueError):
        solve(c, s.intrinsics, s.init, "ransac")


def test_solver_options_from_dict():
    assert SolverOptions.from_dict({"xtol": 1e-8}).xtol == 1e-8
    with pytest.raises(TypeError):
        SolverOptions.from_dict({"bogus": 1})


def test_associate_orders_both_sides(noisy_scenes):
    s = noisy_scenes[4]
    c = truth_correspondences(s)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        uv = project(c.lidar_vertices, s.intrinsics, s.truth.extrinsics)
    assert np.allclose(uv, c.image_corners, atol=1e-9)
