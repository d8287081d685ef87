import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lidarcam.geometry import PointCloud
from lidarcam.gl1 import BOX_SYMMETRIES
from lidarcam.target import (
    LARGE_TARGET_SIDE,
    SMALL_TARGET_SIDE,
    TargetModel,
    default_thickness,
    hinge_cost,
    volume_cost,
)


def test_reference_vertices_unit():
    v = TargetModel(2.0).reference_vertices()
    assert sorted(map(tuple, v)) == sorted([(0, s, t) for s in (-1, 1) for t in (-1, 1)])


@pytest.mark.parametrize("side,half", [(LARGE_TARGET_SIDE, 0.4025), (SMALL_TARGET_SIDE, 0.079)])
def test_reference_vertices_published_sizes(side, half):
    v = TargetModel(side).reference_vertices()
    assert np.allclose(np.abs(v[:, 1:]), half, atol=1e-12)
    assert np.all(v[:, 0] == 0)


def test_reference_vertices_are_cyclic_square():
    v = TargetModel(0.5).reference_vertices()
    edges = np.linalg.norm(v - np.roll(v, -1, axis=0), axis=1)
    assert np.allclose(edges, 0.5)


@pytest.mark.parametrize("lam,a,expected", [(0.5, 1, 0.0), (2, 1, 1.0), (-3, 0.5, 2.5), (1.0, 1.0, 0.0)])
def test_hinge_examples(lam, a, expected):
    assert hinge_cost(lam, a) == expected


def test_hinge_rejects_negative_width():
    with pytest.raises(ValueError):
        hinge_cost(1.0, -0.1)


def test_hinge_vectorized():
    out = hinge_cost(np.array([-2.0, 0.0, 2.0]), 1.0)
    assert np.array_equal(out, [1.0, 0.0, 1.0])


def test_volume_cost_examples():
    m = TargetModel(1.0, 0.02)
    inside = np.array([[0.0, 0.1, -0.2], [0.01, 0.5, 0.5], [-0.02, -0.4, 0.3]])
    assert volume_cost(inside, m) == 0.0
    assert volume_cost(np.array([[0.02 + 0.1, 0, 0]]), m) == pytest.approx(0.1, abs=1e-12)
    k = 17
    pts = np.tile([0.0, 0.55, 0.55], (k, 1))
    assert volume_cost(pts, m) == pytest.approx(k * 0.1, abs=1e-12)


def test_volume_cost_accepts_target_cloud_only():
    m = TargetModel(1.0)
    c = PointCloud(np.zeros((2, 3)), [0, 1], frame="target")
    assert volume_cost(c, m) == 0.0
    with pytest.raises(ValueError):
        volume_cost(PointCloud(np.zeros((2, 3)), [0, 1]), m)
    with pytest.raises(ValueError):
        volume_cost(np.zeros((0, 3)), m)


def test_default_thickness_floor_and_spread():
    rng = np.random.default_rng(0)
    flat = np.column_stack([np.zeros(500), rng.uniform(-1, 1, (500, 2))])
    assert default_thickness(flat) == pytest.approx(0.002)
    thick = flat.copy()
    thick[:, 0] = rng.normal(0, 0.05, 500)
    assert default_thickness(thick) == pytest.approx(np.std(thick[:, 0]), rel=0.05)


def test_model_validation():
    with pytest.raises(ValueError):
        TargetModel(0.0)
    with pytest.raises(ValueError):
        TargetModel(1.0, 0.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(-100, 100), st.floats(0, 100))
def test_hinge_even(lam, a):
    assert hinge_cost(lam, a) == hinge_cost(-lam, a)


@settings(max_examples=150, deadline=None)
@given(arrays(float, (20, 3), elements=st.floats(-2, 2)), st.sampled_from(range(8)))
def test_volume_cost_box_symmetry(pts, k):
    m = TargetModel(1.0, 0.05)
    assert volume_cost(pts @ BOX_SYMMETRIES[k].T, m) == pytest.approx(volume_cost(pts, m), abs=1e-12)


@settings(max_examples=150, deadline=None)
@given(arrays(float, (10, 3), elements=st.floats(-0.6, 0.6)))
def test_zero_cost_means_inside(pts):
    m = TargetModel(1.0, 0.3)
    if volume_cost(pts, m) == 0.0:
        assert np.all(m.contains(pts))
    else:
        assert not np.all(m.contains(pts))
