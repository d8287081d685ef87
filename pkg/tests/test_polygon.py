import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lidarcam.polygon import ccw_sort, convex_intersection, iou, shoelace_area, signed_area
from oracles import mc_iou, random_convex

SQUARE = np.array([[0.0, 0], [1, 0], [1, 1], [0, 1]])


def test_shoelace_examples():
    assert shoelace_area(SQUARE) == 1.0
    assert shoelace_area(np.array([[0.0, 0], [1, 0], [0, 1]])) == 0.5
    assert shoelace_area(np.zeros((0, 2))) == 0.0
    assert shoelace_area(np.array([[0.0, 0], [1, 1]])) == 0.0


def test_shoelace_orientation_and_rotation():
    assert signed_area(SQUARE) == 1.0
    assert signed_area(SQUARE[::-1]) == -1.0
    assert shoelace_area(np.roll(SQUARE, 2, axis=0)) == 1.0


def test_ccw_sort_square_random_order(rng):
    hull = ccw_sort(SQUARE[rng.permutation(4)])
    assert len(hull) == 4
    assert signed_area(hull) == pytest.approx(1.0)
    assert np.array_equal(hull[0], [0, 0])


def test_ccw_sort_drops_interior_and_collinear():
    pts = np.vstack([SQUARE, [[0.5, 0.5], [0.5, 0.0]]])
    hull = ccw_sort(pts)
    assert len(hull) == 4
    assert shoelace_area(hull) == pytest.approx(1.0)


def test_hull_of_disc_samples_grows_to_disc_area():
    rng = np.random.default_rng(7)
    r = 0.5 * np.sqrt(rng.uniform(size=4000))
    t = rng.uniform(0, 2 * np.pi, 4000)
    pts = np.column_stack([r * np.cos(t), r * np.sin(t)])
    areas = [shoelace_area(ccw_sort(pts[:n])) for n in (10, 100, 1000, 4000)]
    assert all(a <= np.pi * 0.25 for a in areas)
    assert areas == sorted(areas)
    assert areas[-1] > 0.97 * np.pi * 0.25


def test_intersection_examples():
    inter = convex_intersection(SQUARE, SQUARE[::-1])
    assert shoelace_area(inter) == pytest.approx(1.0)
    assert len(convex_intersection(SQUARE, SQUARE + 5)) == 0


def test_iou_examples():
    assert iou(SQUARE, SQUARE) == 1.0
    assert iou(SQUARE, SQUARE + 3) == 0.0
    assert iou(SQUARE, SQUARE + [0.5, 0]) == pytest.approx(1 / 3, abs=1e-12)
    assert iou(np.zeros((4, 2)), np.zeros((4, 2))) == 0.0


def test_iou_touching_edges_is_zero():
    assert iou(SQUARE, SQUARE + [1.0, 0]) == pytest.approx(0.0, abs=1e-12)


def test_iou_matches_monte_carlo_small_sample():
    rng = np.random.default_rng(3)
    for _ in range(5):
        a = random_convex(rng)
        b = random_convex(rng, center=rng.uniform(-1, 1, 2))
        assert iou(a, b) == pytest.approx(mc_iou(a, b, rng, 50_000), abs=0.015)


@st.composite
def convex_polys(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    return random_convex(rng, n=draw(st.integers(3, 10)), center=rng.uniform(-1, 1, 2), scale=draw(st.floats(0.1, 2)))


@settings(max_examples=150, deadline=None)
@given(convex_polys(), convex_polys())
def test_iou_symmetric_and_bounded(a, b):
    v = iou(a, b)
    assert 0.0 <= v <= 1.0
    assert v == pytest.approx(iou(b, a), abs=1e-12)


@settings(max_examples=150, deadline=None)
@given(convex_polys(), convex_polys())
def test_intersection_no_larger_than_either(a, b):
    inter = shoelace_area(convex_intersection(a, b))
    assert inter <= min(shoelace_area(a), shoelace_area(b)) + 1e-9


@settings(max_examples=100, deadline=None)
@given(convex_polys(), st.floats(0.2, 0.9))
def test_intersection_with_contained_polygon(a, shrink):
    c = a.mean(axis=0)
    inner = c + shrink * (a - c)
    assert shoelace_area(convex_intersection(a, inner)) == pytest.approx(shoelace_area(inner), rel=1e-9)
    assert iou(a, inner) == pytest.approx(shrink**2, rel=1e-9)
