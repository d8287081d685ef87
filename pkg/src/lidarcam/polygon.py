"""Convex polygon area, hull ordering, intersection and IoU in the image plane.

Polygons are ``(k, 2)`` arrays. "Counterclockwise" means positive signed
area in the (u, v) coordinates as given; with image ``v`` pointing down this
appears clockwise on screen, which does not matter for any result here.
"""

from __future__ import annotations

import numpy as np

EMPTY = np.zeros((0, 2))


def signed_area(poly: np.ndarray) -> float:
    p = np.asarray(poly, dtype=float).reshape(-1, 2)
    if len(p) < 3:
        return 0.0
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def shoelace_area(poly: np.ndarray) -> float:
    """Absolute shoelace area with wraparound; empty and degenerate inputs give 0."""
    return abs(signed_area(poly))


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def ccw_sort(points: np.ndarray) -> np.ndarray:
    """Convex hull by Graham's scan, counterclockwise from the lowest-v (then lowest-u) point.

    Interior and collinear boundary points are dropped.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        return EMPTY.copy()
    pts = np.unique(pts, axis=0)
    if len(pts) < 3:
        return pts[np.lexsort((pts[:, 0], pts[:, 1]))]
    scale = float(np.ptp(pts, axis=0).max()) or 1.0
    tol = 1e-12 * scale * scale
    pivot_idx = int(np.lexsort((pts[:, 0], pts[:, 1]))[0])
    pivot = pts[pivot_idx]
    rest = np.delete(pts, pivot_idx, axis=0)
    d = rest - pivot
    ang = np.arctan2(d[:, 1], d[:, 0])
    dist = np.hypot(d[:, 0], d[:, 1])
    rest = rest[np.lexsort((dist, ang))]
    hull = [pivot]
    for p in rest:
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], p) <= tol:
            hull.pop()
        hull.append(p)
    if len(hull) >= 3 and _cross(hull[-2], hull[-1], hull[0]) <= tol:
        hull.pop()
    return np.array(hull)


def _clip(subject: list, a: np.ndarray, b: np.ndarray, tol: float) -> list:
    """Keep the part of ``subject`` on the left of the directed edge a->b."""
    out = []
    if not subject:
        return out
    ex, ey = b[0] - a[0], b[1] - a[1]

    def side(p):
        return ex * (p[1] - a[1]) - ey * (p[0] - a[0])

    prev = subject[-1]
    s_prev = side(prev)
    for cur in subject:
        s_cur = side(cur)
        if s_cur >= -tol:
            if s_prev < -tol:
                t = s_prev / (s_prev - s_cur)
                out.append(prev + t * (cur - prev))
            out.append(cur)
        elif s_prev >= -tol:
            t = s_prev / (s_prev - s_cur)
            out.append(prev + t * (cur - prev))
        prev, s_prev = cur, s_cur
    return out


def convex_intersection(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Intersection of two convex polygons by clipping ``a`` against each edge of ``b``."""
    pa, pb = ccw_sort(a), ccw_sort(b)
    if len(pa) < 3 or len(pb) < 3:
        return EMPTY.copy()
    scale = max(float(np.ptp(pa, axis=0).max()), float(np.ptp(pb, axis=0).max()))
    tol = 1e-12 * scale * scale
    out = list(pa)
    for i in range(len(pb)):
        out = _clip(out, pb[i], pb[(i + 1) % len(pb)], tol)
        if not out:
            return EMPTY.copy()
    return ccw_sort(np.array(out))


def iou(a: np.ndarray, b: np.ndarray) -> float:
    """Intersection over union of two convex polygons; 0 when both are degenerate."""
    area_a, area_b = shoelace_area(ccw_sort(a)), shoelace_area(ccw_sort(b))
    inter = shoelace_area(convex_intersection(a, b))
    union = area_a + area_b - inter
    if union <= 0:
        return 0.0
    return float(min(max(inter / union, 0.0), 1.0))
