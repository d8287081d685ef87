"""Edge-based baseline: plane by SVD, ring end points, RANSAC lines, corner intersections.

Vertices come from intersecting independently fitted edge lines, so nothing
forces them to form a square of the known size.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .correspondence import Projector, sensor_view, sort_order
from .geometry import DegenerateInputError, PointCloud, RigidTransform
from .vertices import VertexEstimate

EDGES = ("top_left", "top_right", "bottom_left", "bottom_right")


class NearParallelError(ValueError):
    """Adjacent edge lines are too close to parallel to intersect reliably."""


@dataclass(frozen=True)
class RansacOptions:
    threshold: float = 0.01
    iterations: int = 200
    seed: int = 0
    min_angle_deg: float = 1.0

    @classmethod
    def from_dict(cls, data: dict | None) -> RansacOptions:
        return cls(**dict(data or {}))


@dataclass(frozen=True)
class PlaneFrame:
    centroid: np.ndarray
    normal: np.ndarray
    horizontal: np.ndarray
    vertical: np.ndarray

    def to_plane(self, xyz: np.ndarray) -> np.ndarray:
        """Orthogonal projection into in-plane (horizontal, vertical) coordinates."""
        c = np.asarray(xyz, dtype=float) - self.centroid
        return np.column_stack([c @ self.horizontal, c @ self.vertical])

    def lift(self, uv: np.ndarray) -> np.ndarray:
        uv = np.atleast_2d(uv)
        return self.centroid + uv[:, :1] * self.horizontal + uv[:, 1:2] * self.vertical

    def as_transform(self) -> RigidTransform:
        return RigidTransform(np.column_stack([self.normal, self.horizontal, self.vertical]), self.centroid)


@dataclass(frozen=True)
class EdgePointSet:
    top_left: np.ndarray
    top_right: np.ndarray
    bottom_left: np.ndarray
    bottom_right: np.ndarray

    def counts(self) -> dict:
        return {e: len(getattr(self, e)) for e in EDGES}

    def total(self) -> int:
        return sum(self.counts().values())


@dataclass(frozen=True)
class Line2D:
    point: np.ndarray
    direction: np.ndarray

    def distance(self, pts: np.ndarray) -> np.ndarray:
        d = np.asarray(pts, dtype=float) - self.point
        return np.abs(d[:, 0] * self.direction[1] - d[:, 1] * self.direction[0])

    def slope(self) -> float:
        return float(self.direction[1] / self.direction[0])


def fit_plane(cloud: PointCloud | np.ndarray) -> PlaneFrame:
    """Centroid and SVD normal, oriented toward the sensor origin.

    The in-plane vertical axis is the LiDAR up direction projected onto the
    plane; the horizontal axis points to the right as seen from the sensor.
    """
    xyz = cloud.xyz if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=float)
    if len(xyz) < 3:
        raise DegenerateInputError("need at least 3 points to fit a plane")
    c = xyz.mean(axis=0)
    _, s, vt = np.linalg.svd(xyz - c, full_matrices=False)
    if s[1] <= 1e-9 * max(s[0], 1e-300):
        raise DegenerateInputError("points are collinear; plane is undefined")
    n = vt[2]
    if n @ (-c) < 0:
        n = -n
    up = np.array([0.0, 0.0, 1.0])
    v = up - (up @ n) * n
    if np.linalg.norm(v) < 1e-6:
        v = vt[0] - (vt[0] @ n) * n
    v /= np.linalg.norm(v)
    h = np.cross(v, n)
    h /= np.linalg.norm(h)
    return PlaneFrame(c, n, h, v)


def _as_scans(scans) -> list[PointCloud]:
    if isinstance(scans, PointCloud):
        return [scans]
    return list(scans)


def extract_edge_points(scans: PointCloud | Sequence[PointCloud], frame: PlaneFrame) -> EdgePointSet:
    """Left and right end points of every ring in every scan, sorted onto the four edges.

    Within a scan, rings whose mean vertical coordinate lies above the widest
    ring feed the top edges, rings below feed the bottom edges. The widest
    ring's own end points go left to bottom-left and right to top-right.
    """
    buckets = {e: [] for e in EDGES}
    any_multi = False
    for scan in _as_scans(scans):
        uv = frame.to_plane(scan.xyz)
        rings = np.unique(scan.ring)
        if len(rings) < 2:
            continue
        any_multi = True
        ends = []
        for r in rings:
            pts = uv[scan.ring == r]
            left = pts[np.argmin(pts[:, 0])]
            right = pts[np.argmax(pts[:, 0])]
            ends.append((left, right, right[0] - left[0], pts[:, 1].mean()))
        widest = max(range(len(ends)), key=lambda i: (ends[i][2], -i))
        v_ref = ends[widest][3]
        for i, (left, right, _, v_mean) in enumerate(ends):
            if i == widest:
                buckets["bottom_left"].append(left)
                buckets["top_right"].append(right)
            elif v_mean > v_ref:
                buckets["top_left"].append(left)
                buckets["top_right"].append(right)
            else:
                buckets["bottom_left"].append(left)
                buckets["bottom_right"].append(right)
    if not any_multi:
        raise DegenerateInputError("need at least 2 rings on the target to locate its edges")
    return EdgePointSet(**{e: np.array(buckets[e]).reshape(-1, 2) for e in EDGES})


def total_least_squares_line(pts: np.ndarray) -> Line2D:
    c = pts.mean(axis=0)
    _, _, vt = np.linalg.svd(pts - c)
    d = vt[0]
    if d[0] < 0 or (d[0] == 0 and d[1] < 0):
        d = -d
    return Line2D(c, d / np.linalg.norm(d))


def ransac_line(points: np.ndarray, opts: RansacOptions | None = None, rng: np.random.Generator | None = None) -> tuple[Line2D, np.ndarray]:
    """Consensus line through 2D points; returns the line and its inlier mask.

    Pairs are enumerated exhaustively when there are no more of them than
    ``opts.iterations``, otherwise sampled with ``rng``. The final line is a
    total-least-squares fit to the largest consensus set.
    """
    opts = opts or RansacOptions()
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(pts)
    if n < 2:
        raise DegenerateInputError("need at least 2 points to fit a line")
    n_pairs = n * (n - 1) // 2
    if n_pairs <= opts.iterations:
        pairs = combinations(range(n), 2)
    else:
        rng = rng if rng is not None else np.random.default_rng(opts.seed)
        pairs = (tuple(rng.choice(n, 2, replace=False)) for _ in range(opts.iterations))
    best_mask, best_score = None, (-1, 0.0)
    for i, j in pairs:
        d = pts[j] - pts[i]
        norm = np.linalg.norm(d)
        if norm == 0:
            continue
        dist = Line2D(pts[i], d / norm).distance(pts)
        mask = dist <= opts.threshold
        score = (int(mask.sum()), -float(dist[mask].sum()))
        if score > best_score:
            best_mask, best_score = mask, score
    if best_mask is None:
        raise DegenerateInputError("all edge points coincide")
    return total_least_squares_line(pts[best_mask]), best_mask


def intersect(a: Line2D, b: Line2D, min_angle_deg: float = 1.0) -> np.ndarray:
    cross = a.direction[0] * b.direction[1] - a.direction[1] * b.direction[0]
    if abs(cross) < np.sin(np.deg2rad(min_angle_deg)):
        raise NearParallelError("edge lines are nearly parallel")
    d = b.point - a.point
    s = (d[0] * b.direction[1] - d[1] * b.direction[0]) / cross
    return a.point + s * a.direction


def baseline_vertices(
    scans: PointCloud | Sequence[PointCloud],
    opts: RansacOptions | None = None,
    projector: Projector | None = None,
) -> VertexEstimate:
    """Vertices of a target from its (possibly multi-scan) cloud via edge-line intersection."""
    opts = opts or RansacOptions()
    scans = _as_scans(scans)
    cloud = PointCloud.concatenate(scans)
    frame = fit_plane(cloud)
    edges = extract_edge_points(scans, frame)
    lines = {}
    residuals = []
    for k, e in enumerate(EDGES):
        pts = getattr(edges, e)
        if len(pts) < 2:
            raise DegenerateInputError(f"edge {e} has {len(pts)} points; need 2")
        rng = np.random.default_rng(np.random.SeedSequence([opts.seed, k]))
        line, mask = ransac_line(pts, opts, rng)
        lines[e] = line
        residuals.append(line.distance(pts[mask]))
    corners_2d = np.array(
        [
            intersect(lines["top_left"], lines["top_right"], opts.min_angle_deg),
            intersect(lines["top_right"], lines["bottom_right"], opts.min_angle_deg),
            intersect(lines["bottom_right"], lines["bottom_left"], opts.min_angle_deg),
            intersect(lines["bottom_left"], lines["top_left"], opts.min_angle_deg),
        ]
    )
    verts = frame.lift(corners_2d)
    verts = verts[sort_order((projector or sensor_view)(verts))]
    return VertexEstimate(
        vertices=verts,
        fit_transform=frame.as_transform(),
        residual_cost=float(np.concatenate(residuals).mean()),
        iterations=len(EDGES) * opts.iterations,
        method="baseline",
        geometry_imposed=False,
        warnings=("vertices are not constrained to the target geometry",),
    )
