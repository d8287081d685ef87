"""Ordering target corners so LiDAR vertices and image corners pair up.

Quadrilaterals are put in (top, right, bottom, left) order in image
convention: ``u`` grows to the right and ``v`` grows downward.
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

Projector = Callable[[np.ndarray], np.ndarray]


def sensor_view(points: np.ndarray) -> np.ndarray:
    """Unit pinhole looking down the LiDAR +x axis (y left, z up) mapped to (u, v)."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    depth = p[:, 0]
    if np.any(depth <= 1e-9):
        raise ValueError("points must lie in front of the sensor (x > 0)")
    return np.column_stack([-p[:, 1] / depth, -p[:, 2] / depth])


def sort_order(quad_uv: np.ndarray) -> np.ndarray:
    """Indices putting a 2D quadrilateral in top, right, bottom, left order."""
    q = np.asarray(quad_uv, dtype=float)
    if q.shape != (4, 2):
        raise ValueError("expected 4 points of 2 coordinates")
    scale = max(float(np.ptp(q, axis=0).max()), 1e-300)
    for i in range(4):
        for j in range(i + 1, 4):
            if np.linalg.norm(q[i] - q[j]) <= 1e-9 * scale or np.all(q[i] == q[j]):
                raise ValueError("quadrilateral has coincident corners")
    top = int(np.argmin(q[:, 1]))
    c = q.mean(axis=0)
    ang = np.arctan2(q[:, 1] - c[1], q[:, 0] - c[0])
    # with v pointing down, increasing atan2 angle is clockwise on screen
    rel = np.mod(ang - ang[top], 2 * np.pi)
    rel[top] = -1.0
    return np.argsort(rel, kind="stable")


def canonical_sort(quad: np.ndarray, projector: Optional[Projector] = None) -> np.ndarray:
    """Return ``quad`` reordered as top, right, bottom, left.

    2D inputs are sorted directly; 3D inputs are first mapped to the image
    plane with ``projector`` (default: the LiDAR's own forward view).
    """
    q = np.asarray(quad, dtype=float)
    if q.ndim != 2 or q.shape[0] != 4:
        raise ValueError("expected a quadrilateral (4 points)")
    if q.shape[1] == 2:
        uv = q
    elif q.shape[1] == 3:
        uv = (projector or sensor_view)(q)
    else:
        raise ValueError("points must be 2D or 3D")
    return q[sort_order(uv)]
