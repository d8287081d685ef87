"""Square planar target and the dead-zone volume cost used to fit it.

The target frame has its x-axis normal to the face and its y/z axes along the
square's edges, so the ideal target occupies the box
``[-eps, eps] x [-d/2, d/2] x [-d/2, d/2]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import PointCloud

MIN_THICKNESS = 0.002

LARGE_TARGET_SIDE = 0.805
SMALL_TARGET_SIDE = 0.158


@dataclass(frozen=True)
class TargetModel:
    side: float
    thickness: float = MIN_THICKNESS

    def __post_init__(self):
        if not self.side > 0:
            raise ValueError("target side must be positive")
        if not self.thickness > 0:
            raise ValueError("target thickness must be positive")

    def reference_vertices(self) -> np.ndarray:
        """Corners of the x=0 face, in the order (-,-), (-,+), (+,+), (+,-) over (y, z)."""
        h = 0.5 * self.side
        return np.array(
            [
                [0.0, -h, -h],
                [0.0, -h, h],
                [0.0, h, h],
                [0.0, h, -h],
            ]
        )

    def half_extents(self) -> np.ndarray:
        h = 0.5 * self.side
        return np.array([self.thickness, h, h])

    def contains(self, points: np.ndarray) -> np.ndarray:
        p = np.atleast_2d(np.asarray(points, dtype=float))
        return np.all(np.abs(p) <= self.half_extents(), axis=1)

    def with_thickness(self, thickness: float) -> TargetModel:
        return TargetModel(self.side, thickness)


def hinge_cost(lam, a):
    """Distance from ``lam`` to the interval ``[-a, a]``; zero inside.

    Equal to ``min(|lam - a|, |lam + a|)`` whenever ``|lam| > a``. Works
    elementwise on arrays.
    """
    if np.any(np.asarray(a) < 0):
        raise ValueError("interval half-width must be non-negative")
    out = np.maximum(np.abs(lam) - a, 0.0)
    return float(out) if np.ndim(out) == 0 else out


def volume_cost(pulled_back, model: TargetModel) -> float:
    """Sum over points of the per-axis hinge costs against the target box.

    ``pulled_back`` is a target-frame PointCloud or a bare ``(N, 3)`` array
    already expressed in the target frame.
    """
    if isinstance(pulled_back, PointCloud):
        if pulled_back.frame != "target":
            raise ValueError("volume cost needs a cloud expressed in the target frame")
        pts = pulled_back.xyz
    else:
        pts = np.asarray(pulled_back, dtype=float).reshape(-1, 3)
    if len(pts) == 0:
        raise ValueError("volume cost of an empty cloud is undefined")
    excess = np.abs(pts) - model.half_extents()
    return float(np.maximum(excess, 0.0).sum())


def plane_residuals(xyz: np.ndarray) -> np.ndarray:
    """Signed distances of points to their least-squares (PCA) plane."""
    xyz = np.asarray(xyz, dtype=float)
    centered = xyz - xyz.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    return centered @ vt[-1]


def default_thickness(cloud: PointCloud | np.ndarray, floor: float = MIN_THICKNESS) -> float:
    """Spread of the returns about their plane, floored so clean data keeps a real volume."""
    xyz = cloud.xyz if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=float)
    if len(xyz) < 3:
        return floor
    return max(float(np.std(plane_residuals(xyz))), floor)
