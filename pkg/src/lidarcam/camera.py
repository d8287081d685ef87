"""Distortion-free pinhole projection of LiDAR-frame points into pixels.

Images must be undistorted beforehand; no lens model is applied here.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .geometry import RigidTransform

MIN_DEPTH = 1e-9


class BehindCameraError(ValueError):
    """A point lands at or behind the camera center after the extrinsic transform."""


@dataclass(frozen=True)
class Intrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    s: float = 0.0

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError("focal lengths must be positive")
        for name in ("fx", "fy", "cx", "cy", "s"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.fx, self.s, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])

    def shifted(self, du: float, dv: float) -> Intrinsics:
        return Intrinsics(self.fx, self.fy, self.cx + du, self.cy + dv, self.s)

    def to_dict(self) -> dict:
        return {k: float(v) for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, data: dict) -> Intrinsics:
        try:
            return cls(
                fx=float(data["fx"]),
                fy=float(data["fy"]),
                cx=float(data["cx"]),
                cy=float(data["cy"]),
                s=float(data.get("s", 0.0)),
            )
        except KeyError as exc:
            raise ValueError(f"intrinsics missing key {exc}") from None

    @classmethod
    def load(cls, path: str | Path) -> Intrinsics:
        return cls.from_dict(json.loads(Path(path).read_text()))


def camera_coordinates(points: np.ndarray, intr: Intrinsics, extr: RigidTransform) -> np.ndarray:
    """Homogeneous image coordinates ``(u', v', w')`` for each point."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    return extr.apply(p) @ intr.matrix.T


def project(points: np.ndarray, intr: Intrinsics, extr: RigidTransform | None = None) -> np.ndarray:
    """Pixel coordinates of one point ``(3,)`` or a batch ``(N, 3)``.

    ``extr`` maps LiDAR coordinates into the camera frame (identity if None).
    Raises BehindCameraError if any depth ``w'`` is at most 1e-9.
    """
    single = np.ndim(points) == 1
    h = camera_coordinates(points, intr, extr or RigidTransform.identity())
    w = h[:, 2]
    if np.any(w <= MIN_DEPTH):
        raise BehindCameraError("point is behind the camera")
    uv = h[:, :2] / w[:, None]
    return uv[0] if single else uv


def project_unchecked(points: np.ndarray, intr: Intrinsics, extr: RigidTransform) -> tuple[np.ndarray, np.ndarray]:
    """Projection plus a mask of points in front of the camera; no exception."""
    h = camera_coordinates(points, intr, extr)
    w = h[:, 2]
    ok = w > MIN_DEPTH
    uv = np.full((len(h), 2), np.nan)
    uv[ok] = h[ok, :2] / w[ok, None]
    return uv, ok
