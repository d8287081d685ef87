"""Rigid-body transforms, point clouds and the axis-angle pose chart.

Points are plain ``numpy`` arrays: a single point has shape ``(3,)`` and a
batch has shape ``(N, 3)``. Transforms map ``p -> R @ p + T``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

ORTHO_TOL = 1e-6
SINGULARITY_TOL = 1e-12


class ChartSingularityError(ValueError):
    """Raised when a rotation of angle pi has no unique rotation vector."""


class DegenerateInputError(ValueError):
    """Raised when a point set lacks the spatial spread an estimator needs."""


def skew(v: np.ndarray) -> np.ndarray:
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def nearest_rotation(m: np.ndarray) -> np.ndarray:
    """Closest proper rotation to ``m`` in Frobenius norm (polar decomposition)."""
    u, _, vt = np.linalg.svd(np.asarray(m, dtype=float))
    d = np.sign(np.linalg.det(u @ vt))
    return u @ np.diag([1.0, 1.0, d]) @ vt


def rotvec_to_matrix(r: np.ndarray) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    theta = float(np.linalg.norm(r))
    k = skew(r)
    if theta < 1e-8:
        # second-order series; exact to double precision at this size
        return np.eye(3) + k + 0.5 * (k @ k)
    a = np.sin(theta) / theta
    b = (1.0 - np.cos(theta)) / theta**2
    return np.eye(3) + a * k + b * (k @ k)


def matrix_to_rotvec(rot: np.ndarray) -> np.ndarray:
    """Rotation vector with angle in ``[0, pi)``.

    Raises ChartSingularityError when ``trace(R) = -1`` (angle pi), where the
    axis sign is ambiguous.
    """
    rot = np.asarray(rot, dtype=float)
    tr = float(np.trace(rot))
    if abs(tr + 1.0) <= SINGULARITY_TOL:
        raise ChartSingularityError("rotation angle is pi; rotation vector is not unique")
    w = np.array([rot[2, 1] - rot[1, 2], rot[0, 2] - rot[2, 0], rot[1, 0] - rot[0, 1]])
    sin_t = 0.5 * np.linalg.norm(w)
    cos_t = 0.5 * (tr - 1.0)
    theta = float(np.arctan2(sin_t, cos_t))
    if theta < 1e-8:
        return 0.5 * w
    if cos_t > -0.9:
        return theta / (2.0 * np.sin(theta)) * w
    # near pi: recover the axis from the symmetric part, sign from w
    sym = 0.5 * (rot + rot.T) - cos_t * np.eye(3)
    col = int(np.argmax(np.diag(sym)))
    axis = sym[:, col] / np.linalg.norm(sym[:, col])
    if axis @ w < 0:
        axis = -axis
    return theta * axis


@dataclass(frozen=True)
class RigidTransform:
    """Element of SE(3): ``apply(p) = rotation @ p + translation``."""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        rot = np.array(self.rotation, dtype=float).reshape(3, 3)
        trans = np.array(self.translation, dtype=float).reshape(3)
        if not (np.all(np.isfinite(rot)) and np.all(np.isfinite(trans))):
            raise ValueError("transform entries must be finite")
        if np.abs(rot.T @ rot - np.eye(3)).max() > ORTHO_TOL or abs(np.linalg.det(rot) - 1.0) > ORTHO_TOL:
            raise ValueError("rotation must be orthonormal with determinant +1")
        rot.flags.writeable = False
        trans.flags.writeable = False
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", trans)

    @classmethod
    def identity(cls) -> RigidTransform:
        return cls()

    @classmethod
    def from_matrix(cls, h: np.ndarray) -> RigidTransform:
        h = np.asarray(h, dtype=float)
        return cls(h[:3, :3], h[:3, 3])

    @classmethod
    def from_rotvec(cls, rotvec, translation=(0.0, 0.0, 0.0)) -> RigidTransform:
        return cls(rotvec_to_matrix(np.asarray(rotvec, dtype=float)), translation)

    def as_matrix(self) -> np.ndarray:
        h = np.eye(4)
        h[:3, :3] = self.rotation
        h[:3, 3] = self.translation
        return h

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transform one point ``(3,)`` or a batch ``(N, 3)``."""
        p = np.asarray(points, dtype=float)
        return p @ self.rotation.T + self.translation

    def inverse(self) -> RigidTransform:
        rt = self.rotation.T
        return RigidTransform(rt, -rt @ self.translation)

    def compose(self, other: RigidTransform) -> RigidTransform:
        """``self ∘ other``: apply ``other`` first."""
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    __matmul__ = compose

    def rotvec(self) -> np.ndarray:
        return matrix_to_rotvec(self.rotation)

    def to_chart(self) -> PoseChart:
        return transform_to_chart(self)

    def angle_to(self, other: RigidTransform) -> float:
        """Geodesic rotation distance in radians."""
        rel = self.rotation.T @ other.rotation
        c = np.clip(0.5 * (np.trace(rel) - 1.0), -1.0, 1.0)
        return float(np.arccos(c))

    def to_dict(self) -> dict:
        return {"rotvec": [float(x) for x in self.rotvec()], "translation": [float(x) for x in self.translation]}

    @classmethod
    def from_dict(cls, data: dict) -> RigidTransform:
        if "rotation" in data:
            return cls(nearest_rotation(np.asarray(data["rotation"], dtype=float)), data["translation"])
        return cls.from_rotvec(data["rotvec"], data["translation"])


@dataclass(frozen=True)
class PoseChart:
    """Minimal 6-parameter pose: rotation vector (rad) then translation (m)."""

    rx: float = 0.0
    ry: float = 0.0
    rz: float = 0.0
    tx: float = 0.0
    ty: float = 0.0
    tz: float = 0.0

    @classmethod
    def from_vector(cls, v: Iterable[float]) -> PoseChart:
        return cls(*(float(x) for x in v))

    def as_vector(self) -> np.ndarray:
        return np.array([self.rx, self.ry, self.rz, self.tx, self.ty, self.tz])


def apply(t: RigidTransform, p: np.ndarray) -> np.ndarray:
    return t.apply(p)


def inverse(t: RigidTransform) -> RigidTransform:
    return t.inverse()


def compose(a: RigidTransform, b: RigidTransform) -> RigidTransform:
    return a.compose(b)


def chart_to_transform(c: PoseChart | np.ndarray) -> RigidTransform:
    v = c.as_vector() if isinstance(c, PoseChart) else np.asarray(c, dtype=float)
    return RigidTransform(rotvec_to_matrix(v[:3]), v[3:])


def transform_to_chart(t: RigidTransform) -> PoseChart:
    return PoseChart.from_vector(np.concatenate([matrix_to_rotvec(t.rotation), t.translation]))


def perturb(base: RigidTransform, delta: np.ndarray) -> RigidTransform:
    """Right-perturbation ``base ∘ exp(delta)``; the local chart used by optimizers."""
    d = np.asarray(delta, dtype=float)
    r = rotvec_to_matrix(d[:3])
    return RigidTransform(base.rotation @ r, base.rotation @ d[3:] + base.translation)


@dataclass(frozen=True)
class PointCloud:
    """LiDAR returns with their ring (beam) index.

    ``frame`` is ``"lidar"`` for sensor coordinates or ``"target"`` for a cloud
    pulled back into a target's reference frame.
    """

    xyz: np.ndarray
    ring: np.ndarray
    frame: str = "lidar"

    def __post_init__(self):
        xyz = np.array(self.xyz, dtype=float).reshape(-1, 3)
        ring = np.array(self.ring, dtype=int).reshape(-1)
        if len(ring) != len(xyz):
            raise ValueError("xyz and ring must have the same length")
        if not np.all(np.isfinite(xyz)):
            raise ValueError("point coordinates must be finite")
        if np.any(ring < 0):
            raise ValueError("ring indices must be non-negative")
        if self.frame not in ("lidar", "target"):
            raise ValueError(f"unknown frame tag {self.frame!r}")
        xyz.flags.writeable = False
        ring.flags.writeable = False
        object.__setattr__(self, "xyz", xyz)
        object.__setattr__(self, "ring", ring)

    def __len__(self) -> int:
        return len(self.xyz)

    @property
    def rings(self) -> np.ndarray:
        return np.unique(self.ring)

    def transformed(self, t: RigidTransform, frame: str | None = None) -> PointCloud:
        return PointCloud(t.apply(self.xyz), self.ring, frame or self.frame)

    @staticmethod
    def concatenate(clouds: Iterable[PointCloud]) -> PointCloud:
        clouds = list(clouds)
        if not clouds:
            raise ValueError("nothing to concatenate")
        frames = {c.frame for c in clouds}
        if len(frames) != 1:
            raise ValueError("cannot mix frames")
        return PointCloud(
            np.concatenate([c.xyz for c in clouds]),
            np.concatenate([c.ring for c in clouds]),
            frames.pop(),
        )
