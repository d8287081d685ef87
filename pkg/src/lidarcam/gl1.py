"""Geometry-constrained vertex estimation.

The target's point cloud is pulled back into the reference frame of an ideal
box of known side and thickness; the pose minimizing the summed dead-zone
distance of points to that box is found by simplex descent, and the box's
reference vertices are pushed forward through it.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .correspondence import Projector, sort_order, sensor_view
from .geometry import DegenerateInputError, PointCloud, RigidTransform, perturb, rotvec_to_matrix
from .simplex import minimize_with_restarts
from .target import TargetModel, default_thickness
from .vertices import VertexEstimate

DEFAULT_START_ANGLES = (0.0, 15.0, 30.0, 45.0, 60.0, 75.0)


class ConvergenceWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class FitOptions:
    epsilon: float | None = None
    max_iter: int = 2000
    start_angles_deg: tuple = DEFAULT_START_ANGLES
    xtol: float = 1e-6
    ftol: float = 1e-9
    rotation_step: float = 0.1
    translation_step: float = 0.05
    max_restarts: int = 4

    @classmethod
    def from_dict(cls, data: dict | None) -> FitOptions:
        data = dict(data or {})
        if "start_angles_deg" in data:
            data["start_angles_deg"] = tuple(float(a) for a in data["start_angles_deg"])
        return cls(**data)


def _rot_x(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


# proper rotations mapping the target box onto itself
BOX_SYMMETRIES = tuple(
    flip @ _rot_x(k * np.pi / 2)
    for flip in (np.eye(3), np.diag([-1.0, 1.0, -1.0]))
    for k in range(4)
)


def principal_axes(xyz: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Centroid, singular values and sign-fixed principal axes (rows, major first).

    Signs follow the third moment of the in-plane coordinates so the result
    rotates with the data.
    """
    c = xyz.mean(axis=0)
    centered = xyz - c
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    axes = vt.copy()
    for k in (0, 1):
        if np.sum((centered @ axes[k]) ** 3) < 0:
            axes[k] = -axes[k]
    axes[2] = np.cross(axes[0], axes[1])
    return c, s, axes


def initialize_pose(
    cloud: PointCloud, model: TargetModel, angles_deg=DEFAULT_START_ANGLES
) -> list[RigidTransform]:
    """Candidate target-to-LiDAR poses, one per in-plane start angle.

    Each candidate is centered at the cloud centroid with its target x-axis
    along the cloud's minor principal axis.
    """
    xyz = cloud.xyz
    if len(xyz) < 10:
        raise DegenerateInputError("need at least 10 points to initialize a target pose")
    if len(np.unique(cloud.ring)) < 2:
        raise DegenerateInputError("need returns from at least 2 rings")
    c, s, axes = principal_axes(xyz)
    if s[1] <= 1e-9 * max(s[0], 1e-300):
        raise DegenerateInputError("points are collinear; plane is undefined")
    normal, u, w = axes[2], axes[0], axes[1]
    starts = []
    for a in angles_deg:
        t = np.deg2rad(a)
        y = np.cos(t) * u + np.sin(t) * w
        z = np.cross(normal, y)
        starts.append(RigidTransform(np.column_stack([normal, y, z]), c))
    return starts


def pullback_cost_factory(xyz: np.ndarray, start: RigidTransform, half_extents: np.ndarray):
    """Cost of the pose ``start ∘ exp(delta)`` as a function of the 6-vector ``delta``."""
    # coordinate-major layout keeps the per-call work in contiguous rows
    local = np.ascontiguousarray(((xyz - start.translation) @ start.rotation).T)
    half = np.asarray(half_extents, dtype=float)[:, None]

    def cost(delta: np.ndarray) -> float:
        rt = rotvec_to_matrix(delta[:3]).T
        pulled = rt @ local
        pulled -= (rt @ delta[3:])[:, None]
        np.abs(pulled, out=pulled)
        pulled -= half
        np.maximum(pulled, 0.0, out=pulled)
        return float(pulled.sum())

    return cost


def _canonical_symmetry(h: RigidTransform, ref: np.ndarray, projector: Projector) -> RigidTransform:
    """Re-express ``h`` through the box symmetry that lists vertices top, right, bottom, left."""
    order = sort_order(projector(h.apply(ref)))
    target = ref[order]
    for sym in BOX_SYMMETRIES:
        if np.allclose(ref @ sym.T, target, atol=1e-12):
            return RigidTransform(h.rotation @ sym, h.translation)
    raise RuntimeError("sorted vertices are not a cyclic traversal of the square")


def fit_target(
    cloud: PointCloud,
    model: TargetModel,
    opts: FitOptions | None = None,
    projector: Projector | None = None,
) -> VertexEstimate:
    """Fit the target box to a LiDAR-frame cloud and return its vertices.

    Every start angle is optimized to convergence; the lowest-cost pose wins.
    ``opts.epsilon`` overrides the box half-thickness, otherwise it follows
    the point spread about the cloud's plane.
    """
    opts = opts or FitOptions()
    if cloud.frame != "lidar":
        raise ValueError("fit_target expects a LiDAR-frame cloud")
    eps = opts.epsilon if opts.epsilon is not None else default_thickness(cloud)
    m = model.with_thickness(eps)
    starts = initialize_pose(cloud, m, opts.start_angles_deg)
    half = m.half_extents()
    steps = np.array([opts.rotation_step] * 3 + [opts.translation_step] * 3)

    best = None
    start_costs, initial_costs = [], []
    total_iter = 0
    all_converged = True
    zero = np.zeros(6)
    for h0 in starts:
        cost = pullback_cost_factory(cloud.xyz, h0, half)
        initial_costs.append(cost(zero))
        res = minimize_with_restarts(
            cost, zero, steps, opts.xtol, opts.ftol, opts.max_iter, opts.max_restarts
        )
        total_iter += res.nit
        all_converged &= res.converged
        start_costs.append(res.fun)
        if best is None or res.fun < best[0].fun:
            best = (res, h0)

    res, h0 = best
    notes = []
    if not all_converged:
        msg = "simplex hit its iteration cap before converging"
        warnings.warn(msg, ConvergenceWarning, stacklevel=2)
        notes.append(msg)
    h = perturb(h0, res.x)
    ref = m.reference_vertices()
    h = _canonical_symmetry(h, ref, projector or sensor_view)
    return VertexEstimate(
        vertices=h.apply(ref),
        fit_transform=h,
        residual_cost=res.fun,
        iterations=total_iter,
        method="gl1",
        geometry_imposed=True,
        converged=all_converged,
        start_costs=tuple(start_costs),
        initial_costs=tuple(initial_costs),
        thickness=eps,
        side=m.side,
        warnings=tuple(notes),
    )
