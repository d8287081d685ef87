"""LiDAR-to-camera extrinsics from vertex/corner correspondences.

Two objectives are offered: summed squared reprojection error (PnP) and the
mean per-target IoU between projected vertex quadrilaterals and image
corner quadrilaterals. Both are optimized locally from an initial guess in a
6-parameter chart ``init ∘ exp(delta)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np

from .camera import Intrinsics, project, project_unchecked
from .correspondence import canonical_sort
from .geometry import RigidTransform, perturb
from .polygon import iou
from .simplex import minimize_with_restarts

BEHIND_PENALTY_PX = 1e6


class NoOverlapError(ValueError):
    """Projected targets miss their image polygons at the guess and every probe."""


class IllPosedWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Correspondences:
    """Matched LiDAR vertices and image corners, four per target, same order on both sides."""

    lidar_vertices: np.ndarray
    image_corners: np.ndarray

    def __post_init__(self):
        lv = np.asarray(self.lidar_vertices, dtype=float).reshape(-1, 3)
        ic = np.asarray(self.image_corners, dtype=float).reshape(-1, 2)
        if len(lv) != len(ic) or len(lv) == 0 or len(lv) % 4:
            raise ValueError("need 4n LiDAR vertices and 4n image corners, n >= 1")
        object.__setattr__(self, "lidar_vertices", lv)
        object.__setattr__(self, "image_corners", ic)

    @property
    def n_targets(self) -> int:
        return len(self.lidar_vertices) // 4

    def groups(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return [(self.lidar_vertices[4 * k : 4 * k + 4], self.image_corners[4 * k : 4 * k + 4]) for k in range(self.n_targets)]

    @classmethod
    def concatenate(cls, items: Sequence[Correspondences]) -> Correspondences:
        return cls(
            np.concatenate([c.lidar_vertices for c in items]),
            np.concatenate([c.image_corners for c in items]),
        )


def associate(
    vertex_sets: Sequence[np.ndarray],
    corner_sets: Sequence[np.ndarray],
    intr: Intrinsics,
    guess: RigidTransform,
) -> Correspondences:
    """Pair each target's vertices with its image corners.

    LiDAR vertices are ordered after projecting them with ``guess``; image
    corners are ordered directly. Both use the top, right, bottom, left rule.
    """
    if len(vertex_sets) != len(corner_sets):
        raise ValueError("one corner set per vertex set required")
    lv, ic = [], []
    for verts, corners in zip(vertex_sets, corner_sets):
        lv.append(canonical_sort(verts, projector=lambda p: project(p, intr, guess)))
        ic.append(canonical_sort(corners))
    return Correspondences(np.concatenate(lv), np.concatenate(ic))


@dataclass(frozen=True)
class CalibrationResult:
    extrinsics: RigidTransform
    objective: str
    final_cost: float
    rms_per_corner: float
    converged: bool
    initial_cost: float = float("nan")
    iterations: int = 0
    warnings: tuple = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "extrinsics": self.extrinsics.to_dict(),
            "rotation_matrix": self.extrinsics.rotation.tolist(),
            "objective": self.objective,
            "final_cost": float(self.final_cost),
            "initial_cost": float(self.initial_cost),
            "rms_per_corner": float(self.rms_per_corner),
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
            "warnings": list(self.warnings),
        }


@dataclass(frozen=True)
class SolverOptions:
    max_iter: int = 2000
    xtol: float = 1e-10
    ftol: float = 1e-12
    rotation_step: float = 0.02
    translation_step: float = 0.05
    max_restarts: int = 6
    refine: bool = True
    gn_tol: float = 1e-10
    gn_max_iter: int = 50
    probe_rotation_deg: float = 5.0
    probe_translation_m: float = 0.1

    @classmethod
    def from_dict(cls, data: dict | None) -> SolverOptions:
        return cls(**dict(data or {}))

    def steps(self) -> np.ndarray:
        return np.array([self.rotation_step] * 3 + [self.translation_step] * 3)


def reprojection_residuals(c: Correspondences, intr: Intrinsics, extr: RigidTransform) -> np.ndarray:
    """Flattened (u, v) residuals; points behind the camera get a large fixed penalty."""
    uv, ok = project_unchecked(c.lidar_vertices, intr, extr)
    r = uv - c.image_corners
    r[~ok] = BEHIND_PENALTY_PX
    return r.ravel()


def rms_per_corner(c: Correspondences, intr: Intrinsics, extr: RigidTransform) -> float:
    """Root mean squared pixel distance per corner between projected vertices and image corners."""
    d = project(c.lidar_vertices, intr, extr) - c.image_corners
    return float(np.sqrt(np.sum(d * d) / len(c.lidar_vertices)))


def pnp_cost(c: Correspondences, intr: Intrinsics, extr: RigidTransform) -> float:
    r = reprojection_residuals(c, intr, extr)
    return float(r @ r)


def _gauss_newton(resid_fn, x0: np.ndarray, tol: float, max_iter: int) -> tuple[np.ndarray, float, int]:
    """Levenberg-damped Gauss-Newton with central-difference Jacobians; only accepts descent."""
    x = x0.copy()
    r = resid_fn(x)
    f = float(r @ r)
    lam = 1e-6
    it = 0
    for it in range(1, max_iter + 1):
        jac = np.empty((len(r), len(x)))
        for k in range(len(x)):
            h = 1e-7 * max(1.0, abs(x[k]))
            e = np.zeros_like(x)
            e[k] = h
            jac[:, k] = (resid_fn(x + e) - resid_fn(x - e)) / (2 * h)
        jtj, jtr = jac.T @ jac, jac.T @ r
        improved = False
        for _ in range(10):
            try:
                dx = -np.linalg.solve(jtj + lam * np.diag(np.diag(jtj) + 1e-12), jtr)
            except np.linalg.LinAlgError:
                lam *= 10
                continue
            r_new = resid_fn(x + dx)
            f_new = float(r_new @ r_new)
            if f_new <= f:
                improved = True
                break
            lam *= 10
        if not improved:
            break
        x, r, change, f = x + dx, r_new, f - f_new, f_new
        lam = max(lam / 10, 1e-12)
        if change < tol:
            break
    return x, f, it


def solve_pnp(
    c: Correspondences,
    intr: Intrinsics,
    init: RigidTransform,
    opts: SolverOptions | None = None,
) -> CalibrationResult:
    """Minimize summed squared reprojection error starting from ``init``."""
    opts = opts or SolverOptions()
    notes = []
    if c.n_targets == 1:
        msg = "a single target gives a weakly constrained pose; use two or more"
        warnings.warn(msg, IllPosedWarning, stacklevel=2)
        notes.append(msg)
    _, ok = project_unchecked(c.lidar_vertices, intr, init)
    if not np.any(ok):
        raise ValueError("all vertices are behind the camera at the initial guess")

    def resid(delta):
        return reprojection_residuals(c, intr, perturb(init, delta))

    def cost(delta):
        r = resid(delta)
        return float(r @ r)

    zero = np.zeros(6)
    f0 = cost(zero)
    res = minimize_with_restarts(cost, zero, opts.steps(), opts.xtol, opts.ftol, opts.max_iter, opts.max_restarts)
    x, f, nit = res.x, res.fun, res.nit
    if opts.refine:
        x_gn, f_gn, it_gn = _gauss_newton(resid, x, opts.gn_tol, opts.gn_max_iter)
        nit += it_gn
        if f_gn <= f:
            x, f = x_gn, f_gn
    extr = perturb(init, x)
    if not res.converged:
        notes.append("simplex hit its iteration cap")
    rms = float(np.sqrt(f / len(c.lidar_vertices)))
    return CalibrationResult(extr, "pnp", f, rms, res.converged, f0, nit, tuple(notes))


def mean_iou(c: Correspondences, intr: Intrinsics, extr: RigidTransform) -> float:
    """Mean over targets of IoU between projected vertex and image corner quadrilaterals."""
    uv, ok = project_unchecked(c.lidar_vertices, intr, extr)
    total = 0.0
    for k, (_, corners) in enumerate(c.groups()):
        sl = slice(4 * k, 4 * k + 4)
        if np.all(ok[sl]):
            total += iou(uv[sl], corners)
    return total / c.n_targets


def _probes(init: RigidTransform, opts: SolverOptions):
    r = np.deg2rad(opts.probe_rotation_deg)
    t = opts.probe_translation_m
    for axis, sign in product(range(6), (1.0, -1.0)):
        d = np.zeros(6)
        d[axis] = sign * (r if axis < 3 else t)
        yield d


def solve_iou(
    c: Correspondences,
    intr: Intrinsics,
    init: RigidTransform,
    opts: SolverOptions | None = None,
) -> CalibrationResult:
    """Maximize mean per-target IoU starting from ``init`` (or the best overlapping probe)."""
    opts = opts or SolverOptions()
    notes = []
    if c.n_targets == 1:
        msg = "a single target gives a weakly constrained pose; use two or more"
        warnings.warn(msg, IllPosedWarning, stacklevel=2)
        notes.append(msg)

    def cost(delta):
        return -mean_iou(c, intr, perturb(init, delta))

    start = np.zeros(6)
    f0 = cost(start)
    if f0 >= 0.0:
        best = None
        for d in _probes(init, opts):
            fd = cost(d)
            if fd < 0 and (best is None or fd < best[0]):
                best = (fd, d)
        if best is None:
            raise NoOverlapError("projected targets do not overlap their image corners near the guess")
        start = best[1]
        notes.append("started from a probe around the initial guess")
    res = minimize_with_restarts(cost, start, opts.steps(), opts.xtol, opts.ftol, opts.max_iter, opts.max_restarts)
    extr = perturb(init, res.x)
    try:
        rms = rms_per_corner(c, intr, extr)
    except ValueError:
        rms = float("inf")
    if not res.converged:
        notes.append("simplex hit its iteration cap")
    return CalibrationResult(extr, "iou", 1.0 + res.fun, rms, res.converged, 1.0 + f0, res.nit, tuple(notes))


def solve(c: Correspondences, intr: Intrinsics, init: RigidTransform, objective: str = "pnp", opts: SolverOptions | None = None) -> CalibrationResult:
    if objective == "pnp":
        return solve_pnp(c, intr, init, opts)
    if objective == "iou":
        return solve_iou(c, intr, init, opts)
    raise ValueError(f"unknown objective {objective!r}")
