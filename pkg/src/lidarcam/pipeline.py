"""Scene-level glue: vertex estimation per target and extrinsic fits over scene sets."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .baseline import RansacOptions, baseline_vertices
from .camera import Intrinsics
from .extrinsic import CalibrationResult, Correspondences, SolverOptions, associate, rms_per_corner, solve
from .geometry import RigidTransform
from .gl1 import FitOptions, fit_target
from .scene import Scene
from .vertices import VertexEstimate

METHODS = ("gl1", "baseline")
OBJECTIVES = ("pnp", "iou")


@dataclass(frozen=True)
class PipelineOptions:
    fit: FitOptions = field(default_factory=FitOptions)
    ransac: RansacOptions = field(default_factory=RansacOptions)
    solver: SolverOptions = field(default_factory=SolverOptions)

    @classmethod
    def from_dict(cls, data: dict | None) -> PipelineOptions:
        data = data or {}
        return cls(
            FitOptions.from_dict(data.get("fit")),
            RansacOptions.from_dict(data.get("ransac")),
            SolverOptions.from_dict(data.get("solver")),
        )


def estimate_scene_vertices(scene: Scene, method: str, opts: PipelineOptions | None = None) -> list[VertexEstimate]:
    """One vertex estimate per target of ``scene``."""
    opts = opts or PipelineOptions()
    out = []
    for obs in scene.targets:
        if method == "gl1":
            fit = opts.fit
            if obs.thickness_override is not None and fit.epsilon is None:
                fit = replace(fit, epsilon=obs.thickness_override)
            out.append(fit_target(obs.cloud(), obs.model, fit))
        elif method == "baseline":
            out.append(baseline_vertices(obs.scans, opts.ransac))
        else:
            raise ValueError(f"unknown method {method!r}")
    return out


def scene_correspondences(
    scene: Scene, estimates: Sequence[VertexEstimate], intr: Intrinsics, guess: RigidTransform
) -> Correspondences:
    return associate([e.vertices for e in estimates], [t.corners for t in scene.targets], intr, guess)


def calibrate(
    scenes: Sequence[Scene],
    estimates: Sequence[Sequence[VertexEstimate]],
    init: RigidTransform,
    objective: str = "pnp",
    opts: PipelineOptions | None = None,
) -> tuple[CalibrationResult, Correspondences]:
    """Fit extrinsics to every target of ``scenes`` jointly."""
    opts = opts or PipelineOptions()
    if not scenes:
        raise ValueError("no scenes to calibrate on")
    intr = scenes[0].intrinsics
    corr = Correspondences.concatenate(
        [scene_correspondences(s, e, intr, init) for s, e in zip(scenes, estimates)]
    )
    return solve(corr, intr, init, objective, opts.solver), corr


def evaluate(scene: Scene, estimates: Sequence[VertexEstimate], extr: RigidTransform) -> float:
    """Pixel RMS per corner of ``scene``'s vertices under ``extr``."""
    corr = scene_correspondences(scene, estimates, scene.intrinsics, extr)
    return rms_per_corner(corr, scene.intrinsics, extr)


def vertex_errors(scene: Scene, estimates: Sequence[VertexEstimate]) -> np.ndarray:
    """Distance of each estimated vertex to the nearest true vertex (synthetic scenes)."""
    if scene.truth is None:
        raise ValueError("scene has no ground truth")
    errs = []
    for est, tv in zip(estimates, scene.truth.target_vertices):
        errs.append(np.linalg.norm(est.vertices[:, None] - np.asarray(tv)[None], axis=2).min(axis=1))
    return np.concatenate(errs)
