"""Result container shared by the vertex estimators."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import RigidTransform


@dataclass(frozen=True)
class VertexEstimate:
    """Four target vertices in the LiDAR frame, ordered top, right, bottom, left.

    For the geometry-constrained fit, ``vertices`` equals
    ``fit_transform.apply(model.reference_vertices())`` row for row. The
    baseline only fills ``fit_transform`` with its plane frame and sets
    ``geometry_imposed`` to False.
    """

    vertices: np.ndarray
    fit_transform: RigidTransform
    residual_cost: float
    iterations: int
    method: str
    geometry_imposed: bool = True
    converged: bool = True
    start_costs: tuple = ()
    initial_costs: tuple = ()
    thickness: float | None = None
    side: float | None = None
    warnings: tuple = field(default_factory=tuple)

    def edge_lengths(self) -> np.ndarray:
        v = self.vertices
        return np.linalg.norm(v - np.roll(v, -1, axis=0), axis=1)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "vertices": [[float(c) for c in v] for v in self.vertices],
            "fit_transform": self.fit_transform.to_dict(),
            "residual_cost": float(self.residual_cost),
            "iterations": int(self.iterations),
            "geometry_imposed": bool(self.geometry_imposed),
            "converged": bool(self.converged),
            "thickness": None if self.thickness is None else float(self.thickness),
            "side": None if self.side is None else float(self.side),
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, data: dict) -> VertexEstimate:
        return cls(
            vertices=np.asarray(data["vertices"], dtype=float),
            fit_transform=RigidTransform.from_dict(data["fit_transform"]),
            residual_cost=float(data["residual_cost"]),
            iterations=int(data["iterations"]),
            method=data["method"],
            geometry_imposed=bool(data.get("geometry_imposed", True)),
            converged=bool(data.get("converged", True)),
            thickness=data.get("thickness"),
            side=data.get("side"),
            warnings=tuple(data.get("warnings", ())),
        )
