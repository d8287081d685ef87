"""Static figures: per-scene projection overlays and the round-robin summary.

Figures are built on ``matplotlib.figure.Figure`` directly, so nothing here
touches pyplot state. SVG output is made reproducible by fixing the hash salt
and dropping the date stamp.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from .camera import project_unchecked
from .geometry import RigidTransform
from .harness import METHOD_LABELS, RoundRobinReport
from .scene import Scene
from .vertices import VertexEstimate

VERTEX_COLOR = "tab:green"
CLOUD_COLOR = "tab:red"
CORNER_COLOR = "black"
SVG_METADATA = {"Date": None, "Creator": None}


def _save(fig: Figure, path: Path) -> Path:
    path = Path(path)
    with matplotlib.rc_context({"svg.hashsalt": "lidarcam", "svg.fonttype": "none"}):
        fig.savefig(path, format=path.suffix.lstrip(".") or "svg", metadata=SVG_METADATA if path.suffix == ".svg" else None)
    return path


def _closed(poly: np.ndarray) -> np.ndarray:
    return np.vstack([poly, poly[:1]])


def overlay_figure(scene: Scene, estimates: Sequence[VertexEstimate], extr: RigidTransform) -> Figure:
    """One panel per target: image corners, projected cloud and projected vertices."""
    n = scene.n_targets
    fig = Figure(figsize=(4.0 * n, 4.0))
    for k, (obs, est) in enumerate(zip(scene.targets, estimates)):
        ax = fig.add_subplot(1, n, k + 1)
        cloud_uv, ok = project_unchecked(obs.cloud().xyz, scene.intrinsics, extr)
        vert_uv, vok = project_unchecked(est.vertices, scene.intrinsics, extr)
        ax.plot(*_closed(obs.corners).T, color=CORNER_COLOR, lw=1.0, label="image corners")
        ax.scatter(*cloud_uv[ok].T, s=2, color=CLOUD_COLOR, label="point cloud", rasterized=False)
        if np.all(vok):
            ax.plot(*_closed(vert_uv).T, color=VERTEX_COLOR, lw=1.0, marker="o", ms=4, label="vertices")
        ax.set_title(f"{scene.name} target {k} ({obs.model.side * 100:.1f} cm)", fontsize=9)
        ax.set_xlabel("u [px]")
        ax.set_ylabel("v [px]")
        ax.set_aspect("equal")
        ax.invert_yaxis()
        if k == 0:
            ax.legend(fontsize=7, loc="best")
    fig.tight_layout()
    return fig


def save_overlay(scene: Scene, estimates: Sequence[VertexEstimate], extr: RigidTransform, path: Path) -> Path:
    return _save(overlay_figure(scene, estimates, extr), path)


def summary_figure(report: RoundRobinReport) -> Figure:
    """Validation mean RMS with sample-std error bars, grouped by fitting target count."""
    summ = report.summary()
    tags = sorted({s["n_tags"] for s in summ})
    keys = sorted({(s["method"], s["objective"]) for s in summ})
    lookup = {(s["method"], s["objective"], s["n_tags"]): s for s in summ}
    fig = Figure(figsize=(5.0, 3.5))
    ax = fig.add_subplot(1, 1, 1)
    x = np.arange(len(tags))
    width = 0.8 / max(len(keys), 1)
    for j, (m, o) in enumerate(keys):
        mean = [lookup[(m, o, t)]["mean"] if (m, o, t) in lookup else np.nan for t in tags]
        std = [lookup[(m, o, t)]["std"] if (m, o, t) in lookup else np.nan for t in tags]
        std = np.nan_to_num(np.asarray(std, dtype=float))
        ax.bar(x + (j - (len(keys) - 1) / 2) * width, mean, width, yerr=std, capsize=3, label=f"{METHOD_LABELS.get(m, m)}-{o.upper()}")
    ax.set_xticks(x)
    ax.set_xticklabels([str(t) for t in tags])
    ax.set_xlabel("targets in fitting set")
    ax.set_ylabel("validation RMS [px per corner]")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def save_summary(report: RoundRobinReport, path: Path) -> Path:
    return _save(summary_figure(report), path)
