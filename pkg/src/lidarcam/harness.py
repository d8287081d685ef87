"""Round-robin validation: fit extrinsics on some scenes, score pixel RMS on the rest."""

from __future__ import annotations

import csv
import io
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from .extrinsic import IllPosedWarning
from .pipeline import PipelineOptions, calibrate, estimate_scene_vertices, evaluate
from .scene import Scene
from .vertices import VertexEstimate


@dataclass(frozen=True)
class RoundRobinRow:
    fit_set: tuple
    method: str
    objective: str
    n_tags: int
    cells: tuple
    fit_rms: float

    @property
    def validation(self) -> list[float]:
        return [v for i, v in enumerate(self.cells) if i not in self.fit_set]

    @property
    def mean(self) -> float:
        return float(np.mean(self.validation)) if self.validation else math.nan

    @property
    def std(self) -> float:
        v = self.validation
        return float(np.std(v, ddof=1)) if len(v) > 1 else math.nan


@dataclass
class RoundRobinReport:
    scene_names: tuple
    rows: list = field(default_factory=list)

    def summary(self) -> list[dict]:
        """Pooled mean and sample std of validation cells per method, objective and target count."""
        groups: dict[tuple, list[float]] = {}
        for r in self.rows:
            groups.setdefault((r.method, r.objective, r.n_tags), []).extend(r.validation)
        out = []
        for (method, objective, n_tags), vals in sorted(groups.items()):
            out.append(
                {
                    "method": method,
                    "objective": objective,
                    "n_tags": n_tags,
                    "n_cells": len(vals),
                    "mean": float(np.mean(vals)),
                    "std": float(np.std(vals, ddof=1)) if len(vals) > 1 else math.nan,
                }
            )
        return out

    def fit_label(self, row: RoundRobinRow) -> str:
        return "-".join(self.scene_names[i] for i in row.fit_set)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["fitting", "method", "objective", "n_tags", *self.scene_names, "mean", "std"])
        for r in self.rows:
            w.writerow([self.fit_label(r), r.method, r.objective, r.n_tags, *(f"{c:.6f}" for c in r.cells), f"{r.mean:.6f}", f"{r.std:.6f}"])
        return buf.getvalue()

    def cells_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["fitting", "method", "objective", "n_tags", "scene", "is_fitting", "rms_px"])
        for r in self.rows:
            for i, c in enumerate(r.cells):
                w.writerow([self.fit_label(r), r.method, r.objective, r.n_tags, self.scene_names[i], int(i in r.fit_set), f"{c:.6f}"])
        return buf.getvalue()

    def summary_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["method", "objective", "n_tags", "n_cells", "mean", "std"])
        for s in self.summary():
            w.writerow([s["method"], s["objective"], s["n_tags"], s["n_cells"], f"{s['mean']:.6f}", f"{s['std']:.6f}"])
        return buf.getvalue()

    def to_markdown(self) -> str:
        """Fitting x validation grid; fitting-set cells in brackets, then the pooled summary."""
        head = ["Fitting \\ Validation", "Method", "# Tag", *self.scene_names, "mean", "std"]
        lines = ["| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
        for r in self.rows:
            cells = [f"[{c:.4f}]" if i in r.fit_set else f"{c:.4f}" for i, c in enumerate(r.cells)]
            label = f"{METHOD_LABELS.get(r.method, r.method)}-{r.objective.upper()}"
            lines.append("| " + " | ".join([self.fit_label(r), label, str(r.n_tags), *cells, f"{r.mean:.4f}", f"{r.std:.4f}"]) + " |")
        lines += ["", "Bracketed cells belong to the fitting set and are excluded from mean and std.", ""]
        summ = self.summary()
        tags = sorted({s["n_tags"] for s in summ})
        keys = sorted({(s["method"], s["objective"]) for s in summ})
        lines.append("| Method | stat | " + " | ".join(str(t) for t in tags) + " |")
        lines.append("|---|---|" + "---|" * len(tags))
        lookup = {(s["method"], s["objective"], s["n_tags"]): s for s in summ}
        for stat in ("mean", "std"):
            for m, o in keys:
                vals = [f"{lookup[(m, o, t)][stat]:.4f}" if (m, o, t) in lookup else "" for t in tags]
                lines.append(f"| {METHOD_LABELS.get(m, m)}-{o.upper()} | {stat} | " + " | ".join(vals) + " |")
        return "\n".join(lines) + "\n"


METHOD_LABELS = {"gl1": "GL1", "baseline": "RN"}


def fitting_subsets(n_scenes: int, size: int, max_subsets: int | None, seed: int = 0) -> list[tuple]:
    """All size-``size`` scene subsets, or a seeded sample of ``max_subsets`` of them."""
    if size < 1 or size >= n_scenes:
        raise ValueError(f"fit size {size} must be between 1 and {n_scenes - 1}")
    subsets = list(combinations(range(n_scenes), size))
    if max_subsets is None or len(subsets) <= max_subsets:
        return subsets
    rng = np.random.default_rng(np.random.SeedSequence([seed, size]))
    pick = sorted(rng.choice(len(subsets), max_subsets, replace=False))
    return [subsets[i] for i in pick]


def _estimate_job(args):
    scene, method, opts = args
    return estimate_scene_vertices(scene, method, opts)


def estimate_all(
    scenes: Sequence[Scene], methods: Sequence[str], opts: PipelineOptions, workers: int = 1
) -> dict[str, list[list[VertexEstimate]]]:
    jobs = [(s, m, opts) for m in methods for s in scenes]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_estimate_job, jobs))
    else:
        results = [_estimate_job(j) for j in jobs]
    out: dict[str, list] = {m: [] for m in methods}
    for (_, m, _), r in zip(jobs, results):
        out[m].append(r)
    return out


def round_robin(
    scenes: Sequence[Scene],
    fit_sizes: Sequence[int] = (1,),
    methods: Sequence[str] = ("gl1", "baseline"),
    objectives: Sequence[str] = ("pnp",),
    opts: PipelineOptions | None = None,
    max_subsets: int | None = 7,
    seed: int = 0,
    workers: int = 1,
    estimates: dict | None = None,
) -> RoundRobinReport:
    """Every fitting subset x method x objective, scored on every scene.

    Fitting cells hold the RMS over the whole fitting set; validation cells
    hold the RMS of that single held-out scene.
    """
    opts = opts or PipelineOptions()
    if not scenes:
        raise ValueError("no scenes given")
    init = scenes[0].init
    if init is None:
        raise ValueError("scenes carry no initial extrinsic guess; supply one")
    estimates = estimates or estimate_all(scenes, methods, opts, workers)
    jobs = [
        (scenes, estimates[method], subset, method, objective, init, opts)
        for size in fit_sizes
        for subset in fitting_subsets(len(scenes), size, max_subsets, seed)
        for method in methods
        for objective in objectives
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_cell_job, jobs))
    else:
        rows = [_cell_job(j) for j in jobs]
    return RoundRobinReport(tuple(s.name for s in scenes), rows)


def _cell_job(args) -> RoundRobinRow:
    scenes, estimates, subset, method, objective, init, opts = args
    fit_scenes = [scenes[i] for i in subset]
    fit_est = [estimates[i] for i in subset]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IllPosedWarning)
        result, _ = calibrate(fit_scenes, fit_est, init, objective, opts)
    fit_rms = evaluate_set(fit_scenes, fit_est, result.extrinsics)
    cells = tuple(
        fit_rms if i in subset else evaluate(scenes[i], estimates[i], result.extrinsics)
        for i in range(len(scenes))
    )
    n_tags = sum(s.n_targets for s in fit_scenes)
    return RoundRobinRow(tuple(subset), method, objective, n_tags, cells, fit_rms)


def evaluate_set(scenes: Sequence[Scene], estimates: Sequence[Sequence[VertexEstimate]], extr) -> float:
    """Pooled per-corner RMS over several scenes."""
    sq, n = 0.0, 0
    for s, e in zip(scenes, estimates):
        r = evaluate(s, e, extr)
        k = 4 * s.n_targets
        sq += r * r * k
        n += k
    return math.sqrt(sq / n)
