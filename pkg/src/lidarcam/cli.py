"""Command-line entry point: simulate, estimate-vertices, calibrate, validate.

Exit codes
----------
0  success
2  usage error (bad flags, empty scene list)
3  input file not found
4  malformed input (JSON, CSV, config)
5  target outside the camera frustum
6  degenerate geometry (too few points, parallel edges, points behind camera)
7  projected targets never overlap their image corners
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import plotting
from .camera import BehindCameraError
from .extrinsic import NoOverlapError
from .geometry import ChartSingularityError, DegenerateInputError
from .baseline import NearParallelError
from .harness import estimate_all, round_robin
from .pipeline import METHODS, OBJECTIVES, PipelineOptions, calibrate, estimate_scene_vertices, evaluate
from .scene import SceneFormatError, discover_scenes, dump_json, read_json, read_pose, read_scene, write_scene
from .simulate import EmptyCloudError, FrustumError, SimulationConfig, make_rig, make_scene

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MISSING = 3
EXIT_MALFORMED = 4
EXIT_FRUSTUM = 5
EXIT_DEGENERATE = 6
EXIT_NO_OVERLAP = 7

CONFIG_SECTIONS = ("fit", "ransac", "solver", "simulate")


class UsageError(Exception):
    pass


def _csv_list(text: str, allowed=None) -> list[str]:
    items = [t.strip() for t in text.split(",") if t.strip()]
    if allowed is not None:
        bad = [t for t in items if t not in allowed]
        if bad:
            raise UsageError(f"unknown choice(s) {bad}; expected one of {list(allowed)}")
    return items


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    data = read_json(Path(path))
    if not isinstance(data, dict):
        raise SceneFormatError(f"{path}: config must be a JSON object")
    unknown = set(data) - set(CONFIG_SECTIONS)
    if unknown:
        raise SceneFormatError(f"{path}: unknown config sections {sorted(unknown)}")
    return data


def _pipeline_options(args) -> PipelineOptions:
    cfg = load_config(args.config)
    try:
        opts = PipelineOptions.from_dict(cfg)
    except TypeError as exc:
        raise SceneFormatError(f"{args.config}: {exc}") from None
    if getattr(args, "seed", None) is not None:
        opts = replace(opts, ransac=replace(opts.ransac, seed=args.seed))
    return opts


def _load_scenes(spec: str):
    paths = discover_scenes(spec)
    if not paths:
        raise UsageError("scene list is empty")
    return [read_scene(p) for p in paths]


def cmd_simulate(args) -> int:
    cfg = load_config(args.config).get("simulate", {})
    if args.seed is not None:
        cfg = {**cfg, "seed": args.seed}
    if args.n_scenes is not None:
        cfg = {**cfg, "n_scenes": args.n_scenes}
    try:
        config = SimulationConfig.from_dict(cfg)
    except (TypeError, ValueError) as exc:
        raise SceneFormatError(f"simulation config: {exc}") from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rig = make_rig(config)
    dump_json(rig.intrinsics.to_dict(), out / "intrinsics.json")
    dump_json(rig.init.to_dict(), out / "init.json")
    dump_json(config.to_dict(), out / "config.json")
    truth = {"extrinsics": rig.extrinsics.to_dict(), "rotation_matrix": rig.extrinsics.rotation.tolist(), "ring_bias": rig.lidar.bias().tolist()}
    dump_json(truth, out / "truth.json")
    for i in range(config.n_scenes):
        scene, _ = make_scene(config, i, rig)
        write_scene(scene, out / scene.name, intrinsics_ref="../intrinsics.json")
        print(f"wrote {out / scene.name}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    opts = _pipeline_options(args)
    scene = read_scene(Path(args.scene))
    estimates = estimate_scene_vertices(scene, args.method, opts)
    doc = {"scene": scene.name, "method": args.method, "targets": [e.to_dict() for e in estimates]}
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_calibrate(args) -> int:
    methods = _csv_list(args.method, METHODS)
    opts = _pipeline_options(args)
    scenes = _load_scenes(args.scenes)
    init = read_pose(Path(args.init)) if args.init else scenes[0].init
    if init is None:
        raise UsageError("no --init given and the scenes carry no initial guess")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    estimates = estimate_all(scenes, methods, opts, args.workers)
    for method in methods:
        result, _ = calibrate(scenes, estimates[method], init, args.objective, opts)
        doc = result.to_dict()
        doc["method"] = method
        doc["scenes"] = [s.name for s in scenes]
        doc["per_scene_rms"] = {s.name: evaluate(s, e, result.extrinsics) for s, e in zip(scenes, estimates[method])}
        doc["vertices"] = {s.name: [t.to_dict() for t in e] for s, e in zip(scenes, estimates[method])}
        dump_json(doc, out / f"calibration_{method}_{args.objective}.json")
        for s, e in zip(scenes, estimates[method]):
            plotting.save_overlay(s, e, result.extrinsics, out / f"overlay_{method}_{args.objective}_{s.name}.svg")
        print(f"{method}\t{args.objective}\trms_px={result.rms_per_corner:.4f}\tconverged={result.converged}")
    return EXIT_OK


def cmd_validate(args) -> int:
    methods = _csv_list(args.methods, METHODS)
    objectives = _csv_list(args.objective, OBJECTIVES)
    try:
        sizes = [int(s) for s in _csv_list(args.fit_sizes)]
    except ValueError:
        raise UsageError(f"--fit-sizes must be integers, got {args.fit_sizes!r}") from None
    opts = _pipeline_options(args)
    scenes = _load_scenes(args.scenes)
    if args.init:
        init = read_pose(Path(args.init))
        scenes = [replace(s, init=init) for s in scenes]
    if any(s >= len(scenes) or s < 1 for s in sizes):
        raise UsageError(f"fit sizes must lie in 1..{len(scenes) - 1}")
    report = round_robin(
        scenes, sizes, methods, objectives, opts,
        max_subsets=args.max_subsets, seed=args.seed or 0, workers=args.workers,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "round_robin.csv").write_text(report.to_csv())
    (out / "round_robin_cells.csv").write_text(report.cells_csv())
    (out / "round_robin_summary.csv").write_text(report.summary_csv())
    md = report.to_markdown()
    (out / "round_robin.md").write_text(md)
    plotting.save_summary(report, out / "round_robin_summary.svg")
    sys.stdout.write(md)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lidarcam", description="Target-based LiDAR-camera extrinsic calibration.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON file with fit/ransac/solver/simulate sections")
        sp.add_argument("--seed", type=int, help="seed for every random choice (overrides config)")

    sp = sub.add_parser("simulate", help="write a synthetic dataset with ground truth")
    common(sp)
    sp.add_argument("--out", required=True)
    sp.add_argument("--n-scenes", type=int)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("estimate-vertices", help="estimate target vertices of one scene")
    common(sp)
    sp.add_argument("--scene", required=True)
    sp.add_argument("--method", choices=METHODS, default="gl1")
    sp.add_argument("--out", help="output JSON (default: stdout)")
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("calibrate", help="fit extrinsics on a set of scenes")
    common(sp)
    sp.add_argument("--scenes", required=True, help="comma-separated scene or dataset directories")
    sp.add_argument("--method", default="gl1", help="gl1, baseline or both comma-separated")
    sp.add_argument("--objective", choices=OBJECTIVES, default="pnp")
    sp.add_argument("--init", help="initial extrinsic guess JSON (default: from the scenes)")
    sp.add_argument("--out", required=True)
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_calibrate)

    sp = sub.add_parser("validate", help="round-robin validation report")
    common(sp)
    sp.add_argument("--scenes", required=True)
    sp.add_argument("--fit-sizes", default="1")
    sp.add_argument("--methods", default="gl1,baseline")
    sp.add_argument("--objective", default="pnp", help="pnp, iou or both comma-separated")
    sp.add_argument("--init", help="initial extrinsic guess JSON (default: from the scenes)")
    sp.add_argument("--max-subsets", type=int, default=7, help="cap on fitting subsets per size")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"lidarcam: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"lidarcam: file not found: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except SceneFormatError as exc:
        print(f"lidarcam: malformed input: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except FrustumError as exc:
        print(f"lidarcam: frustum violation: {exc}", file=sys.stderr)
        return EXIT_FRUSTUM
    except NoOverlapError as exc:
        print(f"lidarcam: no overlap: {exc}", file=sys.stderr)
        return EXIT_NO_OVERLAP
    except (DegenerateInputError, EmptyCloudError, NearParallelError, BehindCameraError, ChartSingularityError) as exc:
        print(f"lidarcam: degenerate input: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    sys.exit(main())
