"""Scene containers and their on-disk layout.

A scene directory holds ``scene.json`` plus, per target, one ``x,y,z,ring``
CSV per scan and a JSON file with the four image corners::

    scene_01/
      scene.json
      target0_scan0.csv ... target0_scan4.csv
      target0_corners.json
      ...

``scene.json`` references an intrinsics JSON (keys fx, fy, s, cx, cy) by
relative path, and may carry an initial extrinsic guess and, for synthetic
data, a ``truth`` block.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .camera import Intrinsics
from .geometry import PointCloud, RigidTransform
from .target import TargetModel

CLOUD_HEADER = ("x", "y", "z", "ring")


class SceneFormatError(ValueError):
    """Malformed scene, cloud, corner or pose file."""


@dataclass(frozen=True)
class SceneTruth:
    extrinsics: RigidTransform
    target_poses: tuple
    target_vertices: tuple

    def to_dict(self) -> dict:
        return {
            "extrinsics": self.extrinsics.to_dict(),
            "target_poses": [p.to_dict() for p in self.target_poses],
            "target_vertices": [np.asarray(v).tolist() for v in self.target_vertices],
        }

    @classmethod
    def from_dict(cls, data: dict) -> SceneTruth:
        return cls(
            extrinsics=RigidTransform.from_dict(data["extrinsics"]),
            target_poses=tuple(RigidTransform.from_dict(p) for p in data["target_poses"]),
            target_vertices=tuple(np.asarray(v, dtype=float) for v in data["target_vertices"]),
        )


@dataclass(frozen=True)
class TargetObservation:
    model: TargetModel
    scans: tuple
    corners: np.ndarray
    thickness_override: float | None = None

    def cloud(self) -> PointCloud:
        """All scans of this target stacked into one LiDAR-frame cloud."""
        return PointCloud.concatenate(self.scans)


@dataclass(frozen=True)
class Scene:
    name: str
    intrinsics: Intrinsics
    targets: tuple
    init: RigidTransform | None = None
    image_size: tuple | None = None
    truth: SceneTruth | None = None
    meta: dict = field(default_factory=dict)

    @property
    def n_targets(self) -> int:
        return len(self.targets)


def format_float(x: float) -> str:
    return repr(float(x))


def write_cloud(cloud: PointCloud, path: Path) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CLOUD_HEADER)
    for (x, y, z), r in zip(cloud.xyz, cloud.ring):
        w.writerow((format_float(x), format_float(y), format_float(z), int(r)))
    Path(path).write_text(buf.getvalue())


def read_cloud(path: Path) -> PointCloud:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CLOUD_HEADER:
            raise SceneFormatError(f"{path}: expected header {','.join(CLOUD_HEADER)}")
        xyz, ring = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                xyz.append([float(row[0]), float(row[1]), float(row[2])])
                ring.append(int(row[3]))
            except (ValueError, IndexError):
                raise SceneFormatError(f"{path}:{lineno}: malformed row {row!r}") from None
    if not xyz:
        raise SceneFormatError(f"{path}: point cloud is empty")
    try:
        return PointCloud(np.array(xyz), np.array(ring))
    except ValueError as exc:
        raise SceneFormatError(f"{path}: {exc}") from None


def read_json(path: Path):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SceneFormatError(f"{path}: invalid JSON ({exc.msg})") from None


def dump_json(data, path: Path) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def read_corners(path: Path) -> np.ndarray:
    data = read_json(path)
    try:
        corners = np.asarray(data, dtype=float)
    except (TypeError, ValueError):
        raise SceneFormatError(f"{path}: corners must be numeric [u, v] pairs") from None
    if corners.shape != (4, 2):
        raise SceneFormatError(f"{path}: expected 4 [u, v] pairs, got shape {corners.shape}")
    return corners


def read_pose(path: Path) -> RigidTransform:
    data = read_json(path)
    try:
        return RigidTransform.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise SceneFormatError(f"{path}: bad pose ({exc})") from None


def write_scene(scene: Scene, directory: Path, intrinsics_ref: str | None = None) -> Path:
    """Write ``scene`` under ``directory``; returns the scene.json path."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    if intrinsics_ref is None:
        intrinsics_ref = "intrinsics.json"
        dump_json(scene.intrinsics.to_dict(), d / intrinsics_ref)
    targets = []
    for k, obs in enumerate(scene.targets):
        scan_files = []
        for j, scan in enumerate(obs.scans):
            name = f"target{k}_scan{j}.csv"
            write_cloud(scan, d / name)
            scan_files.append(name)
        corner_file = f"target{k}_corners.json"
        dump_json([[float(u), float(v)] for u, v in obs.corners], d / corner_file)
        entry = {"side": float(obs.model.side), "scans": scan_files, "corners": corner_file}
        if obs.thickness_override is not None:
            entry["thickness"] = float(obs.thickness_override)
        targets.append(entry)
    doc = {"name": scene.name, "intrinsics": intrinsics_ref, "targets": targets}
    if scene.image_size is not None:
        doc["image_size"] = [int(x) for x in scene.image_size]
    if scene.init is not None:
        doc["init"] = scene.init.to_dict()
    if scene.truth is not None:
        doc["truth"] = scene.truth.to_dict()
    if scene.meta:
        doc["meta"] = scene.meta
    path = d / "scene.json"
    dump_json(doc, path)
    return path


def read_scene(path: Path) -> Scene:
    """Load a scene from its directory or its scene.json path."""
    p = Path(path)
    if p.is_dir():
        p = p / "scene.json"
    doc = read_json(p)
    base = p.parent
    try:
        intr_ref = doc["intrinsics"]
        intr = Intrinsics.from_dict(intr_ref) if isinstance(intr_ref, dict) else Intrinsics.from_dict(read_json(base / intr_ref))
        targets = []
        for entry in doc["targets"]:
            scans = tuple(read_cloud(base / f) for f in entry["scans"])
            if not scans:
                raise SceneFormatError(f"{p}: target lists no scans")
            thickness = entry.get("thickness")
            model = TargetModel(float(entry["side"]))
            targets.append(TargetObservation(model, scans, read_corners(base / entry["corners"]), thickness))
        init = RigidTransform.from_dict(doc["init"]) if "init" in doc else None
        truth = SceneTruth.from_dict(doc["truth"]) if "truth" in doc else None
        size = tuple(doc["image_size"]) if "image_size" in doc else None
    except KeyError as exc:
        raise SceneFormatError(f"{p}: missing key {exc}") from None
    except SceneFormatError:
        raise
    except (TypeError, ValueError) as exc:
        raise SceneFormatError(f"{p}: {exc}") from None
    if not targets:
        raise SceneFormatError(f"{p}: scene has no targets")
    return Scene(doc.get("name", base.name), intr, tuple(targets), init, size, truth, doc.get("meta", {}))


def discover_scenes(spec: str) -> list[Path]:
    """Expand a comma-separated list of scene or dataset directories.

    A dataset directory (one without scene.json) expands to its scene
    subdirectories in sorted order.
    """
    out: list[Path] = []
    for item in (s.strip() for s in spec.split(",")):
        if not item:
            continue
        p = Path(item)
        if p.is_file() and p.name == "scene.json":
            out.append(p.parent)
        elif (p / "scene.json").exists():
            out.append(p)
        elif p.is_dir():
            subs = sorted(q for q in p.iterdir() if (q / "scene.json").exists())
            if not subs:
                raise FileNotFoundError(f"{p}: no scenes found")
            out.extend(subs)
        else:
            raise FileNotFoundError(p)
    return out
