"""Synthetic scenes with ground truth.

A spinning multi-beam LiDAR is modeled as a fan of fixed-elevation beams
sampled at quantized azimuths. Ranges are corrupted by a constant per-ring
bias plus Gaussian noise; the return direction itself is exact. Image corners
are exact projections of the true target vertices through the true
extrinsics, optionally with pixel noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

import numpy as np

from .camera import Intrinsics, project_unchecked
from .correspondence import canonical_sort
from .geometry import PointCloud, RigidTransform, rotvec_to_matrix
from .scene import Scene, SceneTruth, TargetObservation
from .target import LARGE_TARGET_SIDE, SMALL_TARGET_SIDE, TargetModel

DENSE_SPACING_DEG = 0.33
SPARSE_SPACING_DEG = 1.36


class EmptyCloudError(ValueError):
    """No beam of the LiDAR hits the target."""


class FrustumError(ValueError):
    """A target corner falls outside the camera image."""


def default_elevations(n_dense: int = 20, n_sparse_each: int = 6, dense_start: float = -4.0) -> tuple:
    """32-beam table: a dense band at 0.33 deg flanked by sparse bands at 1.36 deg."""
    dense = dense_start + DENSE_SPACING_DEG * np.arange(n_dense)
    below = dense[0] - SPARSE_SPACING_DEG * np.arange(n_sparse_each, 0, -1)
    above = dense[-1] + SPARSE_SPACING_DEG * np.arange(1, n_sparse_each + 1)
    return tuple(float(round(e, 6)) for e in np.concatenate([below, dense, above]))


@dataclass(frozen=True)
class LidarSpec:
    elevations_deg: tuple = field(default_factory=default_elevations)
    azimuth_resolution_deg: float = 0.1
    ring_bias: tuple | None = None
    noise_std: float = 0.0

    def __post_init__(self):
        if len(self.elevations_deg) < 2:
            raise ValueError("a LiDAR needs at least 2 beams")
        if not self.azimuth_resolution_deg > 0:
            raise ValueError("azimuth resolution must be positive")
        if self.ring_bias is not None and len(self.ring_bias) != len(self.elevations_deg):
            raise ValueError("one bias per ring required")
        if list(self.elevations_deg) != sorted(self.elevations_deg):
            raise ValueError("elevations must be ascending (ring 0 lowest)")

    @property
    def n_beams(self) -> int:
        return len(self.elevations_deg)

    def bias(self) -> np.ndarray:
        if self.ring_bias is None:
            return np.zeros(self.n_beams)
        return np.asarray(self.ring_bias, dtype=float)

    def with_random_bias(self, rng: np.random.Generator, max_bias: float) -> LidarSpec:
        """Per-ring constant range offsets drawn uniformly in ``[-max_bias, max_bias]``."""
        return replace(self, ring_bias=tuple(float(b) for b in rng.uniform(-max_bias, max_bias, self.n_beams)))

    def beam_directions(self, azimuths_rad: np.ndarray) -> np.ndarray:
        """Unit ray directions, shape ``(n_beams, n_azimuths, 3)``."""
        el = np.deg2rad(np.asarray(self.elevations_deg))[:, None]
        az = np.asarray(azimuths_rad)[None, :]
        return np.stack(
            np.broadcast_arrays(np.cos(el) * np.cos(az), np.cos(el) * np.sin(az), np.sin(el)),
            axis=-1,
        )


def _azimuth_grid(vertices: np.ndarray, res_deg: float, offset_deg: float) -> np.ndarray:
    az = np.rad2deg(np.arctan2(vertices[:, 1], vertices[:, 0]))
    lo, hi = az.min(), az.max()
    k0 = int(np.ceil((lo - offset_deg) / res_deg))
    k1 = int(np.floor((hi - offset_deg) / res_deg))
    return np.deg2rad(offset_deg + res_deg * np.arange(k0, k1 + 1))


def sample_target(
    spec: LidarSpec,
    model: TargetModel,
    pose: RigidTransform,
    seed=None,
    azimuth_offset_deg: float = 0.0,
) -> PointCloud:
    """One revolution's returns from a square target at ``pose`` (target to LiDAR).

    ``seed`` (int or Generator) drives the Gaussian range noise only; biases
    come from ``spec``.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    verts = pose.apply(model.reference_vertices())
    if np.any(verts[:, 0] <= 0):
        raise EmptyCloudError("target must lie in front of the LiDAR (x > 0)")
    az = _azimuth_grid(verts, spec.azimuth_resolution_deg, azimuth_offset_deg)
    if len(az) == 0:
        raise EmptyCloudError("target falls between azimuth samples")
    dirs = spec.beam_directions(az)
    normal = pose.rotation[:, 0]
    denom = dirs @ normal
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (normal @ pose.translation) / denom
    hits = dirs * t[..., None]
    local = (hits - pose.translation) @ pose.rotation
    h = 0.5 * model.side
    inside = (t > 0) & (np.abs(local[..., 1]) <= h) & (np.abs(local[..., 2]) <= h) & np.isfinite(t)
    beam_idx, az_idx = np.nonzero(inside)
    if len(beam_idx) == 0:
        raise EmptyCloudError("no beam intersects the target")
    rng_true = t[beam_idx, az_idx]
    noise = rng.normal(0.0, spec.noise_std, len(rng_true)) if spec.noise_std > 0 else 0.0
    ranges = rng_true + spec.bias()[beam_idx] + noise
    xyz = dirs[beam_idx, az_idx] * ranges[:, None]
    return PointCloud(xyz, beam_idx)


def _rot_z(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _rot_y(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _rot_x(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


@dataclass(frozen=True)
class TargetPlacement:
    """Where a target sits, as seen from the LiDAR.

    The face normal starts pointing at the sensor, is then yawed about the
    vertical and pitched about its horizontal edge; ``roll_deg`` spins the
    square in its own plane (45 gives the diamond presentation).
    """

    side: float
    distance: float
    azimuth_deg: float = 0.0
    elevation_deg: float = 0.0
    yaw_deg: float = 0.0
    pitch_deg: float = 0.0
    roll_deg: float = 45.0

    def pose(self) -> RigidTransform:
        az, el = np.deg2rad(self.azimuth_deg), np.deg2rad(self.elevation_deg)
        ray = np.array([np.cos(el) * np.cos(az), np.cos(el) * np.sin(az), np.sin(el)])
        center = self.distance * ray
        x = -ray
        up = np.array([0.0, 0.0, 1.0])
        z = up - (up @ x) * x
        z /= np.linalg.norm(z)
        y = np.cross(z, x)
        face = np.column_stack([x, y, z])
        rot = _rot_z(np.deg2rad(self.yaw_deg)) @ face @ _rot_y(np.deg2rad(self.pitch_deg)) @ _rot_x(np.deg2rad(self.roll_deg))
        return RigidTransform(rot, center)

    def to_dict(self) -> dict:
        return {f.name: float(getattr(self, f.name)) for f in fields(self)}


# LiDAR (x fwd, y left, z up) to camera (x right, y down, z fwd) axes
NOMINAL_CAMERA_ROTATION = np.array([[0.0, -1.0, 0.0], [0.0, 0.0, -1.0], [1.0, 0.0, 0.0]])


def rig_extrinsics(camera_position, jitter_rotvec=(0.0, 0.0, 0.0)) -> RigidTransform:
    """LiDAR-to-camera transform for a camera at ``camera_position`` (LiDAR frame)."""
    rot = rotvec_to_matrix(np.asarray(jitter_rotvec, dtype=float)) @ NOMINAL_CAMERA_ROTATION
    return RigidTransform(rot, -rot @ np.asarray(camera_position, dtype=float))


def _unit(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def perturbed(truth: RigidTransform, rng: np.random.Generator, angle_deg: float, offset_m: float) -> RigidTransform:
    """``truth`` moved by exactly ``angle_deg`` about a random axis and ``offset_m`` along a random direction."""
    rot = rotvec_to_matrix(np.deg2rad(angle_deg) * _unit(rng)) @ truth.rotation
    return RigidTransform(rot, truth.translation + offset_m * _unit(rng))


@dataclass(frozen=True)
class SimulationConfig:
    n_scenes: int = 7
    n_scans: int = 5
    seed: int = 0
    elevations_deg: tuple | None = None
    azimuth_resolution_deg: float = 0.1
    noise_std: float = 0.01
    bias_max: float = 0.03
    corner_noise_px: float = 0.0
    fx: float = 615.0
    fy: float = 615.0
    cx: float = 320.0
    cy: float = 240.0
    skew: float = 0.0
    image_size: tuple = (640, 480)
    frustum_margin_px: float = 2.0
    camera_position: tuple = (0.10, 0.0, -0.20)
    extrinsic_jitter_deg: float = 1.0
    init_rotation_deg: float = 5.0
    init_translation_m: float = 0.10
    large_side: float = LARGE_TARGET_SIDE
    small_side: float = SMALL_TARGET_SIDE
    large_distance: tuple = (3.0, 5.0)
    small_distance: tuple = (1.4, 2.2)
    large_elevation_deg: tuple = (-2.0, 1.0)
    small_elevation_deg: tuple = (-5.0, -1.0)
    azimuth_deg: tuple = (6.0, 18.0)
    yaw_deg: tuple = (-35.0, 35.0)
    pitch_deg: tuple = (-8.0, 8.0)
    roll_deg: tuple = (40.0, 50.0)
    min_rings: int = 6
    max_draws: int = 200
    placements: tuple | None = None

    @classmethod
    def from_dict(cls, data: dict | None) -> SimulationConfig:
        data = dict(data or {})
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown simulation keys: {sorted(unknown)}")
        for k, v in list(data.items()):
            if isinstance(v, list):
                data[k] = tuple(tuple(x) if isinstance(x, list) else x for x in v)
        if data.get("placements") is not None:
            data["placements"] = tuple(
                tuple(TargetPlacement(**p) if isinstance(p, dict) else p for p in scene)
                for scene in data["placements"]
            )
        return cls(**data)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "placements" and v is not None:
                v = [[p.to_dict() for p in scene] for scene in v]
            elif isinstance(v, tuple):
                v = list(v)
            out[f.name] = v
        return out

    def intrinsics(self) -> Intrinsics:
        return Intrinsics(self.fx, self.fy, self.cx, self.cy, self.skew)

    def lidar(self) -> LidarSpec:
        elev = self.elevations_deg if self.elevations_deg is not None else default_elevations()
        return LidarSpec(tuple(elev), self.azimuth_resolution_deg, None, self.noise_std)


@dataclass(frozen=True)
class Rig:
    lidar: LidarSpec
    intrinsics: Intrinsics
    extrinsics: RigidTransform
    init: RigidTransform


def make_rig(config: SimulationConfig) -> Rig:
    """Sensor pair shared by every scene of a dataset: ring biases, true and guessed extrinsics."""
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, 0]))
    lidar = config.lidar()
    if config.bias_max > 0:
        lidar = lidar.with_random_bias(rng, config.bias_max)
    jitter = np.deg2rad(config.extrinsic_jitter_deg) * rng.uniform(-1.0, 1.0, 3)
    truth = rig_extrinsics(config.camera_position, jitter)
    init = perturbed(truth, rng, config.init_rotation_deg, config.init_translation_m)
    return Rig(lidar, config.intrinsics(), truth, init)


def _draw_placements(config: SimulationConfig, rng: np.random.Generator) -> tuple:
    u = rng.uniform
    side_sign = 1.0 if u() < 0.5 else -1.0
    large = TargetPlacement(
        config.large_side,
        u(*config.large_distance),
        side_sign * u(*config.azimuth_deg),
        u(*config.large_elevation_deg),
        u(*config.yaw_deg),
        u(*config.pitch_deg),
        u(*config.roll_deg),
    )
    small = TargetPlacement(
        config.small_side,
        u(*config.small_distance),
        -side_sign * u(*config.azimuth_deg),
        u(*config.small_elevation_deg),
        u(*config.yaw_deg),
        u(*config.pitch_deg),
        u(*config.roll_deg),
    )
    return (large, small)


def check_frustum(corners_uv: np.ndarray, in_front: np.ndarray, config: SimulationConfig) -> None:
    w, h = config.image_size
    m = config.frustum_margin_px
    if not np.all(in_front):
        raise FrustumError("target corner behind the camera")
    if np.any(corners_uv[:, 0] < m) or np.any(corners_uv[:, 0] > w - m) or np.any(corners_uv[:, 1] < m) or np.any(corners_uv[:, 1] > h - m):
        raise FrustumError("target corner outside the image")


def _observe(placement: TargetPlacement, rig: Rig, config: SimulationConfig, rng: np.random.Generator):
    model = TargetModel(placement.side)
    pose = placement.pose()
    verts = pose.apply(model.reference_vertices())
    uv, ok = project_unchecked(verts, rig.intrinsics, rig.extrinsics)
    check_frustum(uv, ok, config)
    scans = []
    for _ in range(config.n_scans):
        offset = float(rng.uniform(0.0, config.azimuth_resolution_deg))
        scans.append(sample_target(rig.lidar, model, pose, rng, offset))
    corners = uv + (rng.normal(0.0, config.corner_noise_px, uv.shape) if config.corner_noise_px > 0 else 0.0)
    return TargetObservation(model, tuple(scans), canonical_sort(corners)), pose, verts


def make_scene(config: SimulationConfig, index: int, rig: Rig | None = None) -> tuple[Scene, SceneTruth]:
    """Scene ``index`` of the dataset described by ``config`` (deterministic in seed and index)."""
    rig = rig or make_rig(config)
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, 1, index]))
    explicit = config.placements is not None
    if explicit:
        if index >= len(config.placements):
            raise ValueError(f"no placements configured for scene {index}")
        candidates = [tuple(config.placements[index])]
    else:
        candidates = (_draw_placements(config, rng) for _ in range(config.max_draws))
    last_error = None
    for placements in candidates:
        try:
            observed = [_observe(p, rig, config, rng) for p in placements]
        except (FrustumError, EmptyCloudError) as exc:
            if explicit:
                raise
            last_error = exc
            continue
        rings = [min(len(s.rings) for s in obs.scans) for obs, _, _ in observed]
        if min(rings) < config.min_rings:
            if explicit:
                raise EmptyCloudError(f"target hit by only {min(rings)} rings (< {config.min_rings})")
            last_error = EmptyCloudError("too few rings on target")
            continue
        truth = SceneTruth(
            rig.extrinsics,
            tuple(pose for _, pose, _ in observed),
            tuple(verts for _, _, verts in observed),
        )
        scene = Scene(
            name=f"S{index + 1}",
            intrinsics=rig.intrinsics,
            targets=tuple(obs for obs, _, _ in observed),
            init=rig.init,
            image_size=tuple(config.image_size),
            truth=truth,
            meta={"placements": [p.to_dict() for p in placements], "seed": config.seed},
        )
        return scene, truth
    raise FrustumError(f"could not place targets after {config.max_draws} draws ({last_error})")


def make_dataset(config: SimulationConfig) -> list[Scene]:
    rig = make_rig(config)
    return [make_scene(config, i, rig)[0] for i in range(config.n_scenes)]
