"""Target-based LiDAR-camera extrinsic calibration."""

from .baseline import NearParallelError, RansacOptions, baseline_vertices
from .camera import BehindCameraError, Intrinsics, project
from .correspondence import canonical_sort, sensor_view
from .extrinsic import (
    CalibrationResult,
    Correspondences,
    IllPosedWarning,
    NoOverlapError,
    SolverOptions,
    mean_iou,
    rms_per_corner,
    solve_iou,
    solve_pnp,
)
from .geometry import (
    ChartSingularityError,
    DegenerateInputError,
    PointCloud,
    PoseChart,
    RigidTransform,
    apply,
    chart_to_transform,
    compose,
    inverse,
    transform_to_chart,
)
from .gl1 import ConvergenceWarning, FitOptions, fit_target
from .harness import RoundRobinReport, round_robin
from .pipeline import PipelineOptions, calibrate, estimate_scene_vertices, evaluate
from .polygon import ccw_sort, iou, shoelace_area
from .scene import Scene, SceneFormatError, SceneTruth, read_scene, write_scene
from .simulate import EmptyCloudError, FrustumError, LidarSpec, SimulationConfig, make_dataset, make_scene, sample_target
from .target import TargetModel, hinge_cost, volume_cost
from .vertices import VertexEstimate

__version__ = "0.1.0"
