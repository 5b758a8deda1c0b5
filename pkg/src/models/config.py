# FILE: src/models/config.py
# Frozen configuration records. The settings manager builds them from the
# defaults merged with a config file; tests construct them directly.

import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional

from src.core import constants
from src.core.error_handler import ConfigError
from src.models.camera import CameraIntrinsics
from src.models.features import DetectorKind
from src.models.pose import PoseVector

logger = logging.getLogger("Config")


def _require(condition, message):
    if not condition:
        raise ConfigError(message)


@dataclass(frozen=True)
class HarrisConfig:
    k_h: float = 0.05
    window_radius: int = 2
    gaussian_sigma: float = 1.0
    response_threshold: float = 1e6
    nms_radius: int = 1

    def __post_init__(self):
        _require(self.window_radius >= 1, f"Harris window_radius must be >= 1, got {self.window_radius}")
        _require(self.gaussian_sigma > 0, f"Harris gaussian_sigma must be positive, got {self.gaussian_sigma}")
        _require(self.nms_radius >= 1, f"Harris nms_radius must be >= 1, got {self.nms_radius}")
        if not 0.04 <= self.k_h <= 0.06:
            logger.warning(f"Harris k_h={self.k_h} is outside the usual 0.04-0.06 range")


class SusanMask(str, Enum):
    MASK37 = "mask37"
    MASK25 = "mask25"


@dataclass(frozen=True)
class SusanConfig:
    """SUSAN parameters; g defaults to half the maximum USAN of the chosen mask"""

    mask: SusanMask = SusanMask.MASK37
    t: float = 27.0
    g: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "mask", SusanMask(self.mask))
        if self.g is None:
            object.__setattr__(self, "g", 18.5 if self.mask is SusanMask.MASK37 else 12.5)
        _require(self.t > 0, f"SUSAN t must be positive, got {self.t}")
        _require(self.g > 0, f"SUSAN g must be positive, got {self.g}")


@dataclass(frozen=True)
class FastConfig:
    epsilon: float = 25.0
    t_f: int = 12
    nms_radius: int = 1
    strict_count: bool = False

    def __post_init__(self):
        _require(1 <= self.t_f <= 16, f"FAST t_f must be in 1..16, got {self.t_f}")
        _require(self.epsilon > 0, f"FAST epsilon must be positive, got {self.epsilon}")
        _require(self.nms_radius >= 1, f"FAST nms_radius must be >= 1, got {self.nms_radius}")


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 100
    lambda0: float = 1e-3
    lambda_up: float = 10.0
    lambda_down: float = 0.1
    step_tol: float = 1e-8
    residual_tol: float = 1e-10
    fd_step_pos: float = 1e-4
    fd_step_ang: float = 1e-4
    scale_by_match_count: bool = True

    def __post_init__(self):
        for name in ("max_iterations", "lambda0", "step_tol", "residual_tol", "fd_step_pos", "fd_step_ang"):
            _require(getattr(self, name) > 0, f"Solver {name} must be positive")
        _require(
            self.lambda_up > 1.0 > self.lambda_down > 0.0,
            f"Solver needs lambda_up > 1 > lambda_down > 0, got {self.lambda_up}, {self.lambda_down}",
        )


@dataclass(frozen=True)
class SceneConfig:
    beacon_radius: int = 2
    beacon_intensity: int = 255
    background_intensity: int = 30
    noise_sigma: float = 2.0
    distractor_count: int = 0
    distractor_size: int = 5
    distractor_clearance: float = 10.0
    rng_seed: int = 0

    def __post_init__(self):
        _require(self.beacon_radius >= 0, f"beacon_radius must be >= 0, got {self.beacon_radius}")
        _require(0 <= self.background_intensity <= 255, "background_intensity must be in 0..255")
        _require(0 <= self.beacon_intensity <= 255, "beacon_intensity must be in 0..255")
        _require(self.noise_sigma >= 0, f"noise_sigma must be >= 0, got {self.noise_sigma}")
        _require(self.distractor_count >= 0, "distractor_count must be >= 0")
        _require(self.distractor_size >= 1, "distractor_size must be >= 1")
        _require(
            self.beacon_intensity > self.background_intensity + 3.0 * self.noise_sigma,
            "beacon_intensity must exceed background_intensity + 3*noise_sigma",
        )


@dataclass(frozen=True)
class TrajectoryConfig:
    start: PoseVector = field(default_factory=lambda: PoseVector(*constants.PRE_CONTACT_POSE))
    step_y: float = constants.TRAJECTORY_STEP_Y
    step_z: float = constants.TRAJECTORY_STEP_Z
    frame_count: int = constants.TRAJECTORY_FRAMES
    attitude_jitter: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        _require(self.frame_count >= 1, f"frame_count must be >= 1, got {self.frame_count}")
        _require(self.attitude_jitter >= 0, "attitude_jitter must be >= 0")


def default_intrinsics() -> CameraIntrinsics:
    from src.core.geometry import intrinsics_from_fov

    return intrinsics_from_fov(
        constants.DEFAULT_FOV_Y_DEG, constants.IMAGE_WIDTH, constants.IMAGE_HEIGHT, constants.CAMERA_PITCH_DEG
    )


@dataclass(frozen=True)
class RunConfig:
    """Everything one trajectory run needs; field names mirror the config file keys"""

    detector: DetectorKind = DetectorKind.FAST
    harris: HarrisConfig = field(default_factory=HarrisConfig)
    susan: SusanConfig = field(default_factory=SusanConfig)
    fast: FastConfig = field(default_factory=FastConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    scene: SceneConfig = field(default_factory=SceneConfig)
    trajectory: TrajectoryConfig = field(default_factory=TrajectoryConfig)
    intrinsics: CameraIntrinsics = field(default_factory=default_intrinsics)
    t1: float = constants.T1_PIXELS
    t2: float = constants.T2_PERCENT
    miss_radius: float = 3.0
    init_noise_pos: float = 0.5
    init_noise_ang: float = 1.0
    outer_passes_max: int = 3
    output_dir: Path = constants.RUNS_DIR
    seed: int = 0
    report_timing: bool = True
    pfp_file: Path = constants.PFP_TABLE_FILE

    def __post_init__(self):
        object.__setattr__(self, "detector", DetectorKind.parse(self.detector))
        object.__setattr__(self, "output_dir", Path(self.output_dir))
        object.__setattr__(self, "pfp_file", Path(self.pfp_file))
        _require(self.t1 > 0 and self.t2 > 0, f"Thresholds must be positive, got t1={self.t1}, t2={self.t2}")
        _require(self.miss_radius > 0, f"miss_radius must be positive, got {self.miss_radius}")
        _require(self.init_noise_pos >= 0 and self.init_noise_ang >= 0, "Initial pose noise must be >= 0")
        _require(self.outer_passes_max >= 1, f"outer_passes_max must be >= 1, got {self.outer_passes_max}")
