# FILE: src/core/settings_manager.py
# Run configuration: built-in defaults recursively merged with a TOML or JSON
# file and command line overrides, then validated into a RunConfig.

import copy
import json
import logging
from pathlib import Path
from typing import Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from src.core import constants
from src.core.error_handler import ConfigError, MVRPIOError
from src.core.geometry import intrinsics_from_fov
from src.models.config import (
    FastConfig,
    HarrisConfig,
    RunConfig,
    SceneConfig,
    SolverConfig,
    SusanConfig,
    TrajectoryConfig,
)
from src.models.pose import PoseVector

DEFAULT_SETTINGS = {
    "detector": "fast",
    "harris": {"k_h": 0.05, "window_radius": 2, "gaussian_sigma": 1.0, "response_threshold": 1e6, "nms_radius": 1},
    "susan": {"mask": "mask37", "t": 27.0, "g": None},
    "fast": {"epsilon": 25.0, "t_f": 12, "nms_radius": 1, "strict_count": False},
    "solver": {
        "max_iterations": 100,
        "lambda0": 1e-3,
        "lambda_up": 10.0,
        "lambda_down": 0.1,
        "step_tol": 1e-8,
        "residual_tol": 1e-10,
        "fd_step_pos": 1e-4,
        "fd_step_ang": 1e-4,
        "scale_by_match_count": True,
    },
    "scene": {
        "beacon_radius": 2,
        "beacon_intensity": 255,
        "background_intensity": 30,
        "noise_sigma": 2.0,
        "distractor_count": 0,
        "distractor_size": 5,
        "distractor_clearance": 10.0,
        "rng_seed": 0,
    },
    "trajectory": {
        "start": list(constants.PRE_CONTACT_POSE),
        "step_y": constants.TRAJECTORY_STEP_Y,
        "step_z": constants.TRAJECTORY_STEP_Z,
        "frame_count": constants.TRAJECTORY_FRAMES,
        "attitude_jitter": 0.0,
        "rng_seed": 0,
    },
    "intrinsics": {
        "fov_y": constants.DEFAULT_FOV_Y_DEG,
        "width": constants.IMAGE_WIDTH,
        "height": constants.IMAGE_HEIGHT,
        "alpha": constants.CAMERA_PITCH_DEG,
    },
    "t1": constants.T1_PIXELS,
    "t2": constants.T2_PERCENT,
    "miss_radius": 3.0,
    "init_noise_pos": 0.5,
    "init_noise_ang": 1.0,
    "outer_passes_max": 3,
    "output_dir": str(constants.RUNS_DIR),
    "seed": 0,
    "report_timing": True,
    "pfp_file": str(constants.PFP_TABLE_FILE),
}

_SECTIONS = {
    "harris": HarrisConfig,
    "susan": SusanConfig,
    "fast": FastConfig,
    "solver": SolverConfig,
    "scene": SceneConfig,
}


def merge_settings(defaults: dict, saved: dict, prefix: str = "", logger=None) -> dict:
    """Recursively merge `saved` over `defaults`; keys unknown to the defaults are dropped with a warning"""
    logger = logger or logging.getLogger("ConfigManager")
    merged = copy.deepcopy(defaults)
    for key, value in saved.items():
        name = f"{prefix}{key}"
        if key not in defaults:
            logger.warning(f"Unknown config key '{name}' ignored")
            continue
        if isinstance(defaults[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"Config key '{name}' must be a table")
            merged[key] = merge_settings(defaults[key], value, f"{name}.", logger)
        else:
            merged[key] = value
    return merged


class ConfigManager:
    """Holds the merged settings of one invocation and builds the RunConfig"""

    def __init__(self, config_file=None):
        self.logger = logging.getLogger("ConfigManager")
        self.settings = copy.deepcopy(DEFAULT_SETTINGS)
        self.config_file = Path(config_file) if config_file else None
        if self.config_file:
            self.load_settings(self.config_file)

    def load_settings(self, path):
        """Merge a `.toml` or `.json` config file over the current settings

        Raises:
            MVRPIOError: file cannot be read
            ConfigError: file cannot be parsed
        """
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise MVRPIOError(f"Cannot read config file {path}: {e}") from e

        try:
            if path.suffix.lower() == ".json":
                saved = json.loads(text)
            else:
                saved = tomllib.loads(text)
        except (json.JSONDecodeError, tomllib.TOMLDecodeError) as e:
            raise ConfigError(f"Cannot parse config file {path}: {e}") from e
        if not isinstance(saved, dict):
            raise ConfigError(f"Config file {path} must contain a table at the top level")

        self.settings = merge_settings(self.settings, saved, logger=self.logger)
        self.logger.info(f"Settings loaded from {path}")

    def get(self, *keys, default=None):
        value = self.settings
        for key in keys:
            if not isinstance(value, dict) or key not in value:
                return default
            value = value[key]
        return value

    def set(self, *keys, value):
        target = self.settings
        for key in keys[:-1]:
            target = target[key]
        target[keys[-1]] = value

    def apply_overrides(self, detector=None, output_dir=None, seed=None, report_timing=None):
        """Command line flags win over file values; a seed reseeds the scene, trajectory and prior"""
        if detector is not None:
            self.set("detector", value=detector)
        if output_dir is not None:
            self.set("output_dir", value=str(output_dir))
        if seed is not None:
            self.set("seed", value=int(seed))
            self.set("scene", "rng_seed", value=int(seed))
            self.set("trajectory", "rng_seed", value=int(seed))
        if report_timing is not None:
            self.set("report_timing", value=bool(report_timing))

    def build_run_config(self, output_dir: Optional[Path] = None) -> RunConfig:
        """Validate the merged settings into frozen config records

        Raises:
            ConfigError: a value has the wrong type or violates a constraint
        """
        s = self.settings
        try:
            sections = {name: cls(**s[name]) for name, cls in _SECTIONS.items()}
            trajectory = dict(s["trajectory"])
            trajectory["start"] = PoseVector(*trajectory["start"])
            sections["trajectory"] = TrajectoryConfig(**trajectory)
            intr = s["intrinsics"]
            sections["intrinsics"] = intrinsics_from_fov(intr["fov_y"], intr["width"], intr["height"], intr["alpha"])
            scalars = {key: value for key, value in s.items() if not isinstance(DEFAULT_SETTINGS[key], dict)}
            if output_dir is not None:
                scalars["output_dir"] = output_dir
            return RunConfig(**sections, **scalars)
        except ConfigError:
            raise
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid configuration: {e}") from e
