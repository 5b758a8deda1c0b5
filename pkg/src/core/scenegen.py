# FILE: src/core/scenegen.py
# Synthetic beacon scenes: the approach trajectory and frames rendered from
# ground-truth poses. Beacons are uniform bright disks on a noisy background.

import logging
import math
from dataclasses import replace
from typing import List, Sequence, Tuple

import numpy as np

from src.core.geometry import project_visible_set
from src.models.camera import CameraIntrinsics, FeaturePoint3D
from src.models.config import SceneConfig, TrajectoryConfig
from src.models.images import RgbImage
from src.models.pose import PoseVector

logger = logging.getLogger("SceneGen")

# Rejection sampling attempts per distractor before giving up on it
MAX_PLACEMENT_ATTEMPTS = 1000


def gen_trajectory(cfg: TrajectoryConfig = TrajectoryConfig()) -> List[PoseVector]:
    """Straight approach: pose_k = start + k * (0, step_y, step_z, 0, 0, 0)

    With attitude_jitter > 0 every pose gets uniform noise in
    [-attitude_jitter, attitude_jitter] degrees on psi, theta and phi, drawn
    from cfg.rng_seed.
    """
    k = np.arange(cfg.frame_count, dtype=float)[:, None]
    poses = np.tile(cfg.start.as_array(), (cfg.frame_count, 1))
    poses += k * np.array([0.0, cfg.step_y, cfg.step_z, 0.0, 0.0, 0.0])
    if cfg.attitude_jitter > 0:
        rng = np.random.default_rng(cfg.rng_seed)
        poses[:, 3:] += rng.uniform(-cfg.attitude_jitter, cfg.attitude_jitter, size=(cfg.frame_count, 3))
    return [PoseVector.from_array(row) for row in poses]


def frame_scene(scene: SceneConfig, k: int) -> SceneConfig:
    """Scene config of frame k, seeded with rng_seed XOR k"""
    return replace(scene, rng_seed=scene.rng_seed ^ k)


def _round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def beacon_centers(pose: PoseVector, intr: CameraIntrinsics, pfps: Sequence[FeaturePoint3D]) -> List[Tuple[int, int, int]]:
    """(pfp_id, u, v) of every visible beacon at its rounded projection"""
    if not pfps:
        return []
    return [
        (p.id, _round_half_up(p.u), _round_half_up(p.v))
        for p in project_visible_set(intr, pose, pfps)
        if p.visible
    ]


def place_distractors(centers, scene: SceneConfig, width: int, height: int, rng) -> List[Tuple[int, int]]:
    """Top-left corners of distractor squares kept clear of every beacon disk

    The square center must be at least distractor_clearance + beacon_radius +
    half the square diagonal away from each beacon center, so no square pixel
    comes within distractor_clearance of a disk.
    """
    size = scene.distractor_size
    if size > width or size > height:
        return []
    min_dist = scene.distractor_clearance + scene.beacon_radius + size * math.sqrt(2.0) / 2.0
    placed = []
    for index in range(scene.distractor_count):
        for _ in range(MAX_PLACEMENT_ATTEMPTS):
            left = int(rng.integers(0, width - size + 1))
            top = int(rng.integers(0, height - size + 1))
            cu = left + (size - 1) / 2.0
            cv = top + (size - 1) / 2.0
            if all(math.hypot(cu - u, cv - v) >= min_dist for _, u, v in centers):
                placed.append((left, top))
                break
        else:
            logger.warning(f"Could not place distractor {index} clear of the beacons, skipping it")
    return placed


def render_frame(pose: PoseVector, scene: SceneConfig, intr: CameraIntrinsics,
                 pfps: Sequence[FeaturePoint3D]) -> RgbImage:
    """Render the beacons seen from `pose` as an RGB frame with equal channels

    Background: background_intensity plus Gaussian noise (clamped to 0..255).
    Each visible PFP becomes a filled disk of beacon_radius at its rounded
    projection; out-of-view beacons are not drawn. Identical inputs give
    byte-identical images.
    """
    width, height = intr.width, intr.height
    rng = np.random.default_rng(scene.rng_seed)

    canvas = np.full((height, width), float(scene.background_intensity))
    if scene.noise_sigma > 0:
        canvas += rng.normal(0.0, scene.noise_sigma, size=canvas.shape)
    canvas = np.clip(np.rint(canvas), 0, 255).astype(np.uint8)

    centers = beacon_centers(pose, intr, pfps)

    for left, top in place_distractors(centers, scene, width, height, rng):
        canvas[top:top + scene.distractor_size, left:left + scene.distractor_size] = scene.beacon_intensity

    vv, uu = np.mgrid[0:height, 0:width]
    r2 = scene.beacon_radius * scene.beacon_radius
    for _, u, v in centers:
        canvas[(uu - u) ** 2 + (vv - v) ** 2 <= r2] = scene.beacon_intensity

    logger.debug(f"Rendered {len(centers)} beacons at pose {pose.as_array().tolist()}")
    return RgbImage(np.repeat(canvas[:, :, None], 3, axis=2))


def render_sequence(poses: Sequence[PoseVector], scene: SceneConfig, intr: CameraIntrinsics,
                    pfps: Sequence[FeaturePoint3D]) -> List[RgbImage]:
    """Render one frame per pose; frame k uses the seed rng_seed XOR k"""
    frames = [render_frame(pose, frame_scene(scene, k), intr, pfps) for k, pose in enumerate(poses)]
    logger.info(f"Rendered {len(frames)} frames at {intr.width}x{intr.height}")
    return frames
