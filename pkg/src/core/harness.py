# FILE: src/core/harness.py
# The per-frame MVRP loop (extract, project, match, eliminate, solve), the
# trajectory runner and the per-detector summary.

import logging
import math
import time
from dataclasses import replace
from typing import Dict, List, Optional, Sequence

import numpy as np

from src.core.constants import MIN_MATCHES
from src.core.correspondence import eliminate_gross_errors, mutual_nearest_match
from src.core.detectors import detect
from src.core.error_handler import EmptyInputError, ImageFormatError
from src.core.geometry import load_pfp_table, project_visible_set
from src.core.image_io import v_channel
from src.core.scenegen import gen_trajectory, render_sequence
from src.core.solver import initial_pose, lm_solve
from src.models.camera import FeaturePoint3D, PixelPoint
from src.models.config import RunConfig
from src.models.features import DetectorKind, MatchSet
from src.models.images import RgbImage
from src.models.pose import PoseEstimate, PoseVector
from src.models.results import DetectorSummary, FrameResult, FrameStatus

logger = logging.getLogger("Harness")

BENCH_ORDER = (DetectorKind.HARRIS, DetectorKind.SUSAN, DetectorKind.FAST)


def count_missed(truth_points: Sequence[PixelPoint], extracted: Sequence[PixelPoint], radius: float) -> int:
    """Visible truth projections with no extracted point within `radius` pixels"""
    if not truth_points:
        return 0
    if not extracted:
        return len(truth_points)
    t = np.array([p.xy for p in truth_points], dtype=float)
    e = np.array([p.xy for p in extracted], dtype=float)
    dist = np.hypot(t[:, None, 0] - e[None, :, 0], t[:, None, 1] - e[None, :, 1])
    return int((dist.min(axis=1) > radius).sum())


def run_frame(image: RgbImage, k: int, init: PoseVector, cfg: RunConfig, truth: PoseVector,
              pfps: Optional[Sequence[FeaturePoint3D]] = None) -> FrameResult:
    """Estimate the pose for one frame

    Detection runs once; projection, matching, gross error elimination and the
    L-M solve repeat up to outer_passes_max times and stop early once a pass
    yields the same matched set as the one before. Failures are reported in
    the status, never raised.

    Args:
        image: RGB frame of the size given by cfg.intrinsics
        k: Frame index
        init: Initial pose value
        cfg: Run configuration
        truth: Ground-truth pose, used for the error and N_miss bookkeeping and
            to leave PFPs outside the frame out of matching
        pfps: PFP table (loaded from cfg.pfp_file when omitted)
    """
    intr = cfg.intrinsics
    if (image.width, image.height) != (intr.width, intr.height):
        raise ImageFormatError(
            f"Frame {k} is {image.width}x{image.height}, intrinsics expect {intr.width}x{intr.height}"
        )
    if pfps is None:
        pfps = load_pfp_table(cfg.pfp_file)

    gray = v_channel(image)
    start = time.perf_counter()
    corners = detect(gray, cfg.detector, cfg.harris, cfg.susan, cfg.fast)
    t_fe = time.perf_counter() - start if cfg.report_timing else 0.0
    extracted = [c.to_pixel_point() for c in corners]

    # PFPs outside the frame at truth have no beacon in the image
    truth_visible = [p for p in project_visible_set(intr, truth, pfps) if p.visible]
    in_view = {p.id for p in truth_visible}

    current = init
    estimate: Optional[PoseEstimate] = None
    matches = MatchSet()
    status = FrameStatus.OK
    passes = 0
    n_m = 0

    for _ in range(cfg.outer_passes_max):
        projected = [p for p in project_visible_set(intr, current, pfps) if p.visible and p.id in in_view]
        candidate = eliminate_gross_errors(mutual_nearest_match(projected, extracted), cfg.t1, cfg.t2)
        if estimate is not None and candidate.key() == matches.key():
            break
        if candidate.n_m < MIN_MATCHES:
            if estimate is not None:
                logger.debug(f"Frame {k}: pass {passes + 1} left {candidate.n_m} pairs, dropping the pass {passes} estimate")
            status = FrameStatus.INSUFFICIENT_POINTS
            n_m = candidate.n_m
            matches = candidate
            estimate = None
            break
        passes += 1
        matches = candidate
        n_m = candidate.n_m
        estimate = lm_solve(current, candidate, intr, pfps, cfg.solver)
        current = estimate.pose
        logger.debug(f"Frame {k}: pass {passes}, N_M={n_m}, rms {estimate.rms_residual:.4f} px")

    if estimate is None:
        estimate = PoseEstimate(pose=init, rms_residual=math.nan, iterations=0, converged=False, n_m=n_m)
    elif not estimate.converged:
        status = FrameStatus.NOT_CONVERGED

    result = FrameResult(
        k=k,
        detector=cfg.detector,
        estimate=estimate,
        truth=truth,
        t_fe=t_fe,
        n_extracted=len(extracted),
        n_visible=len(truth_visible),
        n_miss=count_missed(truth_visible, extracted, cfg.miss_radius),
        n_m=n_m,
        status=status,
        matches=matches,
        passes=passes,
    )
    if not result.ok:
        logger.warning(f"Frame {k} ({cfg.detector.value}): {status.value}, N_M={n_m}")
    return result


def noisy_prior(truth: PoseVector, cfg: RunConfig) -> PoseVector:
    """GPS/INS stand-in: truth plus uniform noise of +-init_noise_pos m and +-init_noise_ang deg"""
    rng = np.random.default_rng(cfg.seed)
    bounds = np.array([cfg.init_noise_pos] * 3 + [cfg.init_noise_ang] * 3)
    return truth + rng.uniform(-bounds, bounds)


def render_run_frames(cfg: RunConfig, pfps: Sequence[FeaturePoint3D]):
    """Ground-truth poses and rendered frames of the configured trajectory"""
    truths = gen_trajectory(cfg.trajectory)
    return truths, render_sequence(truths, cfg.scene, cfg.intrinsics, pfps)


def run_trajectory(cfg: RunConfig, truths: Optional[Sequence[PoseVector]] = None,
                   frames: Optional[Sequence[RgbImage]] = None,
                   pfps: Optional[Sequence[FeaturePoint3D]] = None) -> List[FrameResult]:
    """Run the MVRP loop over a whole sequence, in frame order

    The sequence is rendered from cfg unless truths and frames are given.
    Frame 0 starts from the noisy prior; every later frame starts from the
    previous estimate, or from the previous frame's initial value when that
    frame failed.
    """
    if pfps is None:
        pfps = load_pfp_table(cfg.pfp_file)
    if frames is None or truths is None:
        truths, frames = render_run_frames(cfg, pfps)
    if len(truths) != len(frames):
        raise ValueError(f"Got {len(frames)} frames for {len(truths)} ground-truth poses")

    logger.info(f"Running {cfg.detector.value} over {len(frames)} frames")
    prior = noisy_prior(truths[0], cfg) if truths else None
    previous: Optional[PoseEstimate] = None
    results = []
    for k, (truth, frame) in enumerate(zip(truths, frames)):
        init = initial_pose(k + 1, previous, prior)
        result = run_frame(frame, k, init, cfg, truth, pfps)
        results.append(result)
        previous = result.estimate if result.ok else replace(result.estimate, pose=init)

    failed = sum(1 for r in results if not r.ok)
    logger.info(f"{cfg.detector.value}: {len(results) - failed}/{len(results)} frames Ok")
    return results


def bench(cfg: RunConfig, detectors: Sequence[DetectorKind] = BENCH_ORDER,
          truths: Optional[Sequence[PoseVector]] = None, frames: Optional[Sequence[RgbImage]] = None,
          pfps: Optional[Sequence[FeaturePoint3D]] = None) -> Dict[DetectorKind, List[FrameResult]]:
    """Run every detector over the same frames, one after the other"""
    if pfps is None:
        pfps = load_pfp_table(cfg.pfp_file)
    if frames is None or truths is None:
        truths, frames = render_run_frames(cfg, pfps)
    return {
        kind: run_trajectory(replace(cfg, detector=kind), truths, frames, pfps)
        for kind in (DetectorKind.parse(d) for d in detectors)
    }


def _summarize_detector(kind: DetectorKind, results: Sequence[FrameResult]) -> DetectorSummary:
    ok = [r for r in results if r.ok]
    abs_means = None
    if ok:
        errors = np.abs(np.array([r.errors for r in ok]))
        abs_means = tuple(errors.mean(axis=0).tolist())
    return DetectorSummary(
        detector=kind,
        frames=len(results),
        failed=len(results) - len(ok),
        mean_t_fe=float(np.mean([r.t_fe for r in results])),
        mean_n_miss=float(np.mean([r.n_miss for r in results])),
        abs_error_means=abs_means,
    )


def summarize(results: Sequence[FrameResult]) -> List[DetectorSummary]:
    """One summary per detector, in order of first appearance

    Raises:
        EmptyInputError: no results
    """
    if not results:
        raise EmptyInputError("Cannot summarize an empty result list")
    grouped: Dict[DetectorKind, List[FrameResult]] = {}
    for r in results:
        grouped.setdefault(r.detector, []).append(r)
    return [_summarize_detector(kind, group) for kind, group in grouped.items()]
