"""Per-frame MVRP loop, trajectory runs and the detector summary"""

import math
import time
from dataclasses import replace

import numpy as np
import pytest

from src.core import harness
from src.core.correspondence import eliminate_gross_errors
from src.core.detectors import detect
from src.core.error_handler import EmptyInputError, ImageFormatError
from src.core.geometry import project_visible_set
from src.core.harness import bench, count_missed, noisy_prior, run_frame, run_trajectory, summarize
from src.core.image_io import v_channel
from src.core.report_generator import emit_reports
from src.core.scenegen import gen_trajectory, render_frame, render_sequence
from src.models.camera import PixelPoint
from src.models.config import RunConfig, SceneConfig, TrajectoryConfig
from src.models.features import DetectorKind, MatchSet
from src.models.images import RgbImage
from src.models.pose import PoseEstimate, PoseVector
from src.models.results import FrameResult, FrameStatus
from tests.helpers import pose_error

NEAR_POSE = PoseVector(0, 50, 30)


def _cfg(**overrides):
    base = dict(init_noise_pos=0.0, init_noise_ang=0.0, report_timing=False)
    base.update(overrides)
    return RunConfig(**base)


def _result(k, detector, errors, status=FrameStatus.OK, t_fe=0.01, n_miss=0):
    truth = PoseVector(0, 60, 40)
    estimate = PoseEstimate(truth + np.asarray(errors, dtype=float), 0.2, 5, status is FrameStatus.OK, 7)
    return FrameResult(k, detector, estimate, truth, t_fe, 7, 7, n_miss, 7, status)


class TestCountMissed:
    def test_within_radius(self):
        truth = [PixelPoint(10, 10, id=1), PixelPoint(50, 50, id=2)]
        assert count_missed(truth, [PixelPoint(12, 11), PixelPoint(50, 54)], 3.0) == 1

    def test_empty_sides(self):
        assert count_missed([], [PixelPoint(0, 0)], 3.0) == 0
        assert count_missed([PixelPoint(1, 1, id=1)], [], 3.0) == 1


# Position bound (m) reached on a noiseless frame started at truth; beacons sit
# at their rounded projection and corners are whole pixels
CLEAN_POSITION_BOUND = {DetectorKind.HARRIS: 0.2, DetectorKind.SUSAN: 0.6, DetectorKind.FAST: 0.3}


class TestRunFrame:
    @pytest.mark.parametrize("kind", list(DetectorKind))
    def test_clean_frame_from_truth(self, pfps, kind):
        cfg = _cfg(detector=kind, scene=SceneConfig(noise_sigma=0.0))
        frame = render_frame(NEAR_POSE, cfg.scene, cfg.intrinsics, pfps)
        result = run_frame(frame, 0, NEAR_POSE, cfg, NEAR_POSE, pfps)
        assert result.status is FrameStatus.OK
        assert result.n_visible == 7
        assert result.n_miss == 0
        assert result.n_m == 7
        errors = pose_error(result.estimate.pose, NEAR_POSE)
        assert (errors[:3] < CLEAN_POSITION_BOUND[kind]).all()
        assert (errors[3:] < 1.0).all()
        assert result.t_fe == 0.0

    def test_two_beacons_in_view(self, pfps):
        cfg = _cfg()
        two = [fp for fp in pfps if fp.id in (2, 3)]
        frame = render_frame(NEAR_POSE, cfg.scene, cfg.intrinsics, two)
        init = NEAR_POSE + np.array([0.2, -0.2, 0.1, 0.3, 0.0, -0.3])
        result = run_frame(frame, 4, init, cfg, NEAR_POSE, pfps)
        assert result.status is FrameStatus.INSUFFICIENT_POINTS
        assert result.n_m == 2
        assert result.estimate.pose == init
        assert math.isnan(result.estimate.rms_residual)
        assert result.n_miss == result.n_visible - 2

    def test_distractors_are_not_matched(self, pfps):
        cfg = _cfg(scene=SceneConfig(distractor_count=3, rng_seed=21))
        frame = render_frame(NEAR_POSE, cfg.scene, cfg.intrinsics, pfps)
        init = NEAR_POSE + np.array([0.3, -0.3, 0.3, 0.5, -0.5, 0.5])
        result = run_frame(frame, 0, init, cfg, NEAR_POSE, pfps)
        truth = {p.id: p for p in project_visible_set(cfg.intrinsics, NEAR_POSE, pfps)}
        assert result.ok
        for pair in result.matches:
            assert math.hypot(pair.extracted.u - truth[pair.pfp_id].u, pair.extracted.v - truth[pair.pfp_id].v) <= 1.0

    @pytest.mark.parametrize("seed", range(6))
    def test_partial_view_with_distractors(self, pfps, seed):
        cfg = _cfg(scene=SceneConfig(distractor_count=3, rng_seed=seed))
        five = [fp for fp in pfps if fp.id <= 5]
        frame = render_frame(NEAR_POSE, cfg.scene, cfg.intrinsics, five)
        init = NEAR_POSE + np.array([0.3, 0.3, -0.3, -0.5, 0.5, 0.5])
        result = run_frame(frame, 0, init, cfg, NEAR_POSE, pfps)
        assert result.ok
        assert result.n_m >= 3
        assert {p.pfp_id for p in result.matches} <= {1, 2, 3, 4, 5}
        errors = pose_error(result.estimate.pose, NEAR_POSE)
        assert (errors[:3] < 0.2).all() and (errors[3:] < 0.5).all()

    def test_invariants(self, pfps):
        cfg = _cfg(init_noise_pos=0.5, init_noise_ang=1.0)
        frame = render_frame(NEAR_POSE, cfg.scene, cfg.intrinsics, pfps)
        result = run_frame(frame, 0, noisy_prior(NEAR_POSE, cfg), cfg, NEAR_POSE, pfps)
        assert result.n_miss <= result.n_visible
        assert result.n_m <= min(result.n_visible, result.n_extracted)
        assert 1 <= result.passes <= cfg.outer_passes_max

    def test_later_pass_below_minimum_fails_frame(self, pfps, monkeypatch):
        calls = []

        def thin_second_pass(matches, t1, t2):
            kept = eliminate_gross_errors(matches, t1, t2)
            calls.append(kept)
            return MatchSet(kept.sorted_by_id()[:2]) if len(calls) == 2 else kept

        monkeypatch.setattr(harness, "eliminate_gross_errors", thin_second_pass)
        cfg = _cfg(scene=SceneConfig(noise_sigma=0.0))
        frame = render_frame(NEAR_POSE, cfg.scene, cfg.intrinsics, pfps)
        init = NEAR_POSE + np.array([0.3, -0.3, 0.3, 0.5, -0.5, 0.5])
        result = run_frame(frame, 0, init, cfg, NEAR_POSE, pfps)
        assert len(calls) == 2
        assert result.status is FrameStatus.INSUFFICIENT_POINTS
        assert not result.ok
        assert result.n_m == 2
        assert result.estimate.pose == init
        assert math.isnan(result.estimate.rms_residual)
        assert result.passes == 1

    def test_pfps_out_of_view_at_truth_are_not_matched(self, pfps):
        cfg = _cfg(scene=SceneConfig(noise_sigma=0.0))
        frame = render_frame(NEAR_POSE, cfg.scene, cfg.intrinsics, pfps)
        truth = next(
            pose for pose in (PoseVector(float(dx), 50, 30) for dx in np.arange(0.5, 150.0, 0.5))
            if 0 < sum(p.visible for p in project_visible_set(cfg.intrinsics, pose, pfps)) < len(pfps)
        )
        in_view = {p.id for p in project_visible_set(cfg.intrinsics, truth, pfps) if p.visible}
        result = run_frame(frame, 0, NEAR_POSE, cfg, truth, pfps)
        assert result.n_visible == len(in_view)
        assert {p.pfp_id for p in result.matches} <= in_view
        assert result.n_m <= min(result.n_visible, result.n_extracted)

    def test_size_mismatch(self, pfps):
        frame = RgbImage(np.zeros((100, 100, 3), dtype=np.uint8))
        with pytest.raises(ImageFormatError):
            run_frame(frame, 0, NEAR_POSE, _cfg(), NEAR_POSE, pfps)

    def test_timing_reported_when_enabled(self, pfps):
        cfg = _cfg(report_timing=True)
        frame = render_frame(NEAR_POSE, cfg.scene, cfg.intrinsics, pfps)
        assert run_frame(frame, 0, NEAR_POSE, cfg, NEAR_POSE, pfps).t_fe > 0.0


class TestTrajectory:
    def test_prior_is_seeded_and_bounded(self):
        cfg = _cfg(init_noise_pos=0.5, init_noise_ang=1.0, seed=9)
        truth = PoseVector(0, 80, 60)
        prior = noisy_prior(truth, cfg)
        assert prior == noisy_prior(truth, cfg)
        delta = np.abs((prior - truth).as_array())
        assert (delta[:3] <= 0.5).all() and (delta[3:] <= 1.0).all()

    def test_short_run(self, pfps):
        cfg = _cfg(trajectory=TrajectoryConfig(frame_count=4))
        results = run_trajectory(cfg, pfps=pfps)
        assert [r.k for r in results] == [0, 1, 2, 3]
        assert all(r.detector is DetectorKind.FAST for r in results)
        assert all(r.ok for r in results)

    def test_failed_frame_passes_its_init_on(self, pfps):
        cfg = _cfg(init_noise_pos=0.5, init_noise_ang=1.0, seed=3)
        truths = gen_trajectory(TrajectoryConfig(frame_count=3))
        frames = render_sequence(truths, cfg.scene, cfg.intrinsics, pfps)
        blank = RgbImage(np.full_like(frames[1].pixels, cfg.scene.background_intensity))
        results = run_trajectory(cfg, truths, [frames[0], blank, frames[2]], pfps)
        assert results[1].status is FrameStatus.INSUFFICIENT_POINTS
        assert results[1].estimate.pose == results[0].estimate.pose
        assert results[2].ok

    def test_mismatched_inputs(self, pfps):
        truths = gen_trajectory(TrajectoryConfig(frame_count=2))
        with pytest.raises(ValueError):
            run_trajectory(_cfg(), truths, [], pfps)

    def test_bench_order_and_shared_frames(self, pfps):
        cfg = _cfg(trajectory=TrajectoryConfig(frame_count=2))
        results = bench(cfg, pfps=pfps)
        assert list(results) == [DetectorKind.HARRIS, DetectorKind.SUSAN, DetectorKind.FAST]
        assert all(len(r) == 2 for r in results.values())
        assert all(r.detector is kind for kind, rs in results.items() for r in rs)


class TestSummarize:
    def test_means_over_ok_frames(self):
        results = [
            _result(0, DetectorKind.FAST, [0.1, -0.2, 0.3, 0.5, -0.5, 1.0], n_miss=1),
            _result(1, DetectorKind.FAST, [-0.3, 0.2, 0.1, -0.5, 0.5, 0.0], t_fe=0.03),
            _result(2, DetectorKind.FAST, [9, 9, 9, 9, 9, 9], status=FrameStatus.INSUFFICIENT_POINTS, n_miss=5),
        ]
        [s] = summarize(results)
        assert (s.frames, s.failed) == (3, 1)
        assert s.mean_t_fe == pytest.approx((0.01 + 0.03 + 0.01) / 3)
        assert s.mean_n_miss == pytest.approx(2.0)
        np.testing.assert_allclose(s.accuracy, [0.2, 0.2, 0.2, 0.5, 0.5, 0.5], atol=1e-9)

    def test_grouped_in_first_seen_order(self):
        results = [_result(0, DetectorKind.SUSAN, [0] * 6), _result(0, DetectorKind.HARRIS, [0] * 6)]
        assert [s.detector for s in summarize(results)] == [DetectorKind.SUSAN, DetectorKind.HARRIS]

    def test_all_failed_keeps_timing(self):
        results = [_result(k, DetectorKind.HARRIS, [0] * 6, status=FrameStatus.NOT_CONVERGED, t_fe=0.02)
                   for k in range(3)]
        [s] = summarize(results)
        assert s.failed == 3
        assert s.mean_t_fe == pytest.approx(0.02)
        with pytest.raises(EmptyInputError):
            s.accuracy

    def test_empty(self):
        with pytest.raises(EmptyInputError):
            summarize([])


@pytest.mark.slow
class TestFullTrajectory:
    @pytest.fixture(scope="class")
    def clean_bench(self, pfps):
        cfg = RunConfig(scene=SceneConfig(noise_sigma=0.0), report_timing=False)
        return bench(cfg, pfps=pfps)

    def test_recall_on_clean_frames(self, clean_bench):
        for kind, results in clean_bench.items():
            assert len(results) == 71
            assert sum(r.n_miss for r in results) == 0, kind

    def test_default_fast_run(self, pfps):
        results = run_trajectory(RunConfig(), pfps=pfps)
        assert len(results) == 71
        assert sum(r.ok for r in results) >= 68

    def test_end_to_end_accuracy(self, pfps):
        for kind, results in bench(RunConfig(), pfps=pfps).items():
            [s] = summarize(results)
            assert max(s.accuracy[:3]) <= 0.5, kind
            assert max(s.accuracy[3:]) <= 1.0, kind

    def test_harris_slower_than_fast(self, pfps):
        cfg = RunConfig()
        frames = render_sequence(gen_trajectory(cfg.trajectory), cfg.scene, cfg.intrinsics, pfps)
        grays = [v_channel(f) for f in frames]
        totals = {}
        for kind in (DetectorKind.HARRIS, DetectorKind.FAST):
            total = 0.0
            for gray in grays:
                best = math.inf
                for _ in range(3):
                    start = time.perf_counter()
                    detect(gray, kind)
                    best = min(best, time.perf_counter() - start)
                total += best
            totals[kind] = total
        assert totals[DetectorKind.HARRIS] > totals[DetectorKind.FAST]

    def test_reports_are_deterministic(self, pfps, tmp_path):
        cfg = replace(RunConfig(), trajectory=TrajectoryConfig(frame_count=10), report_timing=False)
        contents = []
        for name in ("a", "b"):
            results = run_trajectory(cfg, pfps=pfps)
            emit_reports(results, summarize(results), tmp_path / name)
            contents.append({p.name: p.read_bytes() for p in (tmp_path / name).iterdir()})
        assert contents[0] == contents[1]
