"""Reprojection residual, Jacobian and Levenberg-Marquardt pose estimation"""

import numpy as np
import pytest

from src.core.error_handler import BehindCameraError, InsufficientPointsError, MissingPreviousError, NotConvergedError
from src.core.geometry import extrinsic_from_pose, project_point
from src.core.solver import (
    ReprojectionProblem,
    initial_pose,
    lm_solve,
    numeric_jacobian,
    reprojection_residual,
)
from src.models.camera import FeaturePoint3D, PixelPoint
from src.models.config import SolverConfig
from src.models.features import MatchedPair, MatchSet
from src.models.pose import PoseEstimate, PoseVector
from src.utils.finite_difference import central_difference_jacobian, forward_difference_jacobian
from tests.helpers import pose_error, self_matches


def _random_pose(rng):
    return PoseVector.from_array(np.concatenate([
        [rng.uniform(-2, 2), rng.uniform(40, 80), rng.uniform(20, 60)],
        rng.uniform(-5, 5, size=3),
    ]))


def _perturb(pose, rng, pos=1.0, ang=2.0):
    bounds = np.array([pos] * 3 + [ang] * 3)
    return pose + rng.uniform(-bounds, bounds)


class TestResidual:
    def test_zero_at_generating_pose(self, pfps, intrinsics):
        pose = PoseVector(0, 60, 40)
        m = self_matches(pose, intrinsics, pfps)
        np.testing.assert_allclose(reprojection_residual(pose, m, intrinsics, pfps), 0.0, atol=1e-9)

    def test_single_pair_offset(self, pfps, intrinsics):
        pose = PoseVector(0, 60, 40)
        m = self_matches(pose, intrinsics, pfps, offsets={3: (3.0, 4.0)}, ids={3})
        r = reprojection_residual(pose, m, intrinsics, pfps)
        np.testing.assert_allclose(r, [3.0, 4.0], atol=1e-9)
        assert float(r @ r) == pytest.approx(25.0)

    def test_stacked_in_id_order(self, pfps, intrinsics, rng):
        pose = _random_pose(rng)
        m = self_matches(pose, intrinsics, pfps, offsets={i: (float(i), -float(i)) for i in range(1, 8)})
        reversed_set = MatchSet(tuple(reversed(m.pairs)))
        r = reprojection_residual(pose, reversed_set, intrinsics, pfps)
        expected = np.concatenate([[i, -i] for i in sorted(p.pfp_id for p in m)]).astype(float)
        np.testing.assert_allclose(r, expected, atol=1e-9)

    def test_matches_projection_at_other_pose(self, pfps, intrinsics, rng):
        truth = _random_pose(rng)
        query = _perturb(truth, rng)
        m = self_matches(truth, intrinsics, pfps)
        extrinsic = extrinsic_from_pose(query, intrinsics)
        table = {fp.id: fp for fp in pfps}
        expected = []
        for p in m.sorted_by_id():
            q = project_point(intrinsics, extrinsic, table[p.pfp_id])
            expected += [p.extracted.u - q.u, p.extracted.v - q.v]
        np.testing.assert_allclose(reprojection_residual(query, m, intrinsics, pfps), expected, atol=1e-9)

    def test_behind_camera(self, intrinsics):
        fp = FeaturePoint3D(1, 0.0, 0.0, 0.0)
        pair = MatchedPair.between(PixelPoint(256.0, 192.0, id=1), PixelPoint(250.0, 190.0))
        with pytest.raises(BehindCameraError):
            reprojection_residual(PoseVector(0, -30, -30), MatchSet([pair]), intrinsics, [fp])


class TestJacobian:
    def test_lateral_derivative_is_focal_over_depth(self, intrinsics):
        fp = FeaturePoint3D(1, 0.0, 0.0, 0.0)
        pose = PoseVector(0, 60, 40)
        m = self_matches(pose, intrinsics, [fp])
        z_c = extrinsic_from_pose(pose, intrinsics).apply(fp.homogeneous)[2]
        jac = numeric_jacobian(pose, m, intrinsics, [fp])
        assert jac.shape == (2, 6)
        assert -jac[0, 0] == pytest.approx(intrinsics.f_x / z_c, rel=0.01)

    def test_constant_function(self):
        jac = central_difference_jacobian(lambda x: np.array([3.0, -1.0]), np.zeros(6), 1e-4)
        np.testing.assert_allclose(jac, 0.0, atol=1e-6)

    def test_against_forward_differences(self, pfps, intrinsics, rng):
        cfg = SolverConfig()
        for _ in range(20):
            pose = _random_pose(rng)
            m = self_matches(_perturb(pose, rng), intrinsics, pfps)
            jac = numeric_jacobian(pose, m, intrinsics, pfps, cfg)
            problem = ReprojectionProblem(m, intrinsics, pfps)
            steps = np.array([cfg.fd_step_pos] * 3 + [cfg.fd_step_ang] * 3) / 10.0
            reference = forward_difference_jacobian(problem.residual, pose.as_array(), steps)
            assert jac.shape == (2 * m.n_m, 6)
            assert np.abs(jac - reference).max() < 1e-3


class TestLevenbergMarquardt:
    def test_start_at_minimum(self, pfps, intrinsics):
        truth = PoseVector(0, 60, 40)
        est = lm_solve(truth, self_matches(truth, intrinsics, pfps), intrinsics, pfps)
        assert est.converged
        assert est.iterations <= 1
        np.testing.assert_allclose(est.pose.as_array(), truth.as_array(), atol=1e-10)
        assert est.rms_residual < 1e-6

    def test_documented_perturbation(self, pfps, intrinsics):
        truth = PoseVector(0, 60, 40)
        init = truth + np.array([1.0, -1.0, 1.0, 2.0, -2.0, 2.0])
        est = lm_solve(init, self_matches(truth, intrinsics, pfps), intrinsics, pfps)
        assert est.converged
        assert est.n_m == 7
        assert (pose_error(est.pose, truth) < 1e-3).all()

    def test_two_pairs_insufficient(self, pfps, intrinsics):
        truth = PoseVector(0, 60, 40)
        with pytest.raises(InsufficientPointsError):
            lm_solve(truth, self_matches(truth, intrinsics, pfps, ids={1, 2}), intrinsics, pfps)

    def test_random_envelope_convergence(self, pfps, intrinsics, rng):
        recovered = trials = 0
        for _ in range(1000):
            truth = _random_pose(rng)
            m = self_matches(truth, intrinsics, pfps)
            if m.n_m < 3:
                continue
            trials += 1
            est = lm_solve(_perturb(truth, rng), m, intrinsics, pfps)
            recovered += bool((pose_error(est.pose, truth) < 1e-3).all())
        assert trials >= 900
        assert recovered >= 0.99 * trials

    def test_cost_history_non_increasing(self, pfps, intrinsics, rng):
        for _ in range(20):
            truth = _random_pose(rng)
            noise = {i: tuple(rng.normal(0, 0.5, size=2)) for i in range(1, 8)}
            m = self_matches(truth, intrinsics, pfps, offsets=noise)
            est = lm_solve(_perturb(truth, rng), m, intrinsics, pfps)
            history = np.array(est.cost_history)
            assert (np.diff(history) <= 0).all()
            assert est.iterations <= SolverConfig().max_iterations

    def test_match_count_scaling_keeps_argmin(self, pfps, intrinsics, rng):
        for _ in range(10):
            truth = _random_pose(rng)
            noise = {i: tuple(rng.normal(0, 0.5, size=2)) for i in range(1, 8)}
            m = self_matches(truth, intrinsics, pfps, offsets=noise)
            init = _perturb(truth, rng)
            scaled = lm_solve(init, m, intrinsics, pfps, SolverConfig(scale_by_match_count=True))
            plain = lm_solve(init, m, intrinsics, pfps, SolverConfig(scale_by_match_count=False))
            np.testing.assert_allclose(scaled.pose.as_array(), plain.pose.as_array(), atol=1e-6)
            assert scaled.rms_residual == pytest.approx(plain.rms_residual, rel=1e-6, abs=1e-9)

    def test_iteration_cap_flags_estimate(self, pfps, intrinsics):
        truth = PoseVector(0, 60, 40)
        init = truth + np.array([1.0, -1.0, 1.0, 2.0, -2.0, 2.0])
        m = self_matches(truth, intrinsics, pfps)
        cfg = SolverConfig(max_iterations=1)
        est = lm_solve(init, m, intrinsics, pfps, cfg)
        assert not est.converged
        assert est.iterations == 1
        with pytest.raises(NotConvergedError) as info:
            lm_solve(init, m, intrinsics, pfps, cfg, raise_on_failure=True)
        assert info.value.estimate.iterations == 1


class TestInitialPose:
    def test_first_sample_uses_prior(self):
        prior = PoseVector(0.3, 80.2, 59.9, 0.5, -0.2, 0.1)
        assert initial_pose(1, None, prior) == prior

    def test_later_sample_uses_previous(self):
        previous = PoseEstimate(PoseVector(0, 70, 50), 0.1, 4, True, 7)
        assert initial_pose(5, previous, PoseVector(0, 80, 60)) == previous.pose

    def test_missing_previous(self):
        with pytest.raises(MissingPreviousError):
            initial_pose(2, None, PoseVector(0, 80, 60))

    def test_sample_index_starts_at_one(self):
        with pytest.raises(ValueError):
            initial_pose(0, None, PoseVector(0, 80, 60))
