# FILE: src/core/solver.py
# Levenberg-Marquardt minimization of the reprojection error over the six pose
# components, with a central-difference Jacobian.

import logging
import math
from typing import Optional, Sequence

import numpy as np

from src.core.constants import MIN_MATCHES
from src.core.error_handler import (
    BehindCameraError,
    InsufficientPointsError,
    MissingPreviousError,
    MVRPError,
    NotConvergedError,
)
from src.core.geometry import camera_coordinates
from src.models.camera import CameraIntrinsics, FeaturePoint3D
from src.models.config import SolverConfig
from src.models.features import MatchSet
from src.models.pose import PoseEstimate, PoseVector
from src.utils.finite_difference import central_difference_jacobian

logger = logging.getLogger("Solver")


class ReprojectionProblem:
    """Residual (u_E - u_p, v_E - v_p) per matched pair, stacked in PFP id order"""

    def __init__(self, matches: MatchSet, intr: CameraIntrinsics, pfps: Sequence[FeaturePoint3D]):
        table = {fp.id: fp for fp in pfps}
        self.pairs = matches.sorted_by_id()
        missing = [p.pfp_id for p in self.pairs if p.pfp_id not in table]
        if missing:
            raise MVRPError(f"Matched PFP ids {missing} are not in the PFP table")
        self.intr = intr
        self.points = [table[p.pfp_id] for p in self.pairs]
        self.ids = [p.pfp_id for p in self.pairs]
        self.observed = np.array([p.extracted.xy for p in self.pairs], dtype=float).reshape(-1)

    def residual(self, values) -> np.ndarray:
        if not self.points:
            return np.zeros(0)
        cam = camera_coordinates(self.intr, values, self.points)
        z = cam[:, 2]
        behind = np.flatnonzero(z <= 0.0)
        if behind.size:
            raise BehindCameraError(self.ids[behind[0]], float(z[behind[0]]))
        u = self.intr.f_x * cam[:, 0] / z + self.intr.u0
        v = self.intr.f_y * cam[:, 1] / z + self.intr.v0
        return self.observed - np.column_stack([u, v]).reshape(-1)


def _steps(cfg: SolverConfig) -> np.ndarray:
    return np.array([cfg.fd_step_pos] * 3 + [cfg.fd_step_ang] * 3)


def reprojection_residual(pose: PoseVector, matches: MatchSet, intr: CameraIntrinsics,
                          pfps: Sequence[FeaturePoint3D]) -> np.ndarray:
    """Residual vector of length 2*N_M in pixels

    Raises:
        BehindCameraError: a matched PFP has z_C <= 0 at this pose
    """
    return ReprojectionProblem(matches, intr, pfps).residual(pose.as_array())


def numeric_jacobian(pose: PoseVector, matches: MatchSet, intr: CameraIntrinsics,
                     pfps: Sequence[FeaturePoint3D], cfg: SolverConfig = SolverConfig()) -> np.ndarray:
    """2*N_M x 6 Jacobian of the residual (pixels per meter, pixels per degree)"""
    problem = ReprojectionProblem(matches, intr, pfps)
    return central_difference_jacobian(problem.residual, pose.as_array(), _steps(cfg))


def lm_solve(init: PoseVector, matches: MatchSet, intr: CameraIntrinsics, pfps: Sequence[FeaturePoint3D],
             cfg: SolverConfig = SolverConfig(), raise_on_failure: bool = False) -> PoseEstimate:
    """Estimate the pose minimizing the reprojection error

    Solves (J^T J + lambda * diag(J^T J)) delta = -J^T r. A step is accepted
    iff the objective decreases (lambda *= lambda_down), otherwise lambda *=
    lambda_up. Each trial counts as one iteration. The objective is the squared
    norm of the residual divided by N_M, or the plain squared norm when
    scale_by_match_count is off; both have the same minimizer.

    Raises:
        InsufficientPointsError: N_M < 3
        NotConvergedError: only when raise_on_failure is set and max_iterations is reached
    """
    n_m = matches.n_m
    if n_m < MIN_MATCHES:
        raise InsufficientPointsError(n_m)

    problem = ReprojectionProblem(matches, intr, pfps)
    scale = 1.0 / n_m if cfg.scale_by_match_count else 1.0
    steps = _steps(cfg)

    def scaled_residual(values):
        return problem.residual(values) * scale

    x = init.as_array()
    r = scaled_residual(x)
    cost = float(r @ r)
    history = [cost]
    lam = cfg.lambda0
    jacobian = None
    converged = cost == 0.0
    iterations = 0

    while not converged and iterations < cfg.max_iterations:
        iterations += 1
        if jacobian is None:
            jacobian = central_difference_jacobian(scaled_residual, x, steps)
            normal = jacobian.T @ jacobian
            gradient = jacobian.T @ r
            diag = np.maximum(np.diag(normal), np.finfo(float).eps * max(1.0, float(np.diag(normal).max())))

        lhs = normal + lam * np.diag(diag)
        try:
            delta = np.linalg.solve(lhs, -gradient)
        except np.linalg.LinAlgError:
            delta = np.linalg.lstsq(lhs, -gradient, rcond=None)[0]

        if float(np.linalg.norm(delta)) < cfg.step_tol:
            converged = True
            break

        candidate = x + delta
        try:
            r_new = scaled_residual(candidate)
            cost_new = float(r_new @ r_new)
        except BehindCameraError:
            cost_new = math.inf

        if cost_new < cost:
            decrease = (cost - cost_new) / cost
            x, r, cost = candidate, r_new, cost_new
            history.append(cost)
            lam *= cfg.lambda_down
            jacobian = None
            if decrease < cfg.residual_tol or cost == 0.0:
                converged = True
        else:
            lam *= cfg.lambda_up

    rms = math.sqrt(cost / (scale * scale) / (2 * n_m))
    estimate = PoseEstimate(
        pose=PoseVector.from_array(x),
        rms_residual=rms,
        iterations=iterations,
        converged=converged,
        n_m=n_m,
        cost_history=history,
    )
    logger.debug(f"L-M finished: {iterations} iterations, rms {rms:.4f} px, converged={converged}")
    if not converged:
        logger.warning(f"L-M did not converge within {cfg.max_iterations} iterations (rms {rms:.4f} px)")
        if raise_on_failure:
            raise NotConvergedError(estimate)
    return estimate


def initial_pose(k: int, previous: Optional[PoseEstimate], prior: PoseVector) -> PoseVector:
    """Initial value for sample k: the GPS/INS prior at k = 1, the previous estimate afterwards

    Raises:
        MissingPreviousError: k >= 2 without a previous estimate
    """
    if k < 1:
        raise ValueError(f"Sample index starts at 1, got {k}")
    if k == 1:
        return prior
    if previous is None:
        raise MissingPreviousError(f"Sample {k} needs the estimate of sample {k - 1}")
    return previous.pose
