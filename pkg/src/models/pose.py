# FILE: src/models/pose.py

import math
from dataclasses import dataclass, field
from typing import List

import numpy as np

from src.core.error_handler import InvalidPoseError


@dataclass(frozen=True)
class PoseVector:
    """Relative pose X(k) of the tanker expressed in the UAV frame

    Attributes:
        x, y, z: Tanker position in meters (X right, Y forward, Z up)
        psi, theta, phi: Heading, pitch and roll of the tanker in degrees
    """

    x: float
    y: float
    z: float
    psi: float = 0.0
    theta: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        for name in ("x", "y", "z", "psi", "theta", "phi"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidPoseError(f"Pose component {name} is not finite: {value}")
            object.__setattr__(self, name, value)

    @classmethod
    def from_array(cls, values):
        """Build a pose from six values ordered (x, y, z, psi, theta, phi)"""
        values = np.asarray(values, dtype=float).reshape(-1)
        if values.shape != (6,):
            raise InvalidPoseError(f"A pose needs exactly 6 components, got {values.size}")
        return cls(*values.tolist())

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z, self.psi, self.theta, self.phi], dtype=float)

    def __add__(self, other):
        return PoseVector.from_array(self.as_array() + np.asarray(_components(other), dtype=float))

    def __sub__(self, other):
        return PoseVector.from_array(self.as_array() - np.asarray(_components(other), dtype=float))


def _components(value):
    if isinstance(value, PoseVector):
        return value.as_array()
    return value


@dataclass(frozen=True)
class PoseEstimate:
    """Output of one Levenberg-Marquardt solve

    Attributes:
        pose: Estimated pose
        rms_residual: Root mean square reprojection residual in pixels
        iterations: Number of L-M trials performed
        converged: Whether a tolerance was met before max_iterations
        n_m: Number of matched pairs used
        cost_history: Objective value after every accepted step, starting with the initial cost
    """

    pose: PoseVector
    rms_residual: float
    iterations: int
    converged: bool
    n_m: int
    cost_history: List[float] = field(default_factory=list)
