# FILE: src/models/results.py

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

from src.core.error_handler import EmptyInputError
from src.models.features import DetectorKind, MatchSet
from src.models.pose import PoseEstimate, PoseVector


class FrameStatus(str, Enum):
    OK = "Ok"
    INSUFFICIENT_POINTS = "InsufficientPoints"
    NOT_CONVERGED = "NotConverged"


@dataclass(frozen=True)
class FrameResult:
    """Outcome of the MVRP loop on one frame

    Errors are estimate minus truth: meters for x, y, z and degrees for the angles.
    """

    k: int
    detector: DetectorKind
    estimate: PoseEstimate
    truth: PoseVector
    t_fe: float
    n_extracted: int
    n_visible: int
    n_miss: int
    n_m: int
    status: FrameStatus
    matches: MatchSet = field(default_factory=MatchSet)
    passes: int = 0

    @property
    def errors(self) -> Tuple[float, float, float, float, float, float]:
        return tuple((self.estimate.pose.as_array() - self.truth.as_array()).tolist())

    @property
    def e_x(self):
        return self.errors[0]

    @property
    def e_y(self):
        return self.errors[1]

    @property
    def e_z(self):
        return self.errors[2]

    @property
    def e_psi(self):
        return self.errors[3]

    @property
    def e_theta(self):
        return self.errors[4]

    @property
    def e_phi(self):
        return self.errors[5]

    @property
    def ok(self) -> bool:
        return self.status is FrameStatus.OK


@dataclass(frozen=True)
class DetectorSummary:
    """One row of the detector comparison (average t_FE, N_miss and |errors|)"""

    detector: DetectorKind
    frames: int
    failed: int
    mean_t_fe: float
    mean_n_miss: float
    abs_error_means: Optional[Tuple[float, float, float, float, float, float]] = None

    @property
    def accuracy(self) -> Tuple[float, float, float, float, float, float]:
        """Mean |e_x|, |e_y|, |e_z| (m) and |e_psi|, |e_theta|, |e_phi| (deg) over Ok frames

        Raises:
            EmptyInputError: when no frame of this detector succeeded
        """
        if self.abs_error_means is None:
            raise EmptyInputError(f"No successful frames for detector {self.detector.value}")
        return self.abs_error_means
