# FILE: src/models/camera.py

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.core.error_handler import MVRPError


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics of the UAV camera plus its mounting pitch

    Attributes:
        f_x, f_y: Focal lengths in pixels
        u0, v0: Principal point in pixels (defaults to the image center)
        width, height: Image size in pixels
        alpha: Camera pitch on the UAV in degrees (positive looks up)
    """

    f_x: float
    f_y: float
    width: int
    height: int
    u0: Optional[float] = None
    v0: Optional[float] = None
    alpha: float = 0.0

    def __post_init__(self):
        if not (self.f_x > 0 and self.f_y > 0):
            raise ValueError(f"Focal lengths must be positive, got f_x={self.f_x}, f_y={self.f_y}")
        if not (self.width > 0 and self.height > 0):
            raise ValueError(f"Image size must be positive, got {self.width}x{self.height}")
        if self.u0 is None:
            object.__setattr__(self, "u0", self.width / 2.0)
        if self.v0 is None:
            object.__setattr__(self, "v0", self.height / 2.0)

    @property
    def K(self) -> np.ndarray:
        """The 3x4 intrinsic matrix"""
        return np.array(
            [
                [self.f_x, 0.0, self.u0, 0.0],
                [0.0, self.f_y, self.v0, 0.0],
                [0.0, 0.0, 1.0, 0.0],
            ]
        )

    def contains(self, u, v) -> bool:
        return 0.0 <= u < self.width and 0.0 <= v < self.height


@dataclass(frozen=True, eq=False)
class RigidTransform:
    """4x4 homogeneous transform (row-major)

    Houses the extrinsic matrix M and its factors M_e, M_t and M_r(beta, S).
    """

    m: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.m, dtype=float)
        if matrix.shape != (4, 4):
            raise ValueError(f"RigidTransform needs a 4x4 matrix, got shape {matrix.shape}")
        if not np.array_equal(matrix[3], [0.0, 0.0, 0.0, 1.0]):
            raise ValueError(f"Bottom row must be (0, 0, 0, 1), got {matrix[3].tolist()}")
        matrix.setflags(write=False)
        object.__setattr__(self, "m", matrix)

    @property
    def rotation(self) -> np.ndarray:
        return self.m[:3, :3]

    def __matmul__(self, other):
        if isinstance(other, RigidTransform):
            return RigidTransform(self.m @ other.m)
        return self.m @ np.asarray(other, dtype=float)

    def apply(self, points) -> np.ndarray:
        """Transform homogeneous points given as an (N, 4) array or a single 4-vector"""
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            return self.m @ points
        return points @ self.m.T

    def is_rotation(self, tol=1e-9) -> bool:
        r = self.rotation
        return bool(
            np.allclose(r @ r.T, np.eye(3), atol=tol)
            and abs(np.linalg.det(r) - 1.0) <= tol
            and np.allclose(self.m[:3, 3], 0.0, atol=tol)
        )

    def __repr__(self):
        return f"RigidTransform({self.m.tolist()})"


@dataclass(frozen=True)
class FeaturePoint3D:
    """Pre-set feature point (navigation beacon) in tanker coordinates, meters"""

    id: int
    x_t: float
    y_t: float
    z_t: float

    def __post_init__(self):
        if not all(math.isfinite(float(c)) for c in (self.x_t, self.y_t, self.z_t)):
            raise MVRPError(f"PFP {self.id} has non-finite coordinates")

    @property
    def homogeneous(self) -> np.ndarray:
        return np.array([self.x_t, self.y_t, self.z_t, 1.0])


@dataclass(frozen=True)
class PixelPoint:
    """Image-plane point; projected points carry the PFP id, extracted ones do not

    Points behind the camera have visible=False, behind_camera=True and NaN
    coordinates, so callers must check ``visible`` before using u and v.
    """

    u: float
    v: float
    id: Optional[int] = None
    visible: bool = True
    behind_camera: bool = False

    @property
    def xy(self):
        return (self.u, self.v)
