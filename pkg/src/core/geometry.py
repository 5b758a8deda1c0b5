# FILE: src/core/geometry.py
# Reference frames, extrinsic matrix construction and pinhole projection of PFPs.
#
# Frames: tanker T and UAV U have X right, Y forward, Z up. The camera C has
# Z_C along the optical axis, X_C right and Y_C down, matching the image axes.

import logging
import math
from pathlib import Path
from typing import List, Sequence

import numpy as np

from src.core.error_handler import InvalidFovError, MVRPError, MVRPIOError
from src.models.camera import CameraIntrinsics, FeaturePoint3D, PixelPoint, RigidTransform
from src.models.pose import PoseVector

logger = logging.getLogger("Geometry")

AXES = ("X", "Y", "Z")

# Axis permutation from the pitched UAV frame to the camera frame: (x, y, z) -> (x, -z, y)
M_E = RigidTransform(
    np.array(
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, -1.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )
)


def _rotation_matrix(beta_rad, axis):
    c, s = math.cos(beta_rad), math.sin(beta_rad)
    m = np.eye(4)
    if axis == "X":
        m[1:3, 1:3] = [[c, -s], [s, c]]
    elif axis == "Y":
        m[0, 0], m[0, 2], m[2, 0], m[2, 2] = c, s, -s, c
    elif axis == "Z":
        m[0:2, 0:2] = [[c, -s], [s, c]]
    else:
        raise ValueError(f"Unknown rotation axis '{axis}', expected one of {AXES}")
    return m


def rotation_about_axis(beta, axis) -> RigidTransform:
    """Counter-clockwise rotation by beta degrees seen from the axis' positive end

    Args:
        beta: Angle in degrees
        axis: "X", "Y" or "Z"

    Returns:
        RigidTransform with a pure rotation block
    """
    return RigidTransform(_rotation_matrix(math.radians(beta), str(axis).upper()))


def extrinsic_from_pose(pose: PoseVector, intrinsics: CameraIntrinsics) -> RigidTransform:
    """Extrinsic matrix M with FP_C = M * FP_T

    M = M_e * M_mount * M_t * M_r(psi, Z) * M_r(theta, X) * M_r(phi, Y), where
    M_t translates by (x, y, z) and M_mount expresses UAV coordinates in the
    camera frame pitched up by alpha, i.e. M_r(-alpha, X).
    """
    return RigidTransform(_extrinsic_matrix(pose.as_array(), intrinsics.alpha))


def _extrinsic_matrix(values, alpha_deg):
    x, y, z, psi, theta, phi = np.asarray(values, dtype=float)
    m_t = np.eye(4)
    m_t[:3, 3] = (x, y, z)
    return (
        M_E.m
        @ _rotation_matrix(-math.radians(alpha_deg), "X")
        @ m_t
        @ _rotation_matrix(math.radians(psi), "Z")
        @ _rotation_matrix(math.radians(theta), "X")
        @ _rotation_matrix(math.radians(phi), "Y")
    )


def project_point(intr: CameraIntrinsics, M: RigidTransform, fp: FeaturePoint3D) -> PixelPoint:
    """Project one PFP through K * M

    A point with z_C <= 0 comes back with visible=False, behind_camera=True and
    NaN coordinates.
    """
    camera = M.apply(fp.homogeneous)
    if camera[2] <= 0.0:
        return PixelPoint(math.nan, math.nan, id=fp.id, visible=False, behind_camera=True)
    su, sv, s = intr.K @ camera
    u, v = su / s, sv / s
    return PixelPoint(float(u), float(v), id=fp.id, visible=intr.contains(u, v))


def _pixel_from_camera(intr, pfp_id, x_c, y_c, z_c):
    if z_c <= 0.0:
        return PixelPoint(math.nan, math.nan, id=pfp_id, visible=False, behind_camera=True)
    u = intr.f_x * x_c / z_c + intr.u0
    v = intr.f_y * y_c / z_c + intr.v0
    return PixelPoint(float(u), float(v), id=pfp_id, visible=intr.contains(u, v))


def project_visible_set(intr: CameraIntrinsics, pose: PoseVector, pfps: Sequence[FeaturePoint3D]) -> List[PixelPoint]:
    """Project every PFP at the given pose (P_p), keeping the input order

    Every point is returned; callers filter on ``visible``.
    """
    if not pfps:
        raise MVRPError("project_visible_set needs at least one PFP")
    camera_points = camera_coordinates(intr, pose.as_array(), pfps)
    return [
        _pixel_from_camera(intr, fp.id, x_c, y_c, z_c)
        for fp, (x_c, y_c, z_c) in zip(pfps, camera_points.tolist())
    ]


def camera_coordinates(intr: CameraIntrinsics, pose_values, pfps: Sequence[FeaturePoint3D]) -> np.ndarray:
    """(N, 3) camera-frame coordinates of the PFPs for a raw pose array"""
    homogeneous = np.array([fp.homogeneous for fp in pfps])
    return (homogeneous @ _extrinsic_matrix(pose_values, intr.alpha).T)[:, :3]


def intrinsics_from_fov(fov_y, width, height, alpha=0.0) -> CameraIntrinsics:
    """Square-pixel intrinsics from a vertical field of view

    Args:
        fov_y: Vertical field of view in degrees, 0 < fov_y < 180
        width, height: Image size in pixels
        alpha: Camera pitch on the UAV in degrees

    Raises:
        InvalidFovError: fov_y out of range
    """
    if not (0.0 < fov_y < 180.0):
        raise InvalidFovError(f"Vertical field of view must be in (0, 180) degrees, got {fov_y}")
    f = (height / 2.0) / math.tan(math.radians(fov_y) / 2.0)
    return CameraIntrinsics(f_x=f, f_y=f, width=int(width), height=int(height), alpha=float(alpha))


def load_pfp_table(path) -> List[FeaturePoint3D]:
    """Read a PFP table: one `id x y z` line per point (meters), `#` starts a comment

    Raises:
        MVRPIOError: file cannot be read
        MVRPError: malformed line or duplicate id
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise MVRPIOError(f"Cannot read PFP table {path}: {e}") from e

    points = []
    seen = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 4:
            raise MVRPError(f"{path}:{line_no}: expected 'id x y z', got {raw!r}")
        try:
            pfp = FeaturePoint3D(int(fields[0]), float(fields[1]), float(fields[2]), float(fields[3]))
        except ValueError as e:
            raise MVRPError(f"{path}:{line_no}: {e}") from e
        if pfp.id in seen:
            raise MVRPError(f"{path}:{line_no}: duplicate PFP id {pfp.id}")
        seen.add(pfp.id)
        points.append(pfp)

    if not points:
        raise MVRPError(f"PFP table {path} is empty")
    logger.debug(f"Loaded {len(points)} PFPs from {path}")
    return points
