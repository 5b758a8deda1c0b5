"""Shared builders for synthetic correspondences and images"""

import math

import numpy as np

from src.core.geometry import project_visible_set
from src.models.camera import PixelPoint
from src.models.features import MatchedPair, MatchSet
from src.models.images import GrayImage


def self_matches(pose, intr, pfps, offsets=None, ids=None):
    """Pair every visible projection at `pose` with itself, optionally shifted per id"""
    offsets = offsets or {}
    pairs = []
    for p in project_visible_set(intr, pose, pfps):
        if not p.visible or (ids is not None and p.id not in ids):
            continue
        du, dv = offsets.get(p.id, (0.0, 0.0))
        pairs.append(MatchedPair.between(p, PixelPoint(p.u + du, p.v + dv)))
    return MatchSet(pairs)


def pair(pfp_id, distance, u0=0.0):
    """Matched pair whose extracted point sits `distance` px to the right"""
    projected = PixelPoint(u0 + 100.0 * pfp_id, 50.0, id=pfp_id)
    extracted = PixelPoint(projected.u + distance, 50.0)
    return MatchedPair(pfp_id, projected, extracted, distance)


def square_image(size=40, top_left=10, side=11, fg=200, bg=20):
    pixels = np.full((size, size), bg, dtype=np.uint8)
    pixels[top_left:top_left + side, top_left:top_left + side] = fg
    return GrayImage(pixels)


def disk_image(size=32, center=(16, 16), radius=2, fg=255, bg=30):
    vv, uu = np.mgrid[0:size, 0:size]
    pixels = np.full((size, size), bg, dtype=np.uint8)
    pixels[(uu - center[0]) ** 2 + (vv - center[1]) ** 2 <= radius * radius] = fg
    return GrayImage(pixels)


def pose_error(estimate, truth):
    return np.abs(estimate.as_array() - truth.as_array())


def nearest_distance(point, corners):
    return min(math.hypot(point[0] - c.u, point[1] - c.v) for c in corners)
