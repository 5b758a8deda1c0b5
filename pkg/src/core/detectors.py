# FILE: src/core/detectors.py
# Harris, SUSAN and FAST corner extraction on 8-bit gray images.
# Pixels closer to the border than a detector's footprint are never corners.

import logging
from typing import Iterable, List

import cv2
import numpy as np

from src.core.error_handler import ImageTooSmallError
from src.models.config import FastConfig, HarrisConfig, SusanConfig, SusanMask
from src.models.features import Corner, DetectorKind
from src.models.images import GrayImage

logger = logging.getLogger("Detectors")

# Radius-3 Bresenham circle, clockwise from the top, as (du, dv)
CIRCLE_OFFSETS = (
    (0, -3), (1, -3), (2, -2), (3, -1),
    (3, 0), (3, 1), (2, 2), (1, 3),
    (0, 3), (-1, 3), (-2, 2), (-3, 1),
    (-3, 0), (-3, -1), (-2, -2), (-1, -3),
)
_COMPASS = (0, 4, 8, 12)
FAST_MARGIN = 3

# Circular SUSAN masks without the nucleus: 36 and 24 offsets
SUSAN_MASKS = {
    SusanMask.MASK37: (3, tuple((du, dv) for dv in range(-3, 4) for du in range(-3, 4)
                                if 0 < du * du + dv * dv <= 10)),
    SusanMask.MASK25: (2, tuple((du, dv) for dv in range(-2, 3) for du in range(-2, 3)
                                if 0 < du * du + dv * dv <= 8)),
}


def _check_size(img: GrayImage, min_width, min_height, detector):
    if img.width < min_width or img.height < min_height:
        raise ImageTooSmallError(
            f"{detector} needs at least {min_width}x{min_height} pixels, got {img.width}x{img.height}"
        )


def _raster_key(corner: Corner):
    return (-corner.score, corner.v, corner.u)


def non_max_suppress(corners: Iterable[Corner], radius: int) -> List[Corner]:
    """Keep a corner iff no better corner lies within Chebyshev distance `radius`

    Better means a higher score, or an equal score earlier in raster order
    (smaller v, then smaller u). Every input point takes part in the comparison,
    suppressed or not. The result is sorted by score descending, ties by raster order.
    """
    if radius < 1:
        raise ValueError(f"NMS radius must be >= 1, got {radius}")
    corners = list(corners)
    ranks = {(c.u, c.v): _raster_key(c) for c in corners}

    window = [(du, dv) for dv in range(-radius, radius + 1) for du in range(-radius, radius + 1)
              if du or dv]
    use_window = len(window) < len(corners)

    kept = []
    for c in corners:
        key = ranks[(c.u, c.v)]
        if use_window:
            neighbours = (ranks.get((c.u + du, c.v + dv)) for du, dv in window)
        else:
            neighbours = (ranks[(o.u, o.v)] for o in corners
                          if (o.u, o.v) != (c.u, c.v) and max(abs(o.u - c.u), abs(o.v - c.v)) <= radius)
        if not any(other is not None and other < key for other in neighbours):
            kept.append(c)
    return sorted(kept, key=_raster_key)


def _corners_from_map(scores: np.ndarray, mask: np.ndarray, kind: DetectorKind) -> List[Corner]:
    vs, us = np.nonzero(mask)
    return [Corner(int(u), int(v), float(scores[v, u]), kind) for v, u in zip(vs.tolist(), us.tolist())]


# HARRIS

def harris_response(img: GrayImage, cfg: HarrisConfig = HarrisConfig()) -> np.ndarray:
    """R = det(M_H) - k_H * Tr(M_H)^2 with Sobel gradients and a Gaussian window"""
    size = 2 * cfg.window_radius + 3
    _check_size(img, size, size, "Harris")

    gray = img.pixels.astype(np.float64)
    i_u = cv2.Sobel(gray, cv2.CV_64F, 1, 0, ksize=3)
    i_v = cv2.Sobel(gray, cv2.CV_64F, 0, 1, ksize=3)

    ksize = (2 * cfg.window_radius + 1,) * 2

    def window(a):
        return cv2.GaussianBlur(a, ksize, cfg.gaussian_sigma, sigmaY=cfg.gaussian_sigma,
                                borderType=cv2.BORDER_REFLECT_101)

    a = window(i_u * i_u)
    b = window(i_v * i_v)
    c = window(i_u * i_v)
    return a * b - c * c - cfg.k_h * (a + b) ** 2


def harris_detect(img: GrayImage, cfg: HarrisConfig = HarrisConfig()) -> List[Corner]:
    response = harris_response(img, cfg)
    margin = cfg.window_radius + 1
    mask = np.zeros(response.shape, dtype=bool)
    inner = response[margin:-margin, margin:-margin]
    mask[margin:-margin, margin:-margin] = inner > cfg.response_threshold
    corners = non_max_suppress(_corners_from_map(response, mask, DetectorKind.HARRIS), cfg.nms_radius)
    logger.debug(f"Harris: {int(mask.sum())} candidates, {len(corners)} corners")
    return corners


# SUSAN

def susan_lut(t: float) -> np.ndarray:
    """c(r, r0) = exp(-((I(r) - I(r0)) / t)^6) indexed by difference + 255"""
    diffs = np.arange(-255, 256, dtype=np.float64)
    return np.exp(-((diffs / t) ** 6))


def susan_response(img: GrayImage, cfg: SusanConfig = SusanConfig()) -> np.ndarray:
    """Corner response g - n(r0) where n(r0) < g, else 0; zero on the border"""
    r, offsets = SUSAN_MASKS[cfg.mask]
    _check_size(img, 2 * r + 2, 2 * r + 2, "SUSAN")

    gray = img.pixels.astype(np.int16)
    h, w = gray.shape
    lut = susan_lut(cfg.t)
    nucleus = gray[r:h - r, r:w - r]
    usan = np.zeros(nucleus.shape, dtype=np.float64)
    for du, dv in offsets:
        usan += lut[gray[r + dv:h - r + dv, r + du:w - r + du] - nucleus + 255]

    response = np.zeros(gray.shape, dtype=np.float64)
    response[r:h - r, r:w - r] = np.where(usan < cfg.g, cfg.g - usan, 0.0)
    return response


def susan_detect(img: GrayImage, cfg: SusanConfig = SusanConfig()) -> List[Corner]:
    response = susan_response(img, cfg)
    # Non-maximum suppression over a 5x5 template
    corners = non_max_suppress(_corners_from_map(response, response > 0.0, DetectorKind.SUSAN), 2)
    logger.debug(f"SUSAN: {len(corners)} corners")
    return corners


# FAST

def _arc_scan(bits: np.ndarray, weights: np.ndarray = None):
    """Longest circular run of set bits along the last axis (16 entries)

    Returns the run length and, when weights are given, the weight sum over the
    first longest run.
    """
    bits = np.asarray(bits, dtype=bool)
    shape = bits.shape[:-1]
    run = np.zeros(shape, dtype=np.int32)
    best = np.zeros(shape, dtype=np.int32)
    run_sum = np.zeros(shape, dtype=np.float64)
    best_sum = np.zeros(shape, dtype=np.float64)
    for k in range(32):
        bit = bits[..., k % 16]
        run = np.where(bit, run + 1, 0)
        if weights is not None:
            run_sum = np.where(bit, run_sum + weights[..., k % 16], 0.0)
            longer = (run > best) & (run <= 16)
            best_sum = np.where(longer, run_sum, best_sum)
        best = np.maximum(best, run)

    full = best >= 16
    best = np.minimum(best, 16)
    if weights is not None:
        best_sum = np.where(full, weights.sum(axis=-1), best_sum)
    return best, best_sum


def max_arc_length(bits: np.ndarray) -> np.ndarray:
    """Longest circularly contiguous run of True values in each 16-entry row"""
    return _arc_scan(bits)[0]


def fast_scores(img: GrayImage, cfg: FastConfig = FastConfig()) -> np.ndarray:
    """Segment-test score map: sum of |I(x) - I(P)| over the qualifying arc, 0 elsewhere"""
    _check_size(img, 2 * FAST_MARGIN + 1, 2 * FAST_MARGIN + 1, "FAST")
    gray = img.pixels.astype(np.int16)
    h, w = gray.shape
    m = FAST_MARGIN
    center = gray[m:h - m, m:w - m]

    def ring_slice(index):
        du, dv = CIRCLE_OFFSETS[index]
        return gray[m + dv:h - m + dv, m + du:w - m + du]

    # Any arc of length t_f covers at least t_f // 4 of the compass pixels
    need = cfg.t_f // 4
    if need > 0:
        bright = np.zeros(center.shape, dtype=np.int8)
        dark = np.zeros(center.shape, dtype=np.int8)
        for index in _COMPASS:
            diff = ring_slice(index) - center
            bright += diff > cfg.epsilon
            dark += diff < -cfg.epsilon
        candidates = (bright >= need) | (dark >= need)
    else:
        candidates = np.ones(center.shape, dtype=bool)

    scores = np.zeros(gray.shape, dtype=np.float64)
    vs, us = np.nonzero(candidates)
    if vs.size == 0:
        return scores

    diffs = np.stack([ring_slice(i)[vs, us] for i in range(16)], axis=-1).astype(np.float64)
    diffs -= center[vs, us][:, None]
    magnitude = np.abs(diffs)

    best_score = np.zeros(vs.shape, dtype=np.float64)
    for bits in (diffs > cfg.epsilon, diffs < -cfg.epsilon):
        length, arc_sum = _arc_scan(bits, magnitude)
        ok = length >= cfg.t_f
        if cfg.strict_count:
            ok &= bits.sum(axis=-1) > cfg.t_f
        best_score = np.where(ok, np.maximum(best_score, arc_sum), best_score)

    scores[vs + m, us + m] = best_score
    return scores


def fast_detect(img: GrayImage, cfg: FastConfig = FastConfig()) -> List[Corner]:
    scores = fast_scores(img, cfg)
    corners = non_max_suppress(_corners_from_map(scores, scores > 0.0, DetectorKind.FAST), cfg.nms_radius)
    logger.debug(f"FAST: {len(corners)} corners")
    return corners


def detect(img: GrayImage, kind, harris: HarrisConfig = HarrisConfig(), susan: SusanConfig = SusanConfig(),
           fast: FastConfig = FastConfig()) -> List[Corner]:
    """Run the named detector with its configuration"""
    kind = DetectorKind.parse(kind)
    if kind is DetectorKind.HARRIS:
        return harris_detect(img, harris)
    if kind is DetectorKind.SUSAN:
        return susan_detect(img, susan)
    return fast_detect(img, fast)
