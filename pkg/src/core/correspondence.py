# FILE: src/core/correspondence.py
# Mutual nearest neighbour matching of projected PFPs to extracted corners and
# iterative gross error elimination.

import logging
import math
from typing import Sequence

import numpy as np

from src.models.camera import PixelPoint
from src.models.features import MatchedPair, MatchSet

logger = logging.getLogger("Correspondence")

MIN_ELIMINATION_PAIRS = 3


def mutual_nearest_match(projected: Sequence[PixelPoint], extracted: Sequence[PixelPoint]) -> MatchSet:
    """Pair p_i with e_j iff each is the other's nearest neighbour

    Distance ties go to the candidate with the lower list index. Only visible
    projected points should be passed in.
    """
    if not projected or not extracted:
        return MatchSet()

    p = np.array([pt.xy for pt in projected], dtype=float)
    e = np.array([pt.xy for pt in extracted], dtype=float)
    dist = np.hypot(p[:, None, 0] - e[None, :, 0], p[:, None, 1] - e[None, :, 1])

    # argmin returns the first minimum, which is the lower index on ties
    nearest_extracted = dist.argmin(axis=1)
    nearest_projected = dist.argmin(axis=0)

    pairs = [
        MatchedPair.between(projected[i], extracted[j])
        for i, j in enumerate(nearest_extracted.tolist())
        if nearest_projected[j] == i
    ]
    return MatchSet(pairs)


def _flag_gross_errors(distances: np.ndarray, t1: float, t2: float) -> np.ndarray:
    n = distances.size
    others_mean = (distances.sum() - distances) / (n - 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        excess = np.where(
            others_mean > 0.0,
            (distances - others_mean) / others_mean * 100.0,
            np.where(distances > 0.0, math.inf, 0.0),
        )
    return (distances > t1) & (excess > t2)


def eliminate_gross_errors(m: MatchSet, t1: float, t2: float) -> MatchSet:
    """Remove pairs with d_i > t1 and (d_i - mean of the others) / mean * 100 > t2

    All flagged pairs are dropped per pass and the test repeats until a pass
    flags nothing. Sets with two or fewer pairs are returned unchanged.

    Args:
        m: Matched pairs
        t1: Absolute distance threshold in pixels
        t2: Relative excess threshold in percent
    """
    if t1 <= 0 or t2 <= 0:
        raise ValueError(f"Gross error thresholds must be positive, got t1={t1}, t2={t2}")

    pairs = list(m.pairs)
    passes = 0
    while len(pairs) >= MIN_ELIMINATION_PAIRS:
        passes += 1
        flagged = _flag_gross_errors(np.array([p.distance for p in pairs]), t1, t2)
        if not flagged.any():
            break
        removed = [p.pfp_id for p, bad in zip(pairs, flagged) if bad]
        logger.debug(f"Gross error pass {passes}: removing PFPs {removed}")
        pairs = [p for p, bad in zip(pairs, flagged) if not bad]
    return MatchSet(pairs)
