# FILE: src/models/features.py

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Tuple

import numpy as np

from src.models.camera import PixelPoint


class DetectorKind(str, Enum):
    HARRIS = "harris"
    SUSAN = "susan"
    FAST = "fast"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(
                f"Unknown detector '{value}', expected one of {[k.value for k in cls]}"
            ) from None


@dataclass(frozen=True)
class Corner:
    """Extracted corner at integer pixel position with its detector response"""

    u: int
    v: int
    score: float
    detector: DetectorKind

    def to_pixel_point(self) -> PixelPoint:
        return PixelPoint(float(self.u), float(self.v))


@dataclass(frozen=True)
class MatchedPair:
    pfp_id: int
    projected: PixelPoint
    extracted: PixelPoint
    distance: float

    @classmethod
    def between(cls, projected: PixelPoint, extracted: PixelPoint):
        distance = math.hypot(projected.u - extracted.u, projected.v - extracted.v)
        return cls(projected.id, projected, extracted, distance)


@dataclass(frozen=True)
class MatchSet:
    """Matched projected/extracted pairs (P'_p and P'_E); N_M is the pair count"""

    pairs: Tuple[MatchedPair, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(self.pairs))
        ids = [p.pfp_id for p in self.pairs]
        if len(set(ids)) != len(ids):
            raise ValueError(f"Duplicate PFP ids in match set: {ids}")
        extracted = [p.extracted.xy for p in self.pairs]
        if len(set(extracted)) != len(extracted):
            raise ValueError("An extracted point appears in more than one pair")

    @property
    def n_m(self) -> int:
        return len(self.pairs)

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    @property
    def distances(self) -> np.ndarray:
        return np.array([p.distance for p in self.pairs], dtype=float)

    def sorted_by_id(self) -> List[MatchedPair]:
        return sorted(self.pairs, key=lambda p: p.pfp_id)

    def key(self):
        """Hashable identity of the pairing, used to detect unchanged passes"""
        return frozenset((p.pfp_id, p.extracted.xy) for p in self.pairs)
