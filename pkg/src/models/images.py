# FILE: src/models/images.py

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class GrayImage:
    """8-bit single channel image, stored as a read-only (height, width) uint8 array"""

    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if pixels.ndim != 2:
            raise ValueError(f"GrayImage needs a 2-D array, got shape {pixels.shape}")
        pixels.setflags(write=False)
        object.__setattr__(self, "pixels", pixels)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other):
        return isinstance(other, GrayImage) and np.array_equal(self.pixels, other.pixels)


@dataclass(frozen=True, eq=False)
class RgbImage:
    """8-bit RGB image, stored as a read-only (height, width, 3) uint8 array"""

    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.ascontiguousarray(self.pixels, dtype=np.uint8)
        if pixels.ndim != 3 or pixels.shape[2] != 3:
            raise ValueError(f"RgbImage needs a (H, W, 3) array, got shape {pixels.shape}")
        pixels.setflags(write=False)
        object.__setattr__(self, "pixels", pixels)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other):
        return isinstance(other, RgbImage) and np.array_equal(self.pixels, other.pixels)
