"""Image-plane value types: RGBA frames, binary masks, channel ranges."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FrameRGBA:
    """8-bit RGBA frame; pixels has shape (height, width, 4)."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 4:
            raise ValueError(f"expected (Y, X, 4) pixel array, got shape {px.shape}")
        if px.dtype != np.uint8:
            if px.min() < 0 or px.max() > 255:
                raise ValueError("channel values must lie in [0, 255]")
            px = px.astype(np.uint8)
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @staticmethod
    def filled(width: int, height: int, rgba) -> "FrameRGBA":
        px = np.empty((height, width, 4), dtype=np.uint8)
        px[:, :] = np.asarray(rgba, dtype=np.uint8)
        return FrameRGBA(px)


@dataclass(frozen=True)
class BinaryMask:
    """Boolean mask; bits has shape (height, width)."""

    bits: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bits)
        if b.ndim != 2:
            raise ValueError(f"expected (Y, X) mask, got shape {b.shape}")
        object.__setattr__(self, "bits", b.astype(bool))

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    def matches(self, frame: FrameRGBA) -> bool:
        return (self.height, self.width) == (frame.height, frame.width)


@dataclass(frozen=True)
class ChannelRanges:
    """Inclusive per-channel [min, max] bounds for the uniformity predicate."""

    r: tuple[int, int]
    g: tuple[int, int]
    b: tuple[int, int]
    a: tuple[int, int]

    def __post_init__(self):
        for name in ("r", "g", "b", "a"):
            lo, hi = getattr(self, name)
            if not (0 <= lo <= hi <= 255):
                raise ValueError(f"channel range {name} must satisfy 0 <= min <= max <= 255")

    @staticmethod
    def uniform(lo: int, hi: int) -> "ChannelRanges":
        return ChannelRanges((lo, hi), (lo, hi), (lo, hi), (lo, hi))

    def as_array(self) -> np.ndarray:
        return np.array([self.r, self.g, self.b, self.a], dtype=np.int64)


def binarize_mask(frame: FrameRGBA, ranges: ChannelRanges) -> BinaryMask:
    """Bit is 1 iff all four channels lie inside their inclusive ranges."""
    bounds = ranges.as_array()
    px = frame.pixels.astype(np.int64)
    ok = (px >= bounds[:, 0]) & (px <= bounds[:, 1])
    return BinaryMask(ok.all(axis=2))
