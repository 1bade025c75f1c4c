"""Binary mask bitmap and basic pixel-buffer helpers.

Coordinate convention throughout the package: origin at the top-left,
``x`` is the column, ``y`` is the row, integer pixel centers.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np


@dataclass
class MaskBitmap:
    """Per-pixel binary mask stored as a bool array of shape (height, width)."""

    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 2:
            raise ValueError(f"mask must be 2-D, got shape {arr.shape}")
        if arr.dtype != np.bool_:
            arr = arr.astype(bool)
        self.data = arr

    @classmethod
    def zeros(cls, width: int, height: int) -> "MaskBitmap":
        return cls(np.zeros((height, width), dtype=bool))

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def foreground_count(self) -> int:
        return int(self.data.sum())

    def copy(self) -> "MaskBitmap":
        return MaskBitmap(self.data.copy())

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(f"{self.width}x{self.height}:".encode())
        h.update(np.packbits(self.data).tobytes())
        return h.hexdigest()

    def __eq__(self, other) -> bool:
        if not isinstance(other, MaskBitmap):
            return NotImplemented
        return self.data.shape == other.data.shape and bool(
            np.array_equal(self.data, other.data)
        )


def image_digest(pixels: np.ndarray) -> str:
    """Content hash of a decoded 8-bit RGB buffer (shape H x W x 3).

    Hashes decoded pixels, not file bytes, so re-encoding an image does
    not change its identity.
    """
    arr = np.ascontiguousarray(pixels, dtype=np.uint8)
    h = hashlib.sha256()
    h.update(f"{arr.shape[0]}x{arr.shape[1]}:".encode())
    h.update(arr.tobytes())
    return h.hexdigest()


def check_rgb_image(pixels: np.ndarray) -> np.ndarray:
    """Validate and normalize an RGB pixel buffer to uint8 H x W x 3."""
    arr = np.asarray(pixels)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected H x W x 3 RGB buffer, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError("empty image")
    return np.ascontiguousarray(arr, dtype=np.uint8)
