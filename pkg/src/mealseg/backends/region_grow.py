"""Deterministic model-free baseline: seeded flood-fill segmentation.

Kept fully deterministic so the whole pipeline (session, service, eval
harness) can be exercised without model weights.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from ..mask import MaskBitmap
from .base import BackendHandle, BackendId, ImageEmbedding, MaskPrediction, Polarity, PromptPoint

DEFAULT_TOLERANCE = 12

# 4-connectivity structuring element
_CROSS = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


def region_grow(
    image: np.ndarray,
    includes: list[tuple[int, int]],
    excludes: list[tuple[int, int]] | None = None,
    tolerance: int = DEFAULT_TOLERANCE,
) -> MaskBitmap:
    """Flood fill from each include seed under a per-channel color tolerance.

    A pixel is admitted for a given seed when every channel differs from
    the seed color by at most ``tolerance`` and it is 4-connected to the
    seed through admitted pixels. The result is the union over seeds
    (processed in row-major order); any 4-connected component of the
    union that contains an exclude point is removed.
    """
    if not includes:
        raise ValueError("at least one include seed is required")
    img = np.asarray(image, dtype=np.int16)
    h, w = img.shape[:2]
    grown = np.zeros((h, w), dtype=bool)
    for x, y in sorted(includes, key=lambda p: (p[1], p[0])):
        seed_color = img[y, x]
        admissible = (np.abs(img - seed_color) <= tolerance).all(axis=2)
        labels, _ = ndimage.label(admissible, structure=_CROSS)
        grown |= labels == labels[y, x]
    if excludes:
        labels, _ = ndimage.label(grown, structure=_CROSS)
        drop = {labels[y, x] for x, y in excludes if labels[y, x] != 0}
        if drop:
            grown &= ~np.isin(labels, sorted(drop))
    return MaskBitmap(grown)


class RegionGrowHandle(BackendHandle):
    """Backend handle wrapping :func:`region_grow`; score is always 1.0."""

    def __init__(self, backend_id: BackendId, tolerance: int = DEFAULT_TOLERANCE, **kwargs):
        super().__init__(backend_id, **kwargs)
        self.tolerance = tolerance

    def _embed(self, pixels: np.ndarray, digest: str) -> ImageEmbedding:
        # no encoder: the "embedding" is the pixel buffer itself
        return ImageEmbedding(
            backend_kind=self.kind,
            image_digest=digest,
            tensor=pixels.copy(),
            image_size=(pixels.shape[1], pixels.shape[0]),
        )

    def _predict(self, emb: ImageEmbedding, prompts: list[PromptPoint]):
        includes = [(p.x, p.y) for p in prompts if p.polarity is Polarity.INCLUDE]
        excludes = [(p.x, p.y) for p in prompts if p.polarity is Polarity.EXCLUDE]
        mask = region_grow(emb.tensor, includes, excludes, tolerance=self.tolerance)
        return mask, 1.0
