"""Backend interface: promptable segmenters behind a uniform handle.

A handle owns an LRU embedding cache keyed by (backend kind, pixel
digest); ``embed_image`` consults the cache, ``predict_mask`` runs the
decode step only and reports its wall-clock latency.
"""

from __future__ import annotations

import enum
import threading
import time
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import (
    EmptyPrompt,
    MissingModel,
    OversizeImage,
    UnsupportedExcludePoint,
)
from ..mask import MaskBitmap, check_rgb_image, image_digest

MAX_IMAGE_DIM = 4096
DEFAULT_CACHE_CAPACITY = 8


class BackendKind(str, enum.Enum):
    MEAL_SAM = "mealsam"
    PRETRAINED_B = "pretrained_b"
    PRETRAINED_L = "pretrained_l"
    PRETRAINED_H = "pretrained_h"
    REGION_GROW = "regiongrow"

    @property
    def is_model_backed(self) -> bool:
        return self is not BackendKind.REGION_GROW

    @property
    def supports_background_points(self) -> bool:
        # MealSAM's decoder was fine-tuned on foreground samples only;
        # exclusion clicks are rejected rather than guessed at.
        return self is not BackendKind.MEAL_SAM


class Polarity(str, enum.Enum):
    INCLUDE = "include"
    EXCLUDE = "exclude"


@dataclass(frozen=True)
class PromptPoint:
    """A user click: pixel coordinate plus include/exclude polarity."""

    x: int
    y: int
    polarity: Polarity = Polarity.INCLUDE


@dataclass(frozen=True)
class BackendId:
    kind: BackendKind
    encoder_path: Optional[Path] = None
    decoder_path: Optional[Path] = None


@dataclass
class ImageEmbedding:
    backend_kind: BackendKind
    image_digest: str
    tensor: np.ndarray = field(repr=False)
    image_size: tuple[int, int]  # (width, height) of the source image
    # backend-specific extras (e.g. resize geometry for SAM preprocessing)
    meta: dict = field(default_factory=dict)


@dataclass
class MaskPrediction:
    mask: MaskBitmap
    score: float
    latency_ms: float


class BackendHandle:
    """Base class for loaded backends; subclasses implement the raw steps."""

    def __init__(self, backend_id: BackendId, cache_capacity: int = DEFAULT_CACHE_CAPACITY):
        self.backend_id = backend_id
        self.kind = backend_id.kind
        self.supports_background_points = backend_id.kind.supports_background_points
        self._cache: OrderedDict[str, ImageEmbedding] = OrderedDict()
        self._cache_capacity = cache_capacity
        self._cache_lock = threading.Lock()
        self.cache_hits = 0
        self.cache_misses = 0

    # subclass API -----------------------------------------------------
    def _embed(self, pixels: np.ndarray, digest: str) -> ImageEmbedding:
        raise NotImplementedError

    def _predict(self, emb: ImageEmbedding, prompts: list[PromptPoint]) -> tuple[MaskBitmap, float]:
        """Run the decode step; returns (mask, score)."""
        raise NotImplementedError

    # public API -------------------------------------------------------
    def embed_image(self, image: np.ndarray) -> ImageEmbedding:
        pixels = check_rgb_image(image)
        h, w = pixels.shape[:2]
        if w > MAX_IMAGE_DIM or h > MAX_IMAGE_DIM:
            raise OversizeImage(f"image {w}x{h} exceeds {MAX_IMAGE_DIM} px per side")
        digest = image_digest(pixels)
        with self._cache_lock:
            cached = self._cache.get(digest)
            if cached is not None:
                self._cache.move_to_end(digest)
                self.cache_hits += 1
                return cached
        emb = self._embed(pixels, digest)
        with self._cache_lock:
            self.cache_misses += 1
            self._cache[digest] = emb
            self._cache.move_to_end(digest)
            while len(self._cache) > self._cache_capacity:
                self._cache.popitem(last=False)
        return emb

    def predict_mask(self, emb: ImageEmbedding, prompts: list[PromptPoint]) -> MaskPrediction:
        if not prompts:
            raise EmptyPrompt("at least one prompt point is required")
        if not any(p.polarity is Polarity.INCLUDE for p in prompts):
            raise EmptyPrompt("at least one include point is required")
        if not self.supports_background_points and any(
            p.polarity is Polarity.EXCLUDE for p in prompts
        ):
            raise UnsupportedExcludePoint(
                f"backend {self.kind.value} does not accept exclude points"
            )
        start = time.perf_counter()
        bitmap, score = self._predict(emb, list(prompts))
        latency_ms = (time.perf_counter() - start) * 1000.0
        return MaskPrediction(mask=bitmap, score=score, latency_ms=latency_ms)


def load_backend(backend_id: BackendId, **kwargs) -> BackendHandle:
    """Instantiate a handle for the given backend id.

    Model-backed kinds require resolvable encoder and decoder paths;
    missing files raise MissingModel, files the runtime rejects raise
    CorruptModel.
    """
    if backend_id.kind is BackendKind.REGION_GROW:
        from .region_grow import RegionGrowHandle

        return RegionGrowHandle(backend_id, **kwargs)

    for label, path in (("encoder", backend_id.encoder_path), ("decoder", backend_id.decoder_path)):
        if path is None:
            raise MissingModel(f"{backend_id.kind.value}: no {label} path configured")
        if not Path(path).is_file():
            raise MissingModel(f"{backend_id.kind.value}: {label} not found at {path}")

    from .sam_torch import TorchScriptSamHandle

    return TorchScriptSamHandle(backend_id, **kwargs)
