from .base import (
    DEFAULT_CACHE_CAPACITY,
    MAX_IMAGE_DIM,
    BackendHandle,
    BackendId,
    BackendKind,
    ImageEmbedding,
    MaskPrediction,
    Polarity,
    PromptPoint,
    load_backend,
)
from .region_grow import DEFAULT_TOLERANCE, RegionGrowHandle, region_grow

__all__ = [
    "BackendHandle",
    "BackendId",
    "BackendKind",
    "DEFAULT_CACHE_CAPACITY",
    "DEFAULT_TOLERANCE",
    "ImageEmbedding",
    "MAX_IMAGE_DIM",
    "MaskPrediction",
    "Polarity",
    "PromptPoint",
    "RegionGrowHandle",
    "load_backend",
    "region_grow",
]
