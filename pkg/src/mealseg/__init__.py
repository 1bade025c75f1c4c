"""Promptable food-image segmentation and annotation toolkit."""

__version__ = "0.1.0"

from .backends import (
    BackendId,
    BackendKind,
    MaskPrediction,
    Polarity,
    PromptPoint,
    load_backend,
    region_grow,
)
from .categories import CategoryRegistry, category_color
from .mask import MaskBitmap
from .session import AnnotationItem, BrushMode, Quantity, Session, Unit, create_session

__all__ = [
    "AnnotationItem",
    "BackendId",
    "BackendKind",
    "BrushMode",
    "CategoryRegistry",
    "MaskBitmap",
    "MaskPrediction",
    "Polarity",
    "PromptPoint",
    "Quantity",
    "Session",
    "Unit",
    "category_color",
    "create_session",
    "load_backend",
    "region_grow",
]
