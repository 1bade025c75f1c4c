"""Annotation session state machine.

Holds the in-progress item (prompt points, pending mask, undo stack) and
the committed items. Undo operates on pending-item state only; committed
items are corrected with delete_item. Undo records are full snapshots of
the pending state so every undo is an exact bit-level inverse.
"""

from __future__ import annotations

import enum
import math
import time
import uuid
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .backends import (
    BackendHandle,
    BackendId,
    BackendKind,
    MaskPrediction,
    Polarity,
    PromptPoint,
    load_backend,
)
from .categories import CategoryRegistry
from .errors import (
    EmptyMask,
    EmptyPrompt,
    InvalidQuantity,
    NoPendingMask,
    NothingToUndo,
    OutOfBounds,
    UnknownCategory,
    UnknownItem,
    UnsupportedExcludePoint,
)
from .mask import MaskBitmap, check_rgb_image

OVERLAY_PENDING_COLOR = (255, 255, 255)


class Unit(str, enum.Enum):
    GRAM = "g"
    MILLILITER = "ml"


@dataclass(frozen=True)
class Quantity:
    value: float
    unit: Unit

    def __post_init__(self):
        if not math.isfinite(self.value) or self.value < 0:
            raise InvalidQuantity(f"quantity value must be finite and >= 0, got {self.value}")


@dataclass
class AnnotationItem:
    item_id: int
    mask: MaskBitmap
    category_id: int
    quantity: Optional[Quantity] = None


class BrushMode(str, enum.Enum):
    ADD = "add"
    ERASE = "erase"


@dataclass
class _PendingSnapshot:
    points: list[PromptPoint]
    mask: Optional[MaskBitmap]


class Session:
    def __init__(
        self,
        image: np.ndarray,
        backend: BackendId,
        registry: CategoryRegistry,
        source_filename: str = "",
        handle: Optional[BackendHandle] = None,
    ):
        self.session_id = uuid.uuid4().hex
        self.image = check_rgb_image(image)
        self.source_filename = source_filename
        self.backend = backend
        self.registry = registry
        self.pending_points: list[PromptPoint] = []
        self.pending_mask: Optional[MaskBitmap] = None
        self.items: list[AnnotationItem] = []
        self._undo_stack: list[_PendingSnapshot] = []
        self._next_item_id = 0
        self._handle = handle
        self._created_monotonic = time.monotonic()

    # -- basic accessors ----------------------------------------------
    @property
    def width(self) -> int:
        return self.image.shape[1]

    @property
    def height(self) -> int:
        return self.image.shape[0]

    @property
    def undo_depth(self) -> int:
        return len(self._undo_stack)

    def elapsed_seconds(self) -> float:
        return time.monotonic() - self._created_monotonic

    def _require_handle(self) -> BackendHandle:
        if self._handle is None:
            self._handle = load_backend(self.backend)
        return self._handle

    def _snapshot(self) -> None:
        self._undo_stack.append(
            _PendingSnapshot(
                points=list(self.pending_points),
                mask=self.pending_mask.copy() if self.pending_mask is not None else None,
            )
        )

    # -- pending-item edits -------------------------------------------
    def add_point(self, point: PromptPoint) -> None:
        if not (0 <= point.x < self.width and 0 <= point.y < self.height):
            raise OutOfBounds(
                f"point ({point.x}, {point.y}) outside {self.width}x{self.height} image"
            )
        if (
            point.polarity is Polarity.EXCLUDE
            and not self.backend.kind.supports_background_points
        ):
            raise UnsupportedExcludePoint(
                f"backend {self.backend.kind.value} does not accept exclude points"
            )
        self._snapshot()
        self.pending_points.append(point)
        # prompts changed, so a previously predicted mask is stale
        self.pending_mask = None

    def clear_points(self) -> None:
        if not self.pending_points and self.pending_mask is None:
            return
        self._snapshot()
        self.pending_points = []
        self.pending_mask = None

    def undo_last(self) -> None:
        if not self._undo_stack:
            raise NothingToUndo("no pending-state edits to undo")
        snapshot = self._undo_stack.pop()
        self.pending_points = snapshot.points
        self.pending_mask = snapshot.mask

    def semi_segment(self) -> MaskPrediction:
        if not any(p.polarity is Polarity.INCLUDE for p in self.pending_points):
            raise EmptyPrompt("no include points pending")
        handle = self._require_handle()
        embedding = handle.embed_image(self.image)
        prediction = handle.predict_mask(embedding, self.pending_points)
        self._snapshot()
        self.pending_mask = prediction.mask.copy()
        return prediction

    def brush_stroke(
        self, path: list[tuple[int, int]], radius: int, mode: BrushMode
    ) -> None:
        if self.pending_mask is None:
            raise NoPendingMask("brush requires a predicted mask to correct")
        if radius < 1:
            raise ValueError("brush radius must be >= 1")
        if not path:
            return
        self._snapshot()
        stamp = _disc_offsets(radius)
        bits = self.pending_mask.data
        value = mode is BrushMode.ADD
        for cx, cy in _rasterize_path(path):
            xs = stamp[:, 0] + cx
            ys = stamp[:, 1] + cy
            keep = (xs >= 0) & (xs < self.width) & (ys >= 0) & (ys < self.height)
            bits[ys[keep], xs[keep]] = value

    # -- committing items ---------------------------------------------
    def validate_item(
        self, category_id: int, quantity: Optional[Quantity] = None
    ) -> AnnotationItem:
        if self.pending_mask is None:
            raise NoPendingMask("nothing to validate: run segmentation first")
        if self.pending_mask.foreground_count == 0:
            raise EmptyMask("pending mask has no foreground pixels")
        if category_id not in self.registry:
            raise UnknownCategory(f"category id {category_id} not in registry")
        item = AnnotationItem(
            item_id=self._next_item_id,
            mask=self.pending_mask.copy(),
            category_id=category_id,
            quantity=quantity,
        )
        self._next_item_id += 1
        self.items.append(item)
        self.pending_points = []
        self.pending_mask = None
        self._undo_stack = []
        return item

    def delete_item(self, item_id: int) -> None:
        for i, item in enumerate(self.items):
            if item.item_id == item_id:
                del self.items[i]
                return
        raise UnknownItem(f"no item with id {item_id}")

    # -- rendering -----------------------------------------------------
    def composite_overlay(self, include_pending: bool = False) -> np.ndarray:
        """Blend committed masks (and optionally the pending mask) over the image.

        Each item's mask is alpha-blended at 0.5 with its category color,
        in item_id order, so later items win on overlap; the pending mask
        is highlighted last in white.
        """
        base = self.image.astype(np.int32)
        out = base.copy()
        layers = [
            (item.mask, self.registry.get(item.category_id).color)
            for item in sorted(self.items, key=lambda it: it.item_id)
        ]
        if include_pending and self.pending_mask is not None:
            layers.append((self.pending_mask, OVERLAY_PENDING_COLOR))
        for bitmap, color in layers:
            sel = bitmap.data
            # round-half-up of 0.5*image + 0.5*color on integers; later
            # layers overwrite earlier ones where masks overlap
            blended = (base + np.array(color, dtype=np.int32) + 1) // 2
            out[sel] = blended[sel]
        return out.astype(np.uint8)


def create_session(
    image: np.ndarray,
    backend: Optional[BackendId] = None,
    registry: Optional[CategoryRegistry] = None,
    source_filename: str = "",
    handle: Optional[BackendHandle] = None,
) -> Session:
    """Build a fresh session; MealSAM is the default backend when none given."""
    if backend is None:
        backend = BackendId(kind=BackendKind.MEAL_SAM)
    if registry is None:
        registry = CategoryRegistry()
    return Session(
        image=image,
        backend=backend,
        registry=registry,
        source_filename=source_filename,
        handle=handle,
    )


def _disc_offsets(radius: int) -> np.ndarray:
    """Integer offsets within Euclidean distance <= radius of the origin."""
    span = np.arange(-radius, radius + 1)
    xs, ys = np.meshgrid(span, span)
    keep = xs * xs + ys * ys <= radius * radius
    return np.stack([xs[keep], ys[keep]], axis=1)


def _rasterize_path(path: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """All pixels along the polyline, via Bresenham per segment."""
    pixels = [tuple(path[0])]
    for (x0, y0), (x1, y1) in zip(path, path[1:]):
        pixels.extend(_bresenham(x0, y0, x1, y1)[1:])
    return pixels


def _bresenham(x0: int, y0: int, x1: int, y1: int) -> list[tuple[int, int]]:
    points = []
    dx, dy = abs(x1 - x0), -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    x, y = x0, y0
    while True:
        points.append((x, y))
        if x == x1 and y == y1:
            break
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x += sx
        if e2 <= dx:
            err += dx
            y += sy
    return points
