"""Bit-exact file formats: RLE mask codec, category files, project
directories, evaluation dataset ingestion.

A project directory holds ``project.json`` (UTF-8, sorted keys), a copy
of the source image as ``image.png`` and the rendered ``overlay.png``.
Masks live inside the document as RLE so the project round-trips from a
single source of truth.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image, UnidentifiedImageError

from .backends import BackendId, BackendKind
from .categories import Category, CategoryRegistry, CategorySource
from .errors import (
    DigestMismatch,
    DuplicateCategory,
    IoFailure,
    LengthMismatch,
    MalformedRuns,
    MissingFile,
    MissingMaskForImage,
    SchemaVersionUnsupported,
    UnreadableRaster,
)
from .mask import MaskBitmap, image_digest
from .session import AnnotationItem, Quantity, Session, Unit

SCHEMA_VERSION = 1
PROJECT_DOC = "project.json"
PROJECT_IMAGE = "image.png"
PROJECT_OVERLAY = "overlay.png"


# ---------------------------------------------------------------------------
# RLE codec
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RleMask:
    """Alternating run lengths over the row-major bit sequence.

    The first run counts zeros and may have length 0; all other runs
    must be positive; the runs sum to width * height.
    """

    width: int
    height: int
    runs: tuple[int, ...]


def rle_encode(mask: MaskBitmap) -> RleMask:
    flat = mask.data.ravel().astype(np.int8)
    boundaries = np.flatnonzero(np.diff(flat)) + 1
    positions = np.concatenate(([0], boundaries, [flat.size]))
    runs = np.diff(positions)
    if flat[0] == 1:
        runs = np.concatenate(([0], runs))
    return RleMask(width=mask.width, height=mask.height, runs=tuple(runs.tolist()))


def rle_decode(rle: RleMask) -> MaskBitmap:
    runs = np.asarray(rle.runs, dtype=np.int64)
    total = rle.width * rle.height
    if int(runs.sum()) != total:
        raise LengthMismatch(
            f"runs sum to {int(runs.sum())}, expected {rle.width}x{rle.height}={total}"
        )
    if runs.min() < 0 or (runs.size > 1 and runs[1:].min() == 0):
        raise MalformedRuns("only the leading zero-run may be empty")
    values = np.arange(runs.size) % 2  # 0-run first, then alternating
    flat = np.repeat(values.astype(bool), runs)
    return MaskBitmap(flat.reshape(rle.height, rle.width))


# ---------------------------------------------------------------------------
# Images and category files
# ---------------------------------------------------------------------------

def decode_image(source) -> np.ndarray:
    """Decode PNG/JPEG bytes or a path to an 8-bit RGB buffer.

    Alpha channels are composited over white rather than dropped.
    """
    img = Image.open(source)
    if img.mode in ("RGBA", "LA", "PA") or (img.mode == "P" and "transparency" in img.info):
        rgba = img.convert("RGBA")
        background = Image.new("RGBA", rgba.size, (255, 255, 255, 255))
        img = Image.alpha_composite(background, rgba)
    return np.asarray(img.convert("RGB"), dtype=np.uint8)


def load_category_file(path) -> CategoryRegistry:
    """One category name per line, blank lines ignored, ids in line order."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"category file not found: {path}")
    names = [line.strip() for line in path.read_text(encoding="utf-8").splitlines()]
    return CategoryRegistry.from_names(
        [n for n in names if n], source=CategorySource.FILE
    )


# ---------------------------------------------------------------------------
# Project save / load
# ---------------------------------------------------------------------------

def _quantity_to_doc(q: Optional[Quantity]):
    if q is None:
        return None
    return {"value": q.value, "unit": q.unit.value}


def _quantity_from_doc(doc) -> Optional[Quantity]:
    if doc is None:
        return None
    return Quantity(value=float(doc["value"]), unit=Unit(doc["unit"]))


def session_document(session: Session, total_seconds: Optional[float] = None) -> dict:
    if total_seconds is None:
        total_seconds = session.elapsed_seconds()
    return {
        "schema_version": SCHEMA_VERSION,
        "image_filename": session.source_filename,
        "image_digest": image_digest(session.image),
        "backend": session.backend.kind.value,
        "categories": [
            {
                "id": c.id,
                "name": c.name,
                "color": list(c.color),
                "source": c.source.value,
            }
            for c in session.registry.entries
        ],
        "items": [
            {
                "item_id": item.item_id,
                "category_id": item.category_id,
                "quantity": _quantity_to_doc(item.quantity),
                "mask": {
                    "width": item.mask.width,
                    "height": item.mask.height,
                    "runs": list(rle_encode(item.mask).runs),
                },
            }
            for item in session.items
        ],
        "total_annotation_seconds": round(total_seconds, 3),
    }


def save_project(session: Session, directory) -> dict:
    """Write project.json + image.png + overlay.png; returns written paths."""
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        doc = session_document(session)
        doc_path = directory / PROJECT_DOC
        doc_path.write_text(
            json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        image_path = directory / PROJECT_IMAGE
        Image.fromarray(session.image).save(image_path)
        overlay_path = directory / PROJECT_OVERLAY
        Image.fromarray(session.composite_overlay(include_pending=False)).save(overlay_path)
    except OSError as exc:
        raise IoFailure(f"failed to write project to {directory}: {exc}") from exc
    return {
        "project": str(doc_path),
        "image": str(image_path),
        "overlay": str(overlay_path),
        "total_annotation_seconds": doc["total_annotation_seconds"],
    }


def load_project(directory) -> Session:
    """Reconstruct a session (empty pending state) from a project directory."""
    directory = Path(directory)
    doc_path = directory / PROJECT_DOC
    if not doc_path.is_file():
        raise MissingFile(f"no {PROJECT_DOC} in {directory}")
    try:
        doc = json.loads(doc_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise IoFailure(f"unreadable project document: {exc}") from exc
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise SchemaVersionUnsupported(
            f"schema_version {doc.get('schema_version')} unsupported"
        )
    image_path = directory / PROJECT_IMAGE
    if not image_path.is_file():
        raise MissingFile(f"no {PROJECT_IMAGE} in {directory}")
    pixels = decode_image(image_path)
    if image_digest(pixels) != doc["image_digest"]:
        raise DigestMismatch("image bytes changed since the project was saved")

    registry = CategoryRegistry(
        entries=[
            Category(
                id=c["id"],
                name=c["name"],
                color=tuple(c["color"]),
                source=CategorySource(c["source"]),
            )
            for c in doc["categories"]
        ]
    )
    # model paths are deployment config, only the kind is persisted
    session = Session(
        image=pixels,
        backend=BackendId(kind=BackendKind(doc["backend"])),
        registry=registry,
        source_filename=doc["image_filename"],
    )
    for item_doc in doc["items"]:
        mask_doc = item_doc["mask"]
        session.items.append(
            AnnotationItem(
                item_id=item_doc["item_id"],
                mask=rle_decode(
                    RleMask(
                        width=mask_doc["width"],
                        height=mask_doc["height"],
                        runs=tuple(mask_doc["runs"]),
                    )
                ),
                category_id=item_doc["category_id"],
                quantity=_quantity_from_doc(item_doc["quantity"]),
            )
        )
    session._next_item_id = 1 + max((i.item_id for i in session.items), default=-1)
    return session


# ---------------------------------------------------------------------------
# Evaluation dataset
# ---------------------------------------------------------------------------

def load_eval_dataset(images_dir, masks_dir):
    """Pair each image with per-class binary masks from an indexed raster.

    Rasters use pixel value = class id with 0 as background; every
    nonzero class present yields one binary mask. Returns a list of
    (name, pixel buffer, [(class_id, MaskBitmap), ...]) sorted by name.
    """
    images_dir, masks_dir = Path(images_dir), Path(masks_dir)
    entries = []
    image_paths = sorted(
        p for p in images_dir.iterdir() if p.suffix.lower() in (".png", ".jpg", ".jpeg")
    )
    for image_path in image_paths:
        mask_path = masks_dir / f"{image_path.stem}.png"
        if not mask_path.is_file():
            raise MissingMaskForImage(f"no mask raster for {image_path.name}")
        pixels = decode_image(image_path)
        try:
            raster = np.asarray(Image.open(mask_path))
        except (OSError, UnidentifiedImageError) as exc:
            raise UnreadableRaster(f"cannot read {mask_path}: {exc}") from exc
        if raster.ndim != 2:
            raise UnreadableRaster(
                f"{mask_path} is not a single-channel indexed raster"
            )
        class_masks = [
            (int(class_id), MaskBitmap(raster == class_id))
            for class_id in np.unique(raster)
            if class_id != 0
        ]
        entries.append((image_path.stem, pixels, class_masks))
    return entries
