"""HTTP facade over the annotation session machinery.

Sessions are in-memory with idle eviction; requests targeting the same
session are serialized through a per-session lock, distinct sessions run
in parallel. Masks travel over the wire in the canonical RLE form.
"""

from __future__ import annotations

import io
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, File, Form, Request, UploadFile
from fastapi.responses import JSONResponse, Response
from PIL import Image

from . import __version__
from .backends import BackendHandle, BackendId, BackendKind, Polarity, PromptPoint, load_backend
from .categories import CategoryRegistry, CategorySource
from .errors import MealsegError
from .persistence import decode_image, load_category_file, rle_encode, save_project
from .session import BrushMode, Quantity, Session, Unit, create_session

DEFAULT_MAX_UPLOAD = 32 * 1024 * 1024
DEFAULT_SESSION_TTL = 3600.0

# stable error-code -> HTTP status table (frozen; covered by tests)
ERROR_STATUS = {
    "out_of_bounds": 422,
    "empty_prompt": 422,
    "empty_mask": 422,
    "unknown_category": 422,
    "invalid_quantity": 422,
    "empty_name": 422,
    "duplicate_category": 409,
    "unsupported_exclude_point": 409,
    "nothing_to_undo": 409,
    "no_pending_mask": 409,
    "unknown_item": 404,
    "oversize_image": 413,
    "missing_model": 500,
    "corrupt_model": 500,
    "runtime_failure": 500,
    "io_failure": 500,
    "internal": 500,
}


@dataclass
class ServiceConfig:
    model_manifest: dict = field(default_factory=dict)  # kind value -> {encoder, decoder}
    category_file: Optional[str] = None
    output_root: str = "."
    max_upload_bytes: int = DEFAULT_MAX_UPLOAD
    session_ttl_seconds: float = DEFAULT_SESSION_TTL
    region_grow_tolerance: int = 12

    def backend_id(self, kind: BackendKind) -> BackendId:
        paths = self.model_manifest.get(kind.value, {})
        return BackendId(
            kind=kind,
            encoder_path=Path(paths["encoder"]) if "encoder" in paths else None,
            decoder_path=Path(paths["decoder"]) if "decoder" in paths else None,
        )

    def kind_configured(self, kind: BackendKind) -> bool:
        if kind is BackendKind.REGION_GROW:
            return True
        paths = self.model_manifest.get(kind.value, {})
        return all(
            key in paths and Path(paths[key]).is_file() for key in ("encoder", "decoder")
        )


class _SessionEntry:
    def __init__(self, session: Session, fallback: bool):
        self.session = session
        self.fallback = fallback
        self.lock = threading.Lock()
        self.last_access = time.monotonic()
        self.created_wall = time.time()


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message


def _from_core(exc: MealsegError) -> ApiError:
    code = getattr(exc, "code", "internal")
    return ApiError(ERROR_STATUS.get(code, 500), code, str(exc))


def _point_wire(p: PromptPoint) -> list:
    return [p.x, p.y, p.polarity.value]


def _mask_wire(mask) -> dict:
    rle = rle_encode(mask)
    return {"width": rle.width, "height": rle.height, "runs": list(rle.runs)}


def _item_wire(session: Session, item) -> dict:
    category = session.registry.get(item.category_id)
    return {
        "item_id": item.item_id,
        "category_id": item.category_id,
        "category_name": category.name,
        "color": list(category.color),
        "quantity": (
            {"value": item.quantity.value, "unit": item.quantity.unit.value}
            if item.quantity
            else None
        ),
        "mask": _mask_wire(item.mask),
    }


def _registry_wire(registry: CategoryRegistry) -> list:
    return [
        {"id": c.id, "name": c.name, "color": list(c.color), "source": c.source.value}
        for c in registry.entries
    ]


def create_app(config: Optional[ServiceConfig] = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="mealseg annotation service", version=__version__)
    sessions: dict[str, _SessionEntry] = {}
    evicted: set[str] = set()
    handles: dict[BackendKind, BackendHandle] = {}
    registry_lock = threading.Lock()

    default_registry_names = []
    if config.category_file:
        default_registry_names = [
            c.name for c in load_category_file(config.category_file).entries
        ]

    def _default_registry() -> CategoryRegistry:
        return CategoryRegistry.from_names(default_registry_names, source=CategorySource.FILE)

    def _get_handle(kind: BackendKind) -> BackendHandle:
        with registry_lock:
            if kind not in handles:
                if kind is BackendKind.REGION_GROW:
                    handles[kind] = load_backend(
                        config.backend_id(kind), tolerance=config.region_grow_tolerance
                    )
                else:
                    handles[kind] = load_backend(config.backend_id(kind))
            return handles[kind]

    def _entry(session_id: str) -> _SessionEntry:
        entry = sessions.get(session_id)
        if entry is None:
            if session_id in evicted:
                raise ApiError(410, "session_evicted", "session evicted after idle timeout")
            raise ApiError(404, "unknown_session", f"no session {session_id}")
        now = time.monotonic()
        if now - entry.last_access > config.session_ttl_seconds:
            del sessions[session_id]
            evicted.add(session_id)
            raise ApiError(410, "session_evicted", "session evicted after idle timeout")
        entry.last_access = now
        return entry

    @app.exception_handler(ApiError)
    async def _api_error_handler(_request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"code": exc.code, "message": exc.message},
        )

    @app.exception_handler(MealsegError)
    async def _core_error_handler(_request: Request, exc: MealsegError):
        mapped = _from_core(exc)
        return JSONResponse(
            status_code=mapped.status,
            content={"code": mapped.code, "message": mapped.message},
        )

    # -- lifecycle ----------------------------------------------------
    @app.post("/sessions")
    async def create_session_endpoint(
        image: UploadFile = File(...),
        backend: Optional[str] = Form(None),
        categories: Optional[UploadFile] = File(None),
    ):
        payload = await image.read()
        if len(payload) > config.max_upload_bytes:
            raise ApiError(413, "payload_too_large", "image exceeds upload limit")
        try:
            pixels = decode_image(io.BytesIO(payload))
        except Exception:
            raise ApiError(422, "undecodable_image", "image payload does not decode")

        if categories is not None:
            text = (await categories.read()).decode("utf-8", errors="replace")
            names = [line.strip() for line in text.splitlines() if line.strip()]
            try:
                registry = CategoryRegistry.from_names(names, source=CategorySource.FILE)
            except MealsegError as exc:
                raise _from_core(exc)
        else:
            registry = _default_registry()

        fallback = False
        if backend:
            try:
                kind = BackendKind(backend)
            except ValueError:
                raise ApiError(422, "unknown_backend", f"unknown backend kind {backend!r}")
        elif config.kind_configured(BackendKind.MEAL_SAM):
            kind = BackendKind.MEAL_SAM
        else:
            kind = BackendKind.REGION_GROW
            fallback = True

        try:
            handle = _get_handle(kind)
        except MealsegError as exc:
            raise _from_core(exc)
        session = create_session(
            pixels,
            backend=config.backend_id(kind),
            registry=registry,
            source_filename=image.filename or "",
            handle=handle,
        )
        sessions[session.session_id] = _SessionEntry(session, fallback)
        return {
            "session_id": session.session_id,
            "width": session.width,
            "height": session.height,
            "backend": kind.value,
            "fallback_backend": fallback,
            "categories": _registry_wire(registry),
        }

    @app.get("/sessions/{session_id}")
    def snapshot(session_id: str):
        entry = _entry(session_id)
        with entry.lock:
            s = entry.session
            return {
                "session_id": s.session_id,
                "width": s.width,
                "height": s.height,
                "backend": s.backend.kind.value,
                "points": [_point_wire(p) for p in s.pending_points],
                "pending_mask": _mask_wire(s.pending_mask) if s.pending_mask else None,
                "items": [_item_wire(s, item) for item in s.items],
                "categories": _registry_wire(s.registry),
            }

    # -- pending-item edits -------------------------------------------
    @app.post("/sessions/{session_id}/points")
    def add_point(session_id: str, body: dict):
        entry = _entry(session_id)
        with entry.lock:
            try:
                polarity = Polarity(body.get("polarity", "include"))
                point = PromptPoint(x=int(body["x"]), y=int(body["y"]), polarity=polarity)
            except (KeyError, TypeError, ValueError):
                raise ApiError(422, "bad_request", "expected {x, y, polarity}")
            try:
                entry.session.add_point(point)
            except MealsegError as exc:
                raise _from_core(exc)
            return {"points": [_point_wire(p) for p in entry.session.pending_points]}

    @app.post("/sessions/{session_id}/undo")
    def undo(session_id: str):
        entry = _entry(session_id)
        with entry.lock:
            try:
                entry.session.undo_last()
            except MealsegError as exc:
                raise _from_core(exc)
            s = entry.session
            return {
                "points": [_point_wire(p) for p in s.pending_points],
                "pending_mask": _mask_wire(s.pending_mask) if s.pending_mask else None,
            }

    @app.post("/sessions/{session_id}/clear")
    def clear(session_id: str):
        entry = _entry(session_id)
        with entry.lock:
            entry.session.clear_points()
            return {"points": []}

    @app.post("/sessions/{session_id}/segment")
    def segment(session_id: str):
        entry = _entry(session_id)
        with entry.lock:
            try:
                prediction = entry.session.semi_segment()
            except MealsegError as exc:
                raise _from_core(exc)
            return {
                "mask": _mask_wire(prediction.mask),
                "score": prediction.score,
                "latency_ms": prediction.latency_ms,
            }

    @app.post("/sessions/{session_id}/brush")
    def brush(session_id: str, body: dict):
        entry = _entry(session_id)
        with entry.lock:
            try:
                path = [(int(x), int(y)) for x, y in body["path"]]
                radius = int(body.get("radius", 4))
                mode = BrushMode(body.get("mode", "add"))
            except (KeyError, TypeError, ValueError):
                raise ApiError(422, "bad_request", "expected {path, radius, mode}")
            try:
                entry.session.brush_stroke(path, radius, mode)
            except MealsegError as exc:
                raise _from_core(exc)
            return {"mask": _mask_wire(entry.session.pending_mask)}

    # -- items ---------------------------------------------------------
    @app.post("/sessions/{session_id}/items")
    def commit_item(session_id: str, body: dict):
        entry = _entry(session_id)
        with entry.lock:
            s = entry.session
            try:
                if body.get("new_category_name"):
                    category_id = s.registry.add(
                        body["new_category_name"], source=CategorySource.USER_ADDED
                    )
                elif "category_id" in body:
                    category_id = int(body["category_id"])
                else:
                    raise ApiError(
                        422, "bad_request", "need category_id or new_category_name"
                    )
                quantity = None
                if body.get("quantity"):
                    q = body["quantity"]
                    quantity = Quantity(value=float(q["value"]), unit=Unit(q["unit"]))
                item = s.validate_item(category_id, quantity)
            except MealsegError as exc:
                raise _from_core(exc)
            except (KeyError, TypeError, ValueError):
                raise ApiError(422, "bad_request", "malformed item payload")
            return _item_wire(s, item)

    @app.delete("/sessions/{session_id}/items/{item_id}")
    def delete_item(session_id: str, item_id: int):
        entry = _entry(session_id)
        with entry.lock:
            try:
                entry.session.delete_item(item_id)
            except MealsegError as exc:
                raise _from_core(exc)
            return {"items": [_item_wire(entry.session, it) for it in entry.session.items]}

    # -- rendering and saving -----------------------------------------
    @app.get("/sessions/{session_id}/overlay")
    def overlay(session_id: str, pending: bool = False):
        entry = _entry(session_id)
        with entry.lock:
            pixels = entry.session.composite_overlay(include_pending=pending)
        buf = io.BytesIO()
        Image.fromarray(pixels).save(buf, format="PNG")
        return Response(content=buf.getvalue(), media_type="image/png")

    @app.post("/sessions/{session_id}/save")
    def save(session_id: str, body: dict):
        entry = _entry(session_id)
        with entry.lock:
            out_dir = body.get("output_dir", "")
            root = Path(config.output_root).resolve()
            target = (root / out_dir).resolve()
            if root != target and root not in target.parents:
                raise ApiError(403, "path_outside_root", "output_dir escapes output root")
            try:
                result = save_project(entry.session, target)
            except MealsegError as exc:
                raise _from_core(exc)
            return {
                "paths": {k: v for k, v in result.items() if k != "total_annotation_seconds"},
                "total_annotation_seconds": result["total_annotation_seconds"],
            }

    # -- discovery -----------------------------------------------------
    @app.get("/categories")
    def categories_endpoint(session_id: Optional[str] = None):
        if session_id:
            entry = _entry(session_id)
            with entry.lock:
                return {"categories": _registry_wire(entry.session.registry)}
        return {"categories": _registry_wire(_default_registry())}

    @app.get("/backends")
    def backends_endpoint():
        return {
            "backends": [
                {
                    "kind": kind.value,
                    "loadable": config.kind_configured(kind),
                    "supports_background_points": kind.supports_background_points,
                }
                for kind in BackendKind
            ]
        }

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "version": __version__}

    app.state.config = config
    app.state.sessions = sessions
    return app
