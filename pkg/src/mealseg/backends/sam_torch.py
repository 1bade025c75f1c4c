"""SAM-style model backend consuming exported TorchScript graph pairs.

The encoder graph maps a preprocessed 1x3x1024x1024 float tensor to an
image embedding; the decoder graph maps (embedding, point_coords,
point_labels) to low-resolution mask logits plus per-mask scores. See
the README for export instructions.
"""

from __future__ import annotations

import numpy as np

from ..errors import CorruptModel, RuntimeFailure
from ..mask import MaskBitmap
from .base import BackendHandle, BackendId, ImageEmbedding, Polarity, PromptPoint

ENCODER_INPUT_SIZE = 1024
PIXEL_MEAN = np.array([123.675, 116.28, 103.53], dtype=np.float32)
PIXEL_STD = np.array([58.395, 57.12, 57.375], dtype=np.float32)


def _load_graph(path):
    import torch

    try:
        module = torch.jit.load(str(path), map_location="cpu")
    except Exception as exc:
        raise CorruptModel(f"runtime rejected model file {path}: {exc}") from exc
    module.eval()
    return module


def _resized_shape(width: int, height: int) -> tuple[int, int]:
    """Longest-side-1024 resize, preserving aspect ratio."""
    scale = ENCODER_INPUT_SIZE / max(width, height)
    return max(1, round(width * scale)), max(1, round(height * scale))


class TorchScriptSamHandle(BackendHandle):
    def __init__(self, backend_id: BackendId, **kwargs):
        super().__init__(backend_id, **kwargs)
        self._encoder = _load_graph(backend_id.encoder_path)
        self._decoder = _load_graph(backend_id.decoder_path)

    def _embed(self, pixels: np.ndarray, digest: str) -> ImageEmbedding:
        import torch
        from PIL import Image

        h, w = pixels.shape[:2]
        rw, rh = _resized_shape(w, h)
        resized = np.asarray(
            Image.fromarray(pixels).resize((rw, rh), Image.BILINEAR), dtype=np.float32
        )
        normalized = (resized - PIXEL_MEAN) / PIXEL_STD
        padded = np.zeros((ENCODER_INPUT_SIZE, ENCODER_INPUT_SIZE, 3), dtype=np.float32)
        padded[:rh, :rw] = normalized
        tensor = torch.from_numpy(padded).permute(2, 0, 1).unsqueeze(0)
        try:
            with torch.no_grad():
                embedding = self._encoder(tensor)
        except Exception as exc:
            raise RuntimeFailure(f"encoder execution failed: {exc}") from exc
        return ImageEmbedding(
            backend_kind=self.kind,
            image_digest=digest,
            tensor=embedding.numpy(),
            image_size=(w, h),
            meta={"resized": (rw, rh)},
        )

    def _predict(self, emb: ImageEmbedding, prompts: list[PromptPoint]):
        import torch
        import torch.nn.functional as F

        w, h = emb.image_size
        rw, rh = emb.meta["resized"]
        coords = np.array(
            [[p.x * rw / w, p.y * rh / h] for p in prompts], dtype=np.float32
        )[None]
        labels = np.array(
            [1 if p.polarity is Polarity.INCLUDE else 0 for p in prompts],
            dtype=np.float32,
        )[None]
        try:
            with torch.no_grad():
                logits, scores = self._decoder(
                    torch.from_numpy(emb.tensor),
                    torch.from_numpy(coords),
                    torch.from_numpy(labels),
                )
                # single-mask policy: highest score wins, lowest index on ties
                scores = scores.reshape(-1)
                best = int(torch.argmax(scores))
                score = float(scores[best])
                low_res = logits.reshape(-1, *logits.shape[-2:])[best][None, None]
                full = F.interpolate(
                    low_res,
                    size=(ENCODER_INPUT_SIZE, ENCODER_INPUT_SIZE),
                    mode="bilinear",
                    align_corners=False,
                )[..., :rh, :rw]
                full = F.interpolate(full, size=(h, w), mode="bilinear", align_corners=False)
        except Exception as exc:
            raise RuntimeFailure(f"decoder execution failed: {exc}") from exc
        bitmap = MaskBitmap(full[0, 0].numpy() > 0.0)
        return bitmap, max(0.0, min(1.0, score))
