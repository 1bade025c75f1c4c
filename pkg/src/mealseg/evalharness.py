"""Click-count-vs-IoU evaluation harness.

For each run seed, points are sampled once per ground-truth mask (up to
the maximum click count) with a portable seeded generator, then the
backend is queried with growing prefixes of that list so the curve
reflects adding one click at a time. Reports are byte-deterministic for
a fixed (config, dataset, backend); wall-clock latency is kept out of
the canonical document for that reason and reported separately.
"""

from __future__ import annotations

import hashlib
import json
import statistics
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .backends import BackendHandle, BackendId, Polarity, PromptPoint
from .errors import DimensionMismatch, EmptyGroundTruth, MealsegError
from .mask import MaskBitmap
from .persistence import load_eval_dataset


def iou(a: MaskBitmap, b: MaskBitmap) -> float:
    """Intersection over union of two binary masks; 1.0 when both empty."""
    if (a.width, a.height) != (b.width, b.height):
        raise DimensionMismatch(
            f"mask dimensions differ: {a.width}x{a.height} vs {b.width}x{b.height}"
        )
    union = int(np.logical_or(a.data, b.data).sum())
    if union == 0:
        return 1.0
    inter = int(np.logical_and(a.data, b.data).sum())
    return inter / union


def sample_points(gt: MaskBitmap, n: int, seed: int) -> list[PromptPoint]:
    """Draw up to n distinct foreground pixels, uniformly, reproducibly.

    Partial Fisher-Yates over the row-major list of foreground pixels,
    driven by PCG64, so the list for n is always a prefix of the list
    for n+1 at the same seed.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    flat = np.flatnonzero(gt.data.ravel())
    if flat.size == 0:
        raise EmptyGroundTruth("ground-truth mask has no foreground pixels")
    k = min(n, flat.size)
    rng = np.random.Generator(np.random.PCG64(seed))
    pool = flat.copy()
    for i in range(k):
        j = i + int(rng.integers(0, pool.size - i))
        pool[i], pool[j] = pool[j], pool[i]
    width = gt.width
    return [
        PromptPoint(x=int(p % width), y=int(p // width), polarity=Polarity.INCLUDE)
        for p in pool[:k]
    ]


@dataclass(frozen=True)
class EvalConfig:
    backend: BackendId
    images_dir: str = ""
    masks_dir: str = ""
    clicks_min: int = 1
    clicks_max: int = 5
    seeds: tuple[int, ...] = (1, 2, 3)
    iou_threshold: float = 0.5

    def __post_init__(self):
        if not (1 <= self.clicks_min <= self.clicks_max):
            raise ValueError("need 1 <= clicks_min <= clicks_max")
        if not self.seeds:
            raise ValueError("at least one run seed is required")
        if not (0.0 < self.iou_threshold < 1.0):
            raise ValueError("iou_threshold must be in (0, 1)")

    @property
    def runs(self) -> int:
        return len(self.seeds)


@dataclass
class EvalReport:
    per_run_k: list[dict]
    per_k: list[dict]
    provenance: dict
    latency: Optional[dict] = field(default=None, compare=False)

    def to_dict(self, include_latency: bool = False) -> dict:
        doc = {
            "per_run_k": self.per_run_k,
            "per_k": self.per_k,
            "provenance": self.provenance,
        }
        if include_latency:
            doc["latency"] = self.latency
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "EvalReport":
        return cls(
            per_run_k=doc["per_run_k"],
            per_k=doc["per_k"],
            provenance=doc["provenance"],
            latency=doc.get("latency"),
        )


def mask_seed(run_seed: int, image_name: str, class_id: int) -> int:
    """Stable per-mask sampling seed derived from the run seed."""
    digest = hashlib.sha256(f"{run_seed}:{image_name}:{class_id}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def dataset_digest(dataset) -> str:
    h = hashlib.sha256()
    for name, _pixels, class_masks in dataset:
        h.update(name.encode())
        for class_id, gt in class_masks:
            h.update(f":{class_id}:{gt.digest()}".encode())
    return h.hexdigest()


PredictFn = Callable[[np.ndarray, MaskBitmap, list[PromptPoint]], MaskBitmap]


def run_eval(
    cfg: EvalConfig,
    handle: Optional[BackendHandle] = None,
    dataset=None,
    predict_fn: Optional[PredictFn] = None,
) -> EvalReport:
    """Sweep click counts over the dataset and aggregate IoU statistics.

    ``predict_fn(image, gt, prompts) -> MaskBitmap`` replaces the backend
    when given (used for calibration stubs); otherwise ``handle`` is used,
    loaded from the config if absent.
    """
    if dataset is None:
        dataset = load_eval_dataset(cfg.images_dir, cfg.masks_dir)
    if predict_fn is None and handle is None:
        from .backends import load_backend

        handle = load_backend(cfg.backend)

    ks = list(range(cfg.clicks_min, cfg.clicks_max + 1))
    per_run_k = []
    latencies: list[float] = []
    for run_index, run_seed in enumerate(cfg.seeds):
        scores: dict[int, list[float]] = {k: [] for k in ks}
        errors: dict[int, int] = {k: 0 for k in ks}
        for name, pixels, class_masks in dataset:
            embedding = handle.embed_image(pixels) if handle is not None else None
            for class_id, gt in class_masks:
                points = sample_points(gt, cfg.clicks_max, mask_seed(run_seed, name, class_id))
                for k in ks:
                    prefix = points[:k]
                    try:
                        if predict_fn is not None:
                            start = time.perf_counter()
                            predicted = predict_fn(pixels, gt, prefix)
                            latencies.append((time.perf_counter() - start) * 1000.0)
                        else:
                            prediction = handle.predict_mask(embedding, prefix)
                            predicted = prediction.mask
                            latencies.append(prediction.latency_ms)
                        scores[k].append(iou(gt, predicted))
                    except MealsegError:
                        # keep denominators stable: a failed mask scores 0
                        scores[k].append(0.0)
                        errors[k] += 1
        for k in ks:
            vals = scores[k]
            per_run_k.append(
                {
                    "run": run_index,
                    "seed": run_seed,
                    "k": k,
                    "mask_count": len(vals),
                    "mean_iou": statistics.fmean(vals) if vals else 0.0,
                    "success_rate": (
                        sum(v >= cfg.iou_threshold for v in vals) / len(vals) if vals else 0.0
                    ),
                    "error_count": errors[k],
                }
            )

    per_k = []
    for k in ks:
        rows = [r for r in per_run_k if r["k"] == k]
        per_k.append(
            {
                "k": k,
                "mean_iou": statistics.fmean(r["mean_iou"] for r in rows),
                "success_rate": statistics.fmean(r["success_rate"] for r in rows),
            }
        )

    backend_kind = cfg.backend.kind.value if predict_fn is None else "stub"
    report = EvalReport(
        per_run_k=per_run_k,
        per_k=per_k,
        provenance={
            "backend": backend_kind,
            "clicks_min": cfg.clicks_min,
            "clicks_max": cfg.clicks_max,
            "runs": cfg.runs,
            "seeds": list(cfg.seeds),
            "iou_threshold": cfg.iou_threshold,
            "dataset_digest": dataset_digest(dataset),
            "mask_total": sum(len(m) for _, _, m in dataset),
        },
        latency=(
            {
                "mean_ms": statistics.fmean(latencies),
                "median_ms": statistics.median(latencies),
                "samples": len(latencies),
            }
            if latencies
            else None
        ),
    )
    return report


def measure_latency(
    handle: BackendHandle,
    image: np.ndarray,
    prompts: list[PromptPoint],
    repetitions: int,
) -> tuple[float, float]:
    """Warm-embedding decode-step latency: (mean_ms, median_ms)."""
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    embedding = handle.embed_image(image)  # warm the cache; embed time excluded
    samples = [
        handle.predict_mask(embedding, prompts).latency_ms for _ in range(repetitions)
    ]
    return statistics.fmean(samples), statistics.median(samples)


# ---------------------------------------------------------------------------
# Report emission
# ---------------------------------------------------------------------------

def emit_report(report: EvalReport, fmt: str = "table", include_latency: bool = False) -> str:
    if fmt == "machine":
        return json.dumps(report.to_dict(include_latency), indent=2, sort_keys=True) + "\n"
    if fmt != "table":
        raise ValueError(f"unknown report format {fmt!r}")
    lines = [f"{'clicks':>6}  {'mean IoU':>9}  {'success':>8}"]
    for row in report.per_k:
        lines.append(f"{row['k']:>6}  {row['mean_iou']:>9.4f}  {row['success_rate']:>8.4f}")
    if include_latency and report.latency:
        lines.append(
            f"latency: mean {report.latency['mean_ms']:.2f} ms, "
            f"median {report.latency['median_ms']:.2f} ms "
            f"({report.latency['samples']} samples)"
        )
    return "\n".join(lines) + "\n"


def write_csv(report: EvalReport, path) -> None:
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["k", "run", "seed", "mean_iou", "success_rate", "mask_count", "error_count"]
        )
        for row in report.per_run_k:
            writer.writerow(
                [
                    row["k"],
                    row["run"],
                    row["seed"],
                    repr(row["mean_iou"]),
                    repr(row["success_rate"]),
                    row["mask_count"],
                    row["error_count"],
                ]
            )
        for row in report.per_k:
            writer.writerow(
                [row["k"], "all", "", repr(row["mean_iou"]), repr(row["success_rate"]), "", ""]
            )


def plot_iou_curve(report: EvalReport, path) -> None:
    """Render mean IoU and success rate as a function of click count."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ks = [row["k"] for row in report.per_k]
    mean_iou = [row["mean_iou"] for row in report.per_k]
    success = [row["success_rate"] for row in report.per_k]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ks, mean_iou, marker="o", label="mean IoU")
    ax.plot(ks, success, marker="s", label=f"success (IoU >= {report.provenance['iou_threshold']})")
    ax.set_xlabel("number of clicks")
    ax.set_ylabel("score")
    ax.set_xticks(ks)
    ax.set_ylim(0.0, 1.05)
    ax.grid(True, alpha=0.3)
    ax.legend()
    ax.set_title(f"backend: {report.provenance['backend']}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
