"""Command-line entry points: the evaluation harness and the HTTP server."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .backends import BackendId, BackendKind
from .errors import MealsegError


@click.group()
def main():
    """Promptable food-image segmentation and annotation toolkit."""


def _parse_clicks(spec: str) -> tuple[int, int]:
    spec = spec.replace("..", "-")
    if "-" in spec:
        lo, hi = spec.split("-", 1)
        return int(lo), int(hi)
    value = int(spec)
    return value, value


@main.command("eval")
@click.option("--backend", "backend_kind", default="regiongrow",
              type=click.Choice([k.value for k in BackendKind]), show_default=True)
@click.option("--encoder", type=click.Path(), default=None, help="Exported encoder graph.")
@click.option("--decoder", type=click.Path(), default=None, help="Exported decoder graph.")
@click.option("--images", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--masks", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--clicks", default="1..5", show_default=True, help="Click range, e.g. 1..5.")
@click.option("--runs", default=3, show_default=True, type=int)
@click.option("--seeds", default="1,2,3", show_default=True, help="Comma-separated run seeds.")
@click.option("--threshold", default=0.5, show_default=True, type=float)
@click.option("--out", "out_path", required=True, type=click.Path(),
              help="Machine-readable report destination (JSON).")
@click.option("--latency-reps", default=0, type=int,
              help="If > 0, also measure warm decode latency and write a sidecar.")
@click.option("--figure/--no-figure", default=True, show_default=True,
              help="Render the clicks-vs-IoU curve next to the report.")
def eval_command(backend_kind, encoder, decoder, images, masks, clicks, runs, seeds,
                 threshold, out_path, latency_reps, figure):
    """Run the click-count-vs-IoU sweep and write report, CSV and figure."""
    from . import evalharness
    from .persistence import load_eval_dataset

    try:
        clicks_min, clicks_max = _parse_clicks(clicks)
        seed_list = tuple(int(s) for s in seeds.split(",") if s.strip())
        if runs != len(seed_list):
            raise click.ClickException(
                f"--runs {runs} does not match {len(seed_list)} seeds"
            )
        cfg = evalharness.EvalConfig(
            backend=BackendId(
                kind=BackendKind(backend_kind),
                encoder_path=Path(encoder) if encoder else None,
                decoder_path=Path(decoder) if decoder else None,
            ),
            images_dir=images,
            masks_dir=masks,
            clicks_min=clicks_min,
            clicks_max=clicks_max,
            seeds=seed_list,
            iou_threshold=threshold,
        )
        dataset = load_eval_dataset(images, masks)
        report = evalharness.run_eval(cfg, dataset=dataset)
    except (MealsegError, ValueError) as exc:
        raise click.ClickException(str(exc))

    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(evalharness.emit_report(report, fmt="machine"), encoding="utf-8")
    evalharness.write_csv(report, out.with_suffix(".csv"))
    if figure:
        evalharness.plot_iou_curve(report, out.with_suffix(".png"))
    if latency_reps > 0 and report.latency:
        sidecar = out.with_name(out.stem + ".latency.json")
        sidecar.write_text(
            json.dumps(report.latency, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    click.echo(evalharness.emit_report(report, fmt="table"), nl=False)
    click.echo(f"report written to {out}")


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--manifest", type=click.Path(exists=True), default=None,
              help="JSON manifest mapping backend kinds to encoder/decoder paths.")
@click.option("--categories", type=click.Path(exists=True), default=None,
              help="Default category file (one name per line).")
@click.option("--output-root", default="./annotations", show_default=True, type=click.Path())
@click.option("--max-upload-mb", default=32, show_default=True, type=int)
@click.option("--session-ttl", default=3600, show_default=True, type=int)
def serve_command(host, port, manifest, categories, output_root, max_upload_mb, session_ttl):
    """Start the annotation HTTP service."""
    import uvicorn

    from .service import ServiceConfig, create_app

    model_manifest = {}
    if manifest:
        model_manifest = json.loads(Path(manifest).read_text(encoding="utf-8"))
    Path(output_root).mkdir(parents=True, exist_ok=True)
    config = ServiceConfig(
        model_manifest=model_manifest,
        category_file=categories,
        output_root=output_root,
        max_upload_bytes=max_upload_mb * 1024 * 1024,
        session_ttl_seconds=float(session_ttl),
    )
    uvicorn.run(create_app(config), host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
