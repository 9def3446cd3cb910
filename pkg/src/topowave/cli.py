"""Command-line front end.

Subcommands: diagram, mask, loss, denoise, metrics, bench. Structured
output is JSON or CSV with 17-significant-digit reals so runs diff
cleanly. File writes go through a temp-file-plus-rename, so a failed
command never leaves a truncated output behind.

`denoise` runs projected gradient descent directly on the pixels of the
noisy image against the combined wavelet-masked loss, with backtracking
step halving so the loss trace is non-increasing.
"""

from __future__ import annotations

import argparse
import io
import sys
from dataclasses import dataclass, field

import numpy as np

from . import bench as bench_mod
from . import metrics as metrics_mod
from .complexes import ComplexKind, build_complex
from .errors import TopowaveError
from .imagecore import ImageGrid, atomic_write_text, load_image, save_image
from .loss import (
    LossConfig,
    prepare_reference,
    report_to_json,
    wvcomb_from_reference,
)
from .persistence import (
    diagram_to_json,
    fmt_real,
    merge_diagrams,
    persistence_h0,
    persistence_h1,
)
from .wavelet import texture_mask

MAX_ITERATIONS = 100000
MAX_HALVINGS = 20


@dataclass(frozen=True)
class DenoiseConfig:
    step_size: float = 0.05
    iterations: int = 200
    loss: LossConfig = field(default_factory=LossConfig)
    seed: int = 0

    def __post_init__(self):
        if not (self.step_size > 0 and np.isfinite(self.step_size)):
            raise ValueError(f"step_size must be finite and > 0, got {self.step_size}")
        if not 0 <= self.iterations <= MAX_ITERATIONS:
            raise ValueError(
                f"iterations must be in [0, {MAX_ITERATIONS}], got {self.iterations}"
            )


def denoise_descent(noisy: ImageGrid, clean: ImageGrid, cfg: DenoiseConfig):
    """Projected descent on pixels: x <- clamp(x - step * grad), with up
    to 20 step halvings per iteration whenever the loss would increase.

    Returns (final image, per-iteration loss trace). The trace has
    iterations+1 entries and is non-increasing by construction.
    """
    ref = prepare_reference(clean, cfg.loss)
    img = noisy
    current = wvcomb_from_reference(img, ref)
    trace = [current.total]
    for _ in range(cfg.iterations):
        step = cfg.step_size
        for _ in range(MAX_HALVINGS + 1):
            candidate = ImageGrid(np.clip(img.pixels - step * current.gradient, 0.0, 1.0))
            report = wvcomb_from_reference(candidate, ref)
            if report.total <= current.total:
                img, current = candidate, report
                break
            step *= 0.5
        trace.append(current.total)
    return img, trace


# ---------------------------------------------------------------------------
# argument plumbing

def _parse_dims(text: str) -> tuple:
    return {"0": (0,), "1": (1,), "01": (0, 1)}[text]


def _parse_kind(text: str) -> ComplexKind:
    return {"vr": ComplexKind.VIETORIS_RIPS_GRID,
            "cubical": ComplexKind.CUBICAL}[text]


def _loss_config(args) -> LossConfig:
    return LossConfig(alpha=args.alpha, p_base=args.p_base,
                      dims=_parse_dims(args.dims),
                      complex_kind=_parse_kind(args.complex))


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--complex", choices=("vr", "cubical"), default="vr",
                        help="complex kind (default: vr)")
    shared.add_argument("--dims", choices=("0", "1", "01"), default="01",
                        help="homology dimensions (default: 01)")
    shared.add_argument("--alpha", type=float, default=0.004,
                        help="topological term gain (default: 0.004)")
    shared.add_argument("--p-base", type=int, choices=(1, 2), default=1,
                        help="base loss exponent (default: 1)")
    shared.add_argument("--seed", type=int, default=0, help="RNG seed")
    shared.add_argument("--format", choices=("pgm", "png"), default=None,
                        help="image format for outputs (default: from extension)")

    parser = argparse.ArgumentParser(
        prog="topowave",
        description="Topological image losses with wavelet texture masks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("diagram", parents=[shared],
                       help="persistence diagram of an image as JSON")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True, help="JSON output path")

    p = sub.add_parser("mask", parents=[shared],
                       help="texture mask of an image as a weight image")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True, help="mask image output path")

    p = sub.add_parser("loss", parents=[shared],
                       help="combined loss of an (output, reference) pair")
    p.add_argument("output_image")
    p.add_argument("clean_image")

    p = sub.add_parser("denoise", parents=[shared],
                       help="pixel-space gradient descent against the combined loss")
    p.add_argument("noisy")
    p.add_argument("clean")
    p.add_argument("-o", "--output", required=True, help="denoised image output path")
    p.add_argument("--step-size", type=float, default=0.05)
    p.add_argument("--iterations", type=int, default=200)
    p.add_argument("--trace", default=None,
                   help="loss trace CSV path (default: <output>.trace.csv)")

    p = sub.add_parser("metrics", parents=[shared], help="PSNR and SSIM of a pair")
    p.add_argument("image_a")
    p.add_argument("image_b")

    p = sub.add_parser("bench", parents=[shared],
                       help="persistence timing ladder; writes CSV + gnuplot script")
    p.add_argument("--sizes", default=",".join(str(s) for s in bench_mod.DEFAULT_SIZES),
                   help="comma-separated patch sizes")
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--csv", default="bench.csv")
    p.add_argument("--plot", default="bench.gnuplot")

    return parser


# ---------------------------------------------------------------------------
# subcommand handlers

def cmd_diagram(args) -> int:
    img = load_image(args.input, args.format)
    cx = build_complex(img, _parse_kind(args.complex))
    parts = []
    for d in _parse_dims(args.dims):
        parts.append(persistence_h0(cx) if d == 0 else persistence_h1(cx))
    atomic_write_text(args.output, diagram_to_json(merge_diagrams(*parts)) + "\n")
    return 0


def _output_bits(path, fmt) -> int:
    """PGM outputs keep 16-bit precision; PNG is 8-bit by contract."""
    name = str(path).lower()
    if fmt == "pgm" or (fmt is None and (name.endswith(".pgm") or name.endswith(".pnm"))):
        return 16
    return 8


def cmd_mask(args) -> int:
    img = load_image(args.input, args.format)
    save_image(texture_mask(img).weights, args.output, args.format,
               bits=_output_bits(args.output, args.format))
    return 0


def cmd_loss(args) -> int:
    out_img = load_image(args.output_image, args.format)
    clean_img = load_image(args.clean_image, args.format)
    report = wvcomb_from_reference(out_img, prepare_reference(clean_img, _loss_config(args)))
    print(report_to_json(report))
    return 0


def cmd_denoise(args) -> int:
    noisy = load_image(args.noisy, args.format)
    clean = load_image(args.clean, args.format)
    cfg = DenoiseConfig(step_size=args.step_size, iterations=args.iterations,
                        loss=_loss_config(args), seed=args.seed)
    result, trace = denoise_descent(noisy, clean, cfg)
    save_image(result, args.output, args.format,
               bits=_output_bits(args.output, args.format))
    trace_path = args.trace or (str(args.output) + ".trace.csv")
    buf = io.StringIO()
    buf.write("iteration,loss\r\n")
    for i, value in enumerate(trace):
        buf.write(f"{i},{fmt_real(value)}\r\n")
    atomic_write_text(trace_path, buf.getvalue())
    return 0


def cmd_metrics(args) -> int:
    a = load_image(args.image_a, args.format)
    b = load_image(args.image_b, args.format)
    print(metrics_mod.report_to_json(metrics_mod.metric_report(a, b)))
    return 0


def cmd_bench(args) -> int:
    sizes = [int(tok) for tok in args.sizes.split(",") if tok]
    rows = bench_mod.run_bench(sizes, args.reps, args.seed)
    bench_mod.bench_to_csv(rows, args.csv)
    bench_mod.emit_plot_script(args.csv, args.plot)
    return 0


_HANDLERS = {
    "diagram": cmd_diagram,
    "mask": cmd_mask,
    "loss": cmd_loss,
    "denoise": cmd_denoise,
    "metrics": cmd_metrics,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except (TopowaveError, OSError, ValueError) as exc:
        print(f"topowave {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
