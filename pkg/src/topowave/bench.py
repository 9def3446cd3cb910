"""Timing harness comparing persistence over the two complex kinds.

Each configuration (grid-clique H0 only, grid-clique H0+H1, cubical
H0+H1) is timed on a seeded random image per patch size; the reported
wall time is the median of the repetitions after one discarded warm-up
run, and covers complex construction plus persistence computation.
Configurations run strictly sequentially so timings do not contaminate
each other.
"""

from __future__ import annotations

import csv
import io
import os
import time
from dataclasses import dataclass

import numpy as np

from .complexes import ComplexKind, build_cubical, build_vr_grid
from .imagecore import ImageGrid, atomic_write_text
from .persistence import fmt_real, persistence_h0, persistence_h1

DEFAULT_SIZES = (32, 64, 128, 256, 512)
CSV_COMMENT = ("# wall_time_seconds covers complex construction plus "
               "persistence reduction; median over repetitions, one "
               "discarded warm-up run")
CSV_HEADER = ["complex_kind", "dim", "patch_size", "wall_time_seconds", "repetitions"]


@dataclass(frozen=True)
class BenchRow:
    complex_kind: ComplexKind
    dim: str  # "0" or "both"
    patch_size: int
    wall_time_seconds: float
    repetitions: int


def _vr_h0(img):
    persistence_h0(build_vr_grid(img))


def _vr_both(img):
    cx = build_vr_grid(img)
    persistence_h0(cx)
    persistence_h1(cx)


def _cubical_both(img):
    cx = build_cubical(img)
    persistence_h0(cx)
    persistence_h1(cx)


_CONFIGS = (
    (ComplexKind.VIETORIS_RIPS_GRID, "0", _vr_h0),
    (ComplexKind.VIETORIS_RIPS_GRID, "both", _vr_both),
    (ComplexKind.CUBICAL, "both", _cubical_both),
)


def _median(values) -> float:
    ordered = sorted(values)
    mid = len(ordered) // 2
    if len(ordered) % 2:
        return ordered[mid]
    return 0.5 * (ordered[mid - 1] + ordered[mid])


def run_bench(sizes=DEFAULT_SIZES, reps: int = 3, seed: int = 0) -> list:
    """Median wall times for every (configuration, size) pair.

    Row content (kinds, dims, sizes, repetitions) is deterministic for a
    fixed configuration; only the measured times vary.
    """
    sizes = list(sizes)
    if not sizes:
        raise ValueError("sizes must be nonempty")
    if any(s < 8 for s in sizes):
        raise ValueError(f"every size must be >= 8, got {sizes}")
    if reps < 3:
        raise ValueError(f"reps must be >= 3, got {reps}")

    rows = []
    for size in sizes:
        rng = np.random.default_rng([seed, size])
        img = ImageGrid(rng.random((size, size)))
        for kind, dim, fn in _CONFIGS:
            fn(img)  # warm-up, discarded
            samples = []
            for _ in range(reps):
                t0 = time.perf_counter()
                fn(img)
                samples.append(time.perf_counter() - t0)
            rows.append(BenchRow(kind, dim, size, _median(samples), reps))
    return rows


def bench_to_csv(rows, path) -> None:
    if not rows:
        raise ValueError("rows must be nonempty")
    buf = io.StringIO()
    buf.write(CSV_COMMENT + "\r\n")
    writer = csv.writer(buf)
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow([r.complex_kind.value, r.dim, r.patch_size,
                         fmt_real(r.wall_time_seconds), r.repetitions])
    atomic_write_text(path, buf.getvalue())


def read_bench_csv(path) -> list:
    """Parse a bench CSV back into BenchRow records."""
    rows = []
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    for rec in reader:
        rows.append(BenchRow(
            ComplexKind(rec["complex_kind"]), rec["dim"],
            int(rec["patch_size"]), float(rec["wall_time_seconds"]),
            int(rec["repetitions"]),
        ))
    return rows


PLOT_TEMPLATE = """\
# gnuplot script: persistence wall time vs patch size
set terminal svg size 760,900 dynamic
set output '{out_svg}'
set datafile separator ','
set datafile commentschars '#'
set multiplot layout 2,1
set logscale xy
set xlabel 'patch size (pixels per side)'
set ylabel 'median wall time (s)'
set key left top
set title 'grid-clique vs cubical persistence'
plot '{csv}' every ::1 using 3:(strcol(1) eq 'VietorisRipsGrid' && strcol(2) eq '0' ? $4 : 1/0) \\
         with linespoints title 'grid clique, H0 only', \\
     '{csv}' every ::1 using 3:(strcol(1) eq 'VietorisRipsGrid' && strcol(2) eq 'both' ? $4 : 1/0) \\
         with linespoints title 'grid clique, H0+H1', \\
     '{csv}' every ::1 using 3:(strcol(1) eq 'Cubical' && strcol(2) eq 'both' ? $4 : 1/0) \\
         with linespoints title 'cubical, H0+H1'
set title 'grid-clique persistence, H0 only'
plot '{csv}' every ::1 using 3:(strcol(1) eq 'VietorisRipsGrid' && strcol(2) eq '0' ? $4 : 1/0) \\
         with linespoints title 'grid clique, H0 only'
unset multiplot
"""


def emit_plot_script(csv_path, out_path) -> None:
    """Write a self-contained gnuplot script rendering the bench CSV."""
    if not os.path.exists(csv_path):
        raise FileNotFoundError(csv_path)
    out_svg = os.path.splitext(str(out_path))[0] + ".svg"
    atomic_write_text(out_path, PLOT_TEMPLATE.format(csv=csv_path, out_svg=out_svg))
