"""Total persistence, the topological loss and the wavelet-masked
combined loss, all with exact subgradients in output-pixel space.

Total persistence of a diagram is sum((death - birth)^p) with essential
deaths truncated to the maximum filtration value. Because every birth and
death equals the intensity of its critical pixel, the derivative of total
persistence with respect to the image places +p*(death-birth)^(p-1) at
each death pixel and the negation at each birth pixel; this is exact
wherever pixel values are pairwise distinct.

The combined loss weights a pixelwise base loss by (1 - mask) and the
scalar topological loss by the mean mask weight:

    total = mean((1 - M) * base_field) + alpha * mean(M) * L_topo

where M is the texture mask of the reference image, so topology is
emphasized in proportion to how textured the reference is and suppressed
on flat content.
"""

from __future__ import annotations

import concurrent.futures
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .complexes import ComplexKind, build_complex
from .imagecore import ImageGrid, require_same_shape
from .persistence import (
    PersistenceDiagram,
    fmt_real,
    persistence_h0,
    persistence_h1,
)
from .wavelet import texture_mask

THREADS_ENV = "TOPOWAVE_THREADS"


def _worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True)
class LossConfig:
    alpha: float = 0.004
    p_base: int = 1
    p_tpers: int = 1
    dims: tuple = (0, 1)
    complex_kind: ComplexKind = ComplexKind.VIETORIS_RIPS_GRID

    def __post_init__(self):
        if not math.isfinite(self.alpha) or self.alpha < 0:
            raise ValueError(f"alpha must be finite and >= 0, got {self.alpha}")
        if self.p_base not in (1, 2):
            raise ValueError(f"p_base must be 1 or 2, got {self.p_base}")
        if self.p_tpers < 1:
            raise ValueError(f"p_tpers must be >= 1, got {self.p_tpers}")
        dims = tuple(sorted(set(self.dims)))
        if not dims or not set(dims) <= {0, 1}:
            raise ValueError(f"dims must be a nonempty subset of {{0, 1}}, got {self.dims}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "complex_kind", ComplexKind(self.complex_kind))


@dataclass(frozen=True)
class LossReport:
    total: float
    topo_term: float
    base_term: float
    tpers_output: float
    tpers_clean: float
    gradient: np.ndarray

    def __post_init__(self):
        self.gradient.setflags(write=False)


def report_to_json(report: LossReport) -> str:
    keys = ("total", "base_term", "topo_term", "tpers_output", "tpers_clean")
    parts = ['"%s":%s' % (k, fmt_real(getattr(report, k))) for k in keys]
    return "{" + ",".join(parts) + "}"


def total_persistence(pd: PersistenceDiagram, p: int = 1) -> float:
    """Sum of lifespans to the power p (essential pairs included)."""
    return float(sum((pair.death - pair.birth) ** p for pair in pd.pairs))


def tpers_gradient(img: ImageGrid, pd: PersistenceDiagram, p: int = 1) -> np.ndarray:
    """d(total persistence)/d(pixel), via critical-pixel attribution."""
    grad = np.zeros((img.height, img.width), dtype=np.float64)
    for pair in pd.pairs:
        coeff = p * (pair.death - pair.birth) ** (p - 1)
        grad[pair.death_pixel.row, pair.death_pixel.col] += coeff
        grad[pair.birth_pixel.row, pair.birth_pixel.col] -= coeff
    return grad


_DIM_FUNCS = {0: persistence_h0, 1: persistence_h1}


def diagrams_for(img: ImageGrid, cfg: LossConfig) -> dict:
    """Persistence diagrams of `img` for every dimension in cfg.dims."""
    cx = build_complex(img, cfg.complex_kind)
    if _worker_count() >= 2 and len(cfg.dims) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=2) as pool:
            futures = {d: pool.submit(_DIM_FUNCS[d], cx) for d in cfg.dims}
            return {d: f.result() for d, f in futures.items()}
    return {d: _DIM_FUNCS[d](cx) for d in cfg.dims}


def topo_loss(output: ImageGrid, clean: ImageGrid, cfg: LossConfig = LossConfig()):
    """Sum over dimensions of |TPers(output) - TPers(clean)| and its gradient."""
    require_same_shape(output, clean)
    ref_tpers = {d: total_persistence(pd, cfg.p_tpers)
                 for d, pd in diagrams_for(clean, cfg).items()}
    value, grad, _ = _topo_against_reference(output, ref_tpers, cfg)
    return value, grad


def _topo_against_reference(output: ImageGrid, ref_tpers: dict, cfg: LossConfig):
    out_diagrams = diagrams_for(output, cfg)
    value = 0.0
    grad = np.zeros((output.height, output.width), dtype=np.float64)
    for d in cfg.dims:
        delta = total_persistence(out_diagrams[d], cfg.p_tpers) - ref_tpers[d]
        value += abs(delta)
        sign = math.copysign(1.0, delta) if delta != 0 else 0.0
        if sign:
            grad += sign * tpers_gradient(output, out_diagrams[d], cfg.p_tpers)
    return value, grad, out_diagrams


def base_loss_field(output: ImageGrid, clean: ImageGrid, p: int = 1) -> np.ndarray:
    """Per-pixel |o - c| (p=1) or (o - c)^2 (p=2)."""
    require_same_shape(output, clean)
    diff = output.pixels - clean.pixels
    if p == 1:
        return np.abs(diff)
    if p == 2:
        return diff * diff
    raise ValueError(f"p must be 1 or 2, got {p}")


@dataclass(frozen=True)
class LossReference:
    """Precomputed clean-image side of the combined loss.

    Building this once and reusing it across descent iterations avoids
    recomputing the reference diagrams and texture mask each step.
    """
    clean: ImageGrid
    cfg: LossConfig
    mask: np.ndarray
    mask_mean: float
    tpers: dict = field(repr=False)


def prepare_reference(clean: ImageGrid, cfg: LossConfig = LossConfig()) -> LossReference:
    mask = texture_mask(clean).weights.pixels
    tpers = {d: total_persistence(pd, cfg.p_tpers)
             for d, pd in diagrams_for(clean, cfg).items()}
    return LossReference(clean, cfg, mask, float(mask.mean()), tpers)


def wvcomb_from_reference(output: ImageGrid, ref: LossReference) -> LossReport:
    cfg = ref.cfg
    require_same_shape(output, ref.clean)
    n = output.height * output.width

    base_field = base_loss_field(output, ref.clean, cfg.p_base)
    inv_mask = 1.0 - ref.mask
    base_term = float((inv_mask * base_field).mean())
    diff = output.pixels - ref.clean.pixels
    if cfg.p_base == 1:
        base_grad = inv_mask * np.sign(diff) / n
    else:
        base_grad = inv_mask * 2.0 * diff / n

    topo_value, topo_grad, out_diagrams = _topo_against_reference(output, ref.tpers, cfg)
    topo_term = ref.mask_mean * topo_value

    total = base_term + cfg.alpha * topo_term
    gradient = base_grad + cfg.alpha * ref.mask_mean * topo_grad
    tpers_output = float(sum(total_persistence(out_diagrams[d], cfg.p_tpers)
                             for d in cfg.dims))
    tpers_clean = float(sum(ref.tpers[d] for d in cfg.dims))
    return LossReport(float(total), float(topo_term), float(base_term),
                      tpers_output, tpers_clean, gradient)


def wvcomb_loss(output: ImageGrid, clean: ImageGrid,
                cfg: LossConfig = LossConfig()) -> LossReport:
    """Combined wavelet-masked loss of an (output, reference) pair."""
    require_same_shape(output, clean)
    return wvcomb_from_reference(output, prepare_reference(clean, cfg))
