"""PSNR and SSIM on normalized grayscale images.

SSIM uses the reference constants: 11x11 Gaussian window with sigma 1.5,
K1=0.01, K2=0.03, dynamic range 1, mean taken over windows fully inside
the image.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d

from .errors import ImageTooSmallError
from .imagecore import ImageGrid, require_same_shape
from .persistence import fmt_real

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


@dataclass(frozen=True)
class MetricReport:
    psnr_db: float  # math.inf for identical images
    ssim: float


def report_to_json(report: MetricReport) -> str:
    psnr = '"inf"' if math.isinf(report.psnr_db) else fmt_real(report.psnr_db)
    return '{"psnr_db":%s,"ssim":%s}' % (psnr, fmt_real(report.ssim))


def psnr(a: ImageGrid, b: ImageGrid, peak: float = 1.0) -> float:
    """10*log10(peak^2 / MSE); identical images return +inf."""
    require_same_shape(a, b)
    if peak <= 0:
        raise ValueError(f"peak must be > 0, got {peak}")
    diff = a.pixels - b.pixels
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    half = (size - 1) / 2.0
    coords = np.arange(size) - half
    g = np.exp(-(coords ** 2) / (2.0 * sigma ** 2))
    kernel = np.outer(g, g)
    return kernel / kernel.sum()


def ssim(a: ImageGrid, b: ImageGrid) -> float:
    """Mean local structural similarity over interior windows."""
    require_same_shape(a, b)
    if a.height < SSIM_WINDOW or a.width < SSIM_WINDOW:
        raise ImageTooSmallError(
            f"ssim needs at least {SSIM_WINDOW}x{SSIM_WINDOW}, "
            f"got {a.height}x{a.width}"
        )
    x, y = a.pixels, b.pixels
    w = _gaussian_window(SSIM_WINDOW, SSIM_SIGMA)
    c1 = SSIM_K1 ** 2
    c2 = SSIM_K2 ** 2

    mu_x = convolve2d(x, w, mode="valid")
    mu_y = convolve2d(y, w, mode="valid")
    var_x = convolve2d(x * x, w, mode="valid") - mu_x * mu_x
    var_y = convolve2d(y * y, w, mode="valid") - mu_y * mu_y
    cov = convolve2d(x * y, w, mode="valid") - mu_x * mu_y

    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


def metric_report(a: ImageGrid, b: ImageGrid, peak: float = 1.0) -> MetricReport:
    return MetricReport(psnr(a, b, peak), ssim(a, b))
