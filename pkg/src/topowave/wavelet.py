"""Orthonormal Haar transform and the two-level texture mask.

One 2-D Haar level maps each 2x2 block [[a, b], [c, d]] to

    LL = (a+b+c+d)/2   LH = (a-b+c-d)/2
    HL = (a+b-c-d)/2   HH = (a-b-c+d)/2

which is orthonormal (sum of squared coefficients equals the sum of
squared inputs), so the inverse is exact up to roundoff. Odd dimensions
are symmetric-padded by one duplicated row/column first.

The texture mask takes the level-1 LL band, transforms it again, averages
the absolute level-2 detail bands (horizontal, vertical, diagonal),
upsamples nearest-neighbor by 4 back to the source resolution and min-max
normalizes to [0, 1]. Flat images produce an all-zero mask.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, ImageTooSmallError
from .imagecore import ImageGrid

_FLAT_RANGE_EPS = 1e-12


@dataclass(frozen=True)
class WaveletBands:
    ll: ImageGrid
    lh: ImageGrid
    hl: ImageGrid
    hh: ImageGrid
    source_height: int
    source_width: int


@dataclass(frozen=True)
class TextureMask:
    weights: ImageGrid


def pad_to_even(img: ImageGrid) -> ImageGrid:
    """Duplicate the last row/column when the corresponding size is odd."""
    x = img.pixels
    if img.height % 2:
        x = np.vstack([x, x[-1:, :]])
    if img.width % 2:
        x = np.hstack([x, x[:, -1:]])
    return ImageGrid(x)


def dwt_haar_forward(img: ImageGrid) -> WaveletBands:
    x = pad_to_even(img).pixels
    a = x[0::2, 0::2]
    b = x[0::2, 1::2]
    c = x[1::2, 0::2]
    d = x[1::2, 1::2]
    return WaveletBands(
        ll=ImageGrid((a + b + c + d) / 2.0),
        lh=ImageGrid((a - b + c - d) / 2.0),
        hl=ImageGrid((a + b - c - d) / 2.0),
        hh=ImageGrid((a - b - c + d) / 2.0),
        source_height=img.height,
        source_width=img.width,
    )


def dwt_haar_inverse(bands: WaveletBands) -> ImageGrid:
    """Exact inverse of :func:`dwt_haar_forward`; padding is removed."""
    ll, lh, hl, hh = (bands.ll.pixels, bands.lh.pixels,
                      bands.hl.pixels, bands.hh.pixels)
    shape = ll.shape
    if not (lh.shape == shape and hl.shape == shape and hh.shape == shape):
        raise DimensionMismatchError("wavelet bands differ in shape")
    expected = ((bands.source_height + 1) // 2, (bands.source_width + 1) // 2)
    if shape != expected:
        raise DimensionMismatchError(
            f"bands {shape} inconsistent with source "
            f"{bands.source_height}x{bands.source_width}"
        )
    out = np.empty((2 * shape[0], 2 * shape[1]), dtype=np.float64)
    out[0::2, 0::2] = (ll + lh + hl + hh) / 2.0
    out[0::2, 1::2] = (ll - lh + hl - hh) / 2.0
    out[1::2, 0::2] = (ll + lh - hl - hh) / 2.0
    out[1::2, 1::2] = (ll - lh - hl + hh) / 2.0
    return ImageGrid(out[: bands.source_height, : bands.source_width])


def texture_mask(img: ImageGrid) -> TextureMask:
    """Per-pixel texture weight in [0, 1] from the level-2 detail bands."""
    if img.height < 4 or img.width < 4:
        raise ImageTooSmallError(
            f"texture mask needs at least 4x4, got {img.height}x{img.width}"
        )
    level1 = dwt_haar_forward(img)
    level2 = dwt_haar_forward(level1.ll)
    detail = (np.abs(level2.lh.pixels)
              + np.abs(level2.hl.pixels)
              + np.abs(level2.hh.pixels)) / 3.0
    up = np.repeat(np.repeat(detail, 4, axis=0), 4, axis=1)
    up = up[: img.height, : img.width]
    lo, hi = up.min(), up.max()
    if hi - lo < _FLAT_RANGE_EPS:
        weights = np.zeros_like(up)
    else:
        weights = (up - lo) / (hi - lo)
    return TextureMask(ImageGrid(weights))
