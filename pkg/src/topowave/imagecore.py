"""Grayscale image container, file I/O, synthetic noise and patch extraction.

Intensities are stored as float64 in [0, 1]. PGM (P2/P5, maxval 255 or
65535 big-endian) is the canonical lossless format; PNG is supported for
8-bit grayscale and RGB, with RGB reduced to luma (0.299/0.587/0.114).
"""

from __future__ import annotations

import os
import tempfile
from typing import NamedTuple

import numpy as np

from .errors import (
    DimensionMismatchError,
    MalformedImageError,
    OutOfBoundsError,
    UnsupportedBitDepthError,
)

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


class PixelIndex(NamedTuple):
    row: int
    col: int


class ImageGrid:
    """Immutable H x W grid of float64 intensities.

    The pixel array is copied on construction and marked read-only, so
    instances can be shared freely across threads.
    """

    __slots__ = ("pixels",)

    def __init__(self, pixels):
        arr = np.array(pixels, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D array, got ndim={arr.ndim}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"image must be at least 1x1, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("image intensities must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    def __setattr__(self, name, value):
        raise AttributeError("ImageGrid is immutable")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def data(self) -> np.ndarray:
        """Row-major flat view of the intensities (length height*width)."""
        return self.pixels.reshape(-1)

    def __eq__(self, other):
        if not isinstance(other, ImageGrid):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )

    def __hash__(self):
        return hash((self.pixels.shape, self.pixels.tobytes()))

    def __repr__(self):
        return f"ImageGrid({self.height}x{self.width})"

    @staticmethod
    def constant(height: int, width: int, value: float) -> "ImageGrid":
        return ImageGrid(np.full((height, width), value, dtype=np.float64))


def _atomic_write_bytes(path, payload: bytes) -> None:
    """Write to a temp file in the target directory, then rename into place.

    A failed write never leaves a truncated file at `path`.
    """
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tw-tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def atomic_write_text(path, text: str) -> None:
    _atomic_write_bytes(path, text.encode("utf-8"))


def _guess_format(path) -> str:
    ext = os.path.splitext(str(path))[1].lower()
    if ext in (".pgm", ".pnm"):
        return "pgm"
    if ext == ".png":
        return "png"
    raise ValueError(f"cannot infer image format from {path!r}; pass format=")


# ---------------------------------------------------------------------------
# PGM (netpbm P2 / P5)

def _pgm_tokens(blob: bytes):
    """Yield whitespace-separated header/ASCII tokens, skipping # comments."""
    i, n = 0, len(blob)
    while i < n:
        c = blob[i : i + 1]
        if c.isspace():
            i += 1
        elif c == b"#":
            j = blob.find(b"\n", i)
            i = n if j < 0 else j + 1
        else:
            j = i
            while j < n and not blob[j : j + 1].isspace():
                j += 1
            yield i, blob[i:j]
            i = j


def _load_pgm(path) -> ImageGrid:
    with open(path, "rb") as fh:
        blob = fh.read()
    tokens = _pgm_tokens(blob)
    try:
        _, magic = next(tokens)
    except StopIteration:
        raise MalformedImageError(f"{path}: empty file") from None
    if magic not in (b"P2", b"P5"):
        raise MalformedImageError(f"{path}: not a PGM file (magic {magic!r})")
    try:
        _, w_tok = next(tokens)
        _, h_tok = next(tokens)
        maxval_pos, maxval_tok = next(tokens)
        width, height, maxval = int(w_tok), int(h_tok), int(maxval_tok)
    except (StopIteration, ValueError):
        raise MalformedImageError(f"{path}: truncated or invalid PGM header") from None
    if width < 1 or height < 1:
        raise MalformedImageError(f"{path}: invalid dimensions {width}x{height}")
    if maxval not in (255, 65535):
        raise UnsupportedBitDepthError(f"{path}: maxval {maxval} (supported: 255, 65535)")
    count = width * height

    if magic == b"P5":
        # exactly one whitespace byte separates the maxval from the raster
        start = maxval_pos + len(maxval_tok) + 1
        bytes_per = 1 if maxval == 255 else 2
        raster = blob[start : start + count * bytes_per]
        if len(raster) < count * bytes_per:
            raise MalformedImageError(f"{path}: truncated raster")
        dtype = np.uint8 if maxval == 255 else np.dtype(">u2")
        samples = np.frombuffer(raster, dtype=dtype, count=count).astype(np.float64)
    else:
        values = []
        for _, tok in tokens:
            try:
                values.append(int(tok))
            except ValueError:
                raise MalformedImageError(f"{path}: non-numeric sample {tok!r}") from None
            if len(values) == count:
                break
        if len(values) < count:
            raise MalformedImageError(f"{path}: truncated raster")
        samples = np.array(values, dtype=np.float64)

    if samples.min() < 0 or samples.max() > maxval:
        raise MalformedImageError(f"{path}: sample outside [0, {maxval}]")
    return ImageGrid((samples / maxval).reshape(height, width))


def _save_pgm(img: ImageGrid, path, bits: int) -> None:
    maxval = 255 if bits == 8 else 65535
    q = np.floor(img.pixels * maxval + 0.5).astype(np.uint32)
    q = np.clip(q, 0, maxval)
    header = f"P5\n{img.width} {img.height}\n{maxval}\n".encode("ascii")
    if bits == 8:
        payload = q.astype(np.uint8).tobytes()
    else:
        payload = q.astype(">u2").tobytes()
    _atomic_write_bytes(path, header + payload)


# ---------------------------------------------------------------------------
# PNG (via Pillow)

def _load_png(path) -> ImageGrid:
    from PIL import Image, UnidentifiedImageError

    try:
        with Image.open(path) as im:
            mode = im.mode
            if mode == "L":
                arr = np.asarray(im, dtype=np.float64) / 255.0
            elif mode == "RGB":
                rgb = np.asarray(im, dtype=np.float64) / 255.0
                r, g, b = LUMA_WEIGHTS
                arr = rgb[..., 0] * r + rgb[..., 1] * g + rgb[..., 2] * b
            else:
                raise UnsupportedBitDepthError(
                    f"{path}: PNG mode {mode!r} (supported: 8-bit L, RGB)"
                )
    except UnidentifiedImageError:
        raise MalformedImageError(f"{path}: not a valid PNG file") from None
    if arr.ndim != 2:
        raise MalformedImageError(f"{path}: unexpected PNG layout")
    return ImageGrid(np.clip(arr, 0.0, 1.0))


def _save_png(img: ImageGrid, path, bits: int) -> None:
    from PIL import Image

    if bits != 8:
        raise UnsupportedBitDepthError("PNG output is 8-bit grayscale only")
    q = np.clip(np.floor(img.pixels * 255.0 + 0.5), 0, 255).astype(np.uint8)
    im = Image.fromarray(q, mode="L")
    import io

    buf = io.BytesIO()
    im.save(buf, format="PNG")
    _atomic_write_bytes(path, buf.getvalue())


# ---------------------------------------------------------------------------
# Public operations

def load_image(path, format: str | None = None) -> ImageGrid:
    """Load a PGM or PNG file as a normalized ImageGrid.

    8-bit samples are divided by 255, 16-bit by 65535; RGB is converted
    to luma. Raises FileNotFoundError, MalformedImageError or
    UnsupportedBitDepthError.
    """
    fmt = (format or _guess_format(path)).lower()
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    if fmt == "pgm":
        return _load_pgm(path)
    if fmt == "png":
        return _load_png(path)
    raise ValueError(f"unknown format {format!r}")


def save_image(img: ImageGrid, path, format: str | None = None, bits: int = 8) -> None:
    """Save an ImageGrid, quantizing intensities to 8- or 16-bit samples.

    Round trip error is at most 0.5/maxval per pixel. Writes are atomic
    (temp file + rename).
    """
    if bits not in (8, 16):
        raise UnsupportedBitDepthError(f"bits must be 8 or 16, got {bits}")
    fmt = (format or _guess_format(path)).lower()
    if fmt == "pgm":
        _save_pgm(img, path, bits)
    elif fmt == "png":
        _save_png(img, path, bits)
    else:
        raise ValueError(f"unknown format {format!r}")


def add_gaussian_noise(img: ImageGrid, sigma: float, seed: int) -> ImageGrid:
    """Add i.i.d. Gaussian noise and clamp to [0, 1].

    Deterministic for a fixed seed; sigma=0 returns the input unchanged.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return img
    rng = np.random.default_rng(seed)
    noisy = img.pixels + rng.normal(0.0, sigma, size=img.pixels.shape)
    return ImageGrid(np.clip(noisy, 0.0, 1.0))


def extract_patch(img: ImageGrid, top_left: PixelIndex, size: int) -> ImageGrid:
    """Copy a size x size sub-grid with its top-left corner at `top_left`."""
    if size < 1:
        raise ValueError(f"patch size must be >= 1, got {size}")
    row, col = top_left
    if row < 0 or col < 0 or row + size > img.height or col + size > img.width:
        raise OutOfBoundsError(
            f"patch {size}x{size} at ({row},{col}) exceeds image {img.height}x{img.width}"
        )
    return ImageGrid(img.pixels[row : row + size, col : col + size])


def require_same_shape(a: ImageGrid, b: ImageGrid) -> None:
    if a.pixels.shape != b.pixels.shape:
        raise DimensionMismatchError(
            f"shape mismatch: {a.height}x{a.width} vs {b.height}x{b.width}"
        )
