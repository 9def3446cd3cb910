import numpy as np
import pytest

from topowave import ImageGrid, add_gaussian_noise, build_complex, total_persistence
from topowave.loss import _DIM_FUNCS

from oracles import distinct_image


def fd_safe_pair(rng, h, w, cfg, min_delta=1e-4):
    """(output, clean) pixel arrays safe for finite-difference checks.

    Redraws until every per-dimension total-persistence delta stays away
    from the |.|-kink at zero, where central differences are meaningless.
    """
    while True:
        arr = distinct_image(rng, h, w)
        clean = distinct_image(rng, h, w, phase=0.75)
        deltas = []
        for d in cfg.dims:
            t_out = total_persistence(
                _DIM_FUNCS[d](build_complex(ImageGrid(arr), cfg.complex_kind)), cfg.p_tpers)
            t_clean = total_persistence(
                _DIM_FUNCS[d](build_complex(ImageGrid(clean), cfg.complex_kind)), cfg.p_tpers)
            deltas.append(abs(t_out - t_clean))
        if min(deltas) > min_delta:
            return arr, clean


def standard_scene(size=64):
    """Piecewise-constant quadrants plus a smoothly textured quadrant."""
    img = np.zeros((size, size))
    half = size // 2
    img[:half, :half] = 0.25
    img[:half, half:] = 0.75
    img[half:, :half] = 0.5
    yy, xx = np.mgrid[0:size - half, 0:size - half]
    img[half:, half:] = 0.5 + 0.25 * np.sin(1.3 * xx) * np.sin(1.1 * yy)
    return ImageGrid(img)


@pytest.fixture
def scene64():
    return standard_scene(64)


@pytest.fixture
def noisy_scene64(scene64):
    return add_gaussian_noise(scene64, 0.1, seed=42)
