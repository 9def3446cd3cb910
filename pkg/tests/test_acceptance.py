"""Acceptance suite: every criterion runs at its stated tolerance and
prints one PASS line (run with `pytest tests/test_acceptance.py -v -s`).
"""

import math
import time

import numpy as np

from topowave import (
    ComplexKind,
    ImageGrid,
    LossConfig,
    add_gaussian_noise,
    build_cubical,
    build_vr_grid,
    pad_to_even,
    persistence_h0,
    persistence_h1,
    psnr,
    ssim,
    texture_mask,
    topo_loss,
    total_persistence,
    tpers_gradient,
    wvcomb_loss,
)
from topowave.bench import bench_to_csv, emit_plot_script, run_bench
from topowave.cli import DenoiseConfig, denoise_descent
from topowave.loss import base_loss_field
from topowave.wavelet import dwt_haar_forward, dwt_haar_inverse

from conftest import fd_safe_pair, standard_scene
from oracles import (
    brute_h0_pairs,
    distinct_image,
    finite_diff_grad,
    library_pairs_as_tuples,
    naive_reduction_pairs,
)

GRAD_TOL = 1e-5
FD_STEP = 1e-6


def report(n, text):
    print(f"PASS  criterion {n}: {text}")


def test_criterion_01_h0_oracle_equivalence():
    rng = np.random.default_rng(20250809)
    t0 = time.perf_counter()
    for i in range(500):
        h = int(rng.integers(2, 9))
        w = int(rng.integers(2, 9))
        arr = distinct_image(rng, h, w)
        img = ImageGrid(arr)
        for build, conn in ((build_vr_grid, 8), (build_cubical, 4)):
            lib = library_pairs_as_tuples(persistence_h0(build(img)))
            assert lib == brute_h0_pairs(arr, conn), f"image {i}, connectivity {conn}"
    elapsed = time.perf_counter() - t0
    assert elapsed < 30.0, f"took {elapsed:.1f}s (budget 30s)"
    report(1, f"H0 equals component-counting oracle on 500 images, "
              f"both kinds ({elapsed:.1f}s)")


def test_criterion_02_h1_oracle_equivalence():
    rng = np.random.default_rng(20250810)
    t0 = time.perf_counter()
    for i in range(200):
        h = int(rng.integers(2, 9))
        w = int(rng.integers(2, 9))
        img = ImageGrid(distinct_image(rng, h, w))
        for build in (build_vr_grid, build_cubical):
            cx = build(img)
            naive = naive_reduction_pairs(cx)
            assert library_pairs_as_tuples(persistence_h1(cx)) == naive[1], f"image {i}"
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0, f"took {elapsed:.1f}s (budget 60s)"
    report(2, f"H1 equals naive full-reduction oracle on 200 images ({elapsed:.1f}s)")


def test_criterion_03_ring_fixture():
    arr = np.full((3, 3), 0.2)
    arr[1, 1] = 1.0
    pd = persistence_h1(build_cubical(ImageGrid(arr)))
    assert library_pairs_as_tuples(pd) == [(0.2, 1.0, False)]
    report(3, "3x3 ring (border 0.2, center 1.0) yields exactly one H1 pair (0.2, 1.0)")


def test_criterion_04_gradient_correctness():
    img = ImageGrid([[0.1, 0.9, 0.2]])
    grad = tpers_gradient(img, persistence_h0(build_vr_grid(img)), 1)
    assert np.array_equal(grad, [[-1.0, 2.0, -1.0]])

    rng = np.random.default_rng(20250811)
    cfg = LossConfig()
    worst = 0.0
    for i in range(100):
        # redraws keep |TPers(O)-TPers(C)| away from its kink at zero,
        # where central differences are undefined
        arr, clean_arr = fd_safe_pair(rng, 8, 8, cfg)
        img = ImageGrid(arr)
        clean = ImageGrid(clean_arr)

        for pers in (persistence_h0, persistence_h1):
            analytic = tpers_gradient(img, pers(build_vr_grid(img)), 1)
            fd = finite_diff_grad(
                lambda a, pers=pers: total_persistence(
                    pers(build_vr_grid(ImageGrid(a))), 1), arr, FD_STEP)
            worst = max(worst, float(np.abs(analytic - fd).max()))

        _, topo_grad = topo_loss(img, clean, cfg)
        fd = finite_diff_grad(
            lambda a: topo_loss(ImageGrid(a), clean, cfg)[0], arr, FD_STEP)
        worst = max(worst, float(np.abs(topo_grad - fd).max()))

        wv = wvcomb_loss(img, clean, cfg)
        fd = finite_diff_grad(
            lambda a: wvcomb_loss(ImageGrid(a), clean, cfg).total, arr, FD_STEP)
        worst = max(worst, float(np.abs(wv.gradient - fd).max()))
        assert worst < GRAD_TOL, f"image {i}: max deviation {worst}"
    report(4, f"analytic gradients match central differences on 100 images "
              f"(worst deviation {worst:.2e} < {GRAD_TOL})")


def test_criterion_05_wavelet_exactness():
    rng = np.random.default_rng(20250812)
    worst_rec, worst_energy = 0.0, 0.0
    for i in range(100):
        h = int(rng.integers(4, 18))
        w = int(rng.integers(4, 18))
        img = ImageGrid(rng.random((h, w)))
        bands = dwt_haar_forward(img)
        rec = dwt_haar_inverse(bands)
        worst_rec = max(worst_rec, float(np.abs(rec.pixels - img.pixels).max()))
        e_in = float((pad_to_even(img).pixels ** 2).sum())
        e_out = float(sum((b.pixels ** 2).sum()
                          for b in (bands.ll, bands.lh, bands.hl, bands.hh)))
        worst_energy = max(worst_energy, abs(e_in - e_out) / e_in)
    assert worst_rec <= 1e-12
    assert worst_energy <= 1e-10
    report(5, f"perfect reconstruction (worst {worst_rec:.2e}) and energy "
              f"preservation (worst {worst_energy:.2e}) on 100 images")


def test_criterion_06_mask_contract():
    rng = np.random.default_rng(20250813)
    for h in range(4, 18):
        for w in range(4, 18):
            flat = texture_mask(ImageGrid.constant(h, w, 0.6)).weights.pixels
            assert np.all(flat == 0.0)
            mask = texture_mask(ImageGrid(rng.random((h, w)))).weights.pixels
            assert mask.shape == (h, w)
            assert mask.min() >= 0.0 and mask.max() <= 1.0
    report(6, "constant images give zero masks; shapes and [0,1] range hold "
              "for all sizes 4..17")


def test_criterion_07_loss_identities():
    rng = np.random.default_rng(20250814)
    x = ImageGrid(distinct_image(rng, 8, 8))
    identity = wvcomb_loss(x, x)
    assert identity.total == 0.0
    assert np.all(identity.gradient == 0.0)

    out = ImageGrid(distinct_image(rng, 8, 8))
    clean = ImageGrid(distinct_image(rng, 8, 8))
    degenerate = wvcomb_loss(out, clean, LossConfig(alpha=0.0))
    mask = texture_mask(clean).weights.pixels
    masked_base = float(((1.0 - mask) * base_loss_field(out, clean, 1)).mean())
    assert abs(degenerate.total - masked_base) <= 1e-12 * max(masked_base, 1e-300)

    forward, _ = topo_loss(out, clean)
    backward, _ = topo_loss(clean, out)
    assert forward == backward
    report(7, "identity pair gives zero loss and gradient; alpha=0 reduces to "
              "masked base loss; |TPers(O)-TPers(C)| is symmetric")


def test_criterion_08_toy_denoise_descent():
    clean = standard_scene(64)
    noisy = add_gaussian_noise(clean, 0.1, seed=42)
    cfg = DenoiseConfig(step_size=0.05, iterations=200, loss=LossConfig(), seed=42)

    t0 = time.perf_counter()
    result, trace = denoise_descent(noisy, clean, cfg)
    elapsed = time.perf_counter() - t0
    assert elapsed < 300.0, f"took {elapsed:.1f}s (budget 300s)"

    assert trace[-1] < trace[0], "final loss must be strictly lower"
    assert all(a >= b for a, b in zip(trace, trace[1:])), "trace must be non-increasing"

    def tpers_gap(img):
        gap = 0.0
        for pers in (persistence_h0, persistence_h1):
            cx_img, cx_clean = build_vr_grid(img), build_vr_grid(clean)
            gap += abs(total_persistence(pers(cx_img)) - total_persistence(pers(cx_clean)))
        return gap

    assert tpers_gap(result) < tpers_gap(noisy), "topological gap must shrink"
    psnr_out = psnr(result, clean)
    psnr_noisy = psnr(noisy, clean)
    assert psnr_out > psnr_noisy
    report(8, f"200 descent iterations: loss {trace[0]:.6f} -> {trace[-1]:.6f}, "
              f"PSNR {psnr_noisy:.3f} -> {psnr_out:.3f} dB ({elapsed:.0f}s)")


def test_criterion_09_bench_directional(tmp_path):
    t0 = time.perf_counter()
    rows = run_bench(sizes=[32, 64, 128, 256, 512], reps=3, seed=0)
    elapsed = time.perf_counter() - t0
    assert elapsed < 900.0, f"took {elapsed:.1f}s (budget 900s)"
    assert len(rows) == 15

    def median_time(kind, dim, size):
        return next(r.wall_time_seconds for r in rows
                    if r.complex_kind is kind and r.dim == dim and r.patch_size == size)

    cub = median_time(ComplexKind.CUBICAL, "both", 512)
    vr0 = median_time(ComplexKind.VIETORIS_RIPS_GRID, "0", 512)
    assert cub > vr0, f"cubical H0+H1 ({cub:.3f}s) must exceed grid-clique H0 ({vr0:.3f}s)"

    for kind, dim in {(r.complex_kind, r.dim) for r in rows}:
        times = [r.wall_time_seconds for r in sorted(
            (r for r in rows if r.complex_kind is kind and r.dim == dim),
            key=lambda r: r.patch_size)]
        assert all(a <= b for a, b in zip(times, times[1:])), (kind, dim, times)

    csv_path = tmp_path / "bench.csv"
    plot_path = tmp_path / "bench.gnuplot"
    bench_to_csv(rows, csv_path)
    emit_plot_script(csv_path, plot_path)
    assert csv_path.exists() and plot_path.exists()
    report(9, f"at 512: cubical H0+H1 {cub:.3f}s > grid-clique H0 {vr0:.3f}s; "
              f"CSV and plot script written ({elapsed:.0f}s)")


def test_criterion_10_metric_sanity():
    img = ImageGrid(np.random.default_rng(20250815).random((16, 16)))
    assert ssim(img, img) == 1.0
    assert psnr(img, img) == math.inf

    a = ImageGrid(np.zeros((10, 10)))
    b_arr = np.zeros((10, 10))
    b_arr[0, 0] = 1.0  # MSE is the correctly rounded double 1/100
    assert psnr(a, ImageGrid(b_arr)) == 20.0
    report(10, "ssim(x,x)=1.0, PSNR sentinel on identity, MSE=0.01 gives 20.0 dB")
