import os

import numpy as np
import pytest

from topowave import (
    ImageGrid,
    MalformedImageError,
    OutOfBoundsError,
    PixelIndex,
    UnsupportedBitDepthError,
    add_gaussian_noise,
    extract_patch,
    load_image,
    save_image,
)


class TestImageGrid:
    def test_rejects_bad_shapes(self):
        with pytest.raises(ValueError):
            ImageGrid(np.zeros(4))
        with pytest.raises(ValueError):
            ImageGrid(np.zeros((0, 3)))
        with pytest.raises(ValueError):
            ImageGrid([[np.nan, 0.0]])

    def test_data_is_row_major(self):
        img = ImageGrid([[0.1, 0.2], [0.3, 0.4]])
        assert img.height == 2 and img.width == 2
        assert np.array_equal(img.data, [0.1, 0.2, 0.3, 0.4])

    def test_immutable(self):
        img = ImageGrid([[0.5]])
        with pytest.raises(ValueError):
            img.pixels[0, 0] = 0.1
        with pytest.raises(AttributeError):
            img.pixels = np.zeros((1, 1))

    def test_owns_its_data(self):
        arr = np.array([[0.5, 0.5]])
        img = ImageGrid(arr)
        arr[0, 0] = 0.0
        assert img.pixels[0, 0] == 0.5


class TestPgm:
    def test_p5_8bit(self, tmp_path):
        path = tmp_path / "a.pgm"
        path.write_bytes(b"P5\n2 2\n255\n" + bytes([0, 255, 128, 64]))
        img = load_image(path)
        assert np.array_equal(img.data, [0.0, 1.0, 128 / 255, 64 / 255])

    def test_p2_with_comments(self, tmp_path):
        path = tmp_path / "a.pgm"
        path.write_text("P2\n# a comment\n3 1\n255\n0 128 255\n")
        img = load_image(path)
        assert np.array_equal(img.data, [0.0, 128 / 255, 1.0])

    def test_p5_16bit_big_endian(self, tmp_path):
        path = tmp_path / "a.pgm"
        samples = np.array([0, 65535, 256], dtype=">u2").tobytes()
        path.write_bytes(b"P5\n3 1\n65535\n" + samples)
        img = load_image(path)
        assert np.array_equal(img.data, [0.0, 1.0, 256 / 65535])

    def test_truncated_header(self, tmp_path):
        path = tmp_path / "a.pgm"
        path.write_bytes(b"P5\n2")
        with pytest.raises(MalformedImageError):
            load_image(path)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "a.pgm"
        path.write_bytes(b"P6\n1 1\n255\n\x00\x00\x00")
        with pytest.raises(MalformedImageError):
            load_image(path)

    def test_truncated_raster(self, tmp_path):
        path = tmp_path / "a.pgm"
        path.write_bytes(b"P5\n2 2\n255\n\x00\x01")
        with pytest.raises(MalformedImageError):
            load_image(path)

    def test_unsupported_maxval(self, tmp_path):
        path = tmp_path / "a.pgm"
        path.write_bytes(b"P5\n1 1\n1023\n\x00\x00")
        with pytest.raises(UnsupportedBitDepthError):
            load_image(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_image(tmp_path / "nope.pgm")

    def test_save_constant_half_quantizes_to_128(self, tmp_path):
        path = tmp_path / "a.pgm"
        save_image(ImageGrid.constant(2, 3, 0.5), path)
        raster = path.read_bytes().split(b"\n", 3)[3]
        assert raster == bytes([128] * 6)

    @pytest.mark.parametrize("bits,quantum", [(8, 1 / 255), (16, 1 / 65535)])
    def test_roundtrip_error_bounded(self, tmp_path, bits, quantum):
        rng = np.random.default_rng(3)
        img = ImageGrid(rng.random((9, 7)))
        path = tmp_path / "a.pgm"
        save_image(img, path, bits=bits)
        back = load_image(path)
        assert np.abs(back.pixels - img.pixels).max() <= quantum

    def test_unwritable_directory(self, tmp_path):
        with pytest.raises(OSError):
            save_image(ImageGrid.constant(1, 1, 0.0), tmp_path / "no" / "dir" / "a.pgm")


class TestPng:
    def test_rgb_red_converts_to_luma(self, tmp_path):
        from PIL import Image

        path = tmp_path / "a.png"
        Image.fromarray(np.full((2, 2, 3), (255, 0, 0), dtype=np.uint8), "RGB").save(path)
        img = load_image(path)
        assert np.allclose(img.pixels, 0.299)
        assert img.pixels[0, 0] == 0.299

    def test_gray_roundtrip(self, tmp_path):
        rng = np.random.default_rng(5)
        img = ImageGrid(rng.random((6, 8)))
        path = tmp_path / "a.png"
        save_image(img, path)
        back = load_image(path)
        assert np.abs(back.pixels - img.pixels).max() <= 1 / 255

    def test_rgba_unsupported(self, tmp_path):
        from PIL import Image

        path = tmp_path / "a.png"
        Image.fromarray(np.zeros((2, 2, 4), dtype=np.uint8), "RGBA").save(path)
        with pytest.raises(UnsupportedBitDepthError):
            load_image(path)

    def test_not_a_png(self, tmp_path):
        path = tmp_path / "a.png"
        path.write_bytes(b"this is not a png")
        with pytest.raises(MalformedImageError):
            load_image(path)

    def test_16bit_png_save_rejected(self, tmp_path):
        with pytest.raises(UnsupportedBitDepthError):
            save_image(ImageGrid.constant(2, 2, 0.5), tmp_path / "a.png", bits=16)


class TestNoise:
    def test_sigma_zero_is_identity(self):
        img = ImageGrid([[0.2, 0.8]])
        assert add_gaussian_noise(img, 0.0, seed=1) == img

    def test_fixed_seed_is_pure(self):
        img = ImageGrid.constant(16, 16, 0.5)
        a = add_gaussian_noise(img, 0.1, seed=9)
        b = add_gaussian_noise(img, 0.1, seed=9)
        assert np.array_equal(a.pixels, b.pixels)

    def test_sample_std_matches_sigma(self):
        img = ImageGrid.constant(256, 256, 0.5)
        noisy = add_gaussian_noise(img, 0.1, seed=0)
        assert 0.095 <= noisy.pixels.std() <= 0.105

    def test_output_stays_in_unit_range(self):
        img = ImageGrid.constant(32, 32, 0.95)
        noisy = add_gaussian_noise(img, 0.5, seed=2)
        assert noisy.pixels.min() >= 0.0 and noisy.pixels.max() <= 1.0

    def test_negative_sigma_rejected(self):
        with pytest.raises(ValueError):
            add_gaussian_noise(ImageGrid.constant(1, 1, 0.5), -0.1, seed=0)


class TestPatch:
    def test_full_image_identity(self):
        rng = np.random.default_rng(1)
        img = ImageGrid(rng.random((5, 5)))
        assert extract_patch(img, PixelIndex(0, 0), 5) == img

    def test_top_left_quadrant(self):
        rng = np.random.default_rng(2)
        img = ImageGrid(rng.random((8, 8)))
        patch = extract_patch(img, PixelIndex(0, 0), 4)
        assert np.array_equal(patch.pixels, img.pixels[:4, :4])

    def test_out_of_bounds(self):
        img = ImageGrid.constant(4, 4, 0.5)
        with pytest.raises(OutOfBoundsError):
            extract_patch(img, PixelIndex(0, 2), 3)
        with pytest.raises(OutOfBoundsError):
            extract_patch(img, PixelIndex(-1, 0), 2)
