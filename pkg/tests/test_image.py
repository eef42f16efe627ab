import numpy as np
import pytest
from PIL import Image

from sisa import ImageBuffer, UnsupportedImageError, ImageIOError, load_image, save_lossless
from sisa.image import probe_format

from conftest import random_image


def test_solid_red_png(tmp_path):
    path = tmp_path / "red.png"
    Image.new("RGB", (2, 2), (255, 0, 0)).save(path)
    img = load_image(path)
    assert (img.width, img.height, img.channels) == (2, 2, 3)
    assert img.pixels == bytes([255, 0, 0] * 4)


def test_single_gray_pixel(tmp_path):
    path = tmp_path / "g.png"
    Image.new("L", (1, 1), 0).save(path)
    img = load_image(path)
    assert (img.width, img.height, img.channels) == (1, 1, 1)
    assert img.pixels == b"\x00"


def test_vga_rgb_length(tmp_path):
    path = tmp_path / "vga.png"
    arr = np.random.default_rng(7).integers(0, 256, (480, 640, 3), dtype=np.uint8)
    Image.fromarray(arr).save(path)
    img = load_image(path)
    assert len(img.pixels) == 640 * 480 * 3 == 921600


@pytest.mark.parametrize("channels", [1, 3, 4])
def test_save_load_roundtrip(tmp_path, channels, rng):
    img = random_image(rng, 13, 9, channels)
    path = tmp_path / "out.png"
    save_lossless(img, path)
    assert load_image(path) == img


def test_alpha_preserved(tmp_path, rng):
    img = random_image(rng, 5, 5, 4)
    path = tmp_path / "rgba.png"
    save_lossless(img, path)
    assert load_image(path).channels == 4


def test_randomized_roundtrips(tmp_path, rng):
    for i in range(100):
        img = random_image(rng, max_side=32)
        path = tmp_path / f"r{i}.png"
        save_lossless(img, path)
        assert load_image(path) == img


def test_jpeg_and_bmp_decode(tmp_path):
    arr = np.zeros((4, 4, 3), np.uint8)
    arr[:, :, 1] = 200
    for ext, fmt in (("jpg", "JPEG"), ("bmp", "BMP")):
        path = tmp_path / f"f.{ext}"
        Image.fromarray(arr).save(path, format=fmt)
        img = load_image(path)
        assert (img.width, img.height, img.channels) == (4, 4, 3)
        assert probe_format(path) == fmt


def test_palette_png_converts(tmp_path):
    path = tmp_path / "p.png"
    pal = Image.new("P", (3, 3), 0)
    pal.putpalette([10, 20, 30] + [0] * 765)
    pal.save(path)
    img = load_image(path)
    assert img.channels == 3
    assert img.pixels[:3] == bytes([10, 20, 30])


def test_sixteen_bit_rejected(tmp_path):
    path = tmp_path / "deep.png"
    Image.new("I;16", (2, 2), 0).save(path)
    with pytest.raises(UnsupportedImageError):
        load_image(path)


def test_unsupported_format_rejected(tmp_path):
    path = tmp_path / "x.tiff"
    Image.new("RGB", (2, 2)).save(path, format="TIFF")
    with pytest.raises(UnsupportedImageError):
        load_image(path)


def test_missing_file(tmp_path):
    with pytest.raises(ImageIOError):
        load_image(tmp_path / "nope.png")


def test_not_an_image(tmp_path):
    path = tmp_path / "junk.png"
    path.write_bytes(b"definitely not a png")
    with pytest.raises(UnsupportedImageError):
        load_image(path)


def test_buffer_invariants():
    with pytest.raises(UnsupportedImageError):
        ImageBuffer(2, 2, 3, b"\x00" * 11)
    with pytest.raises(UnsupportedImageError):
        ImageBuffer(0, 2, 3, b"")
    with pytest.raises(UnsupportedImageError):
        ImageBuffer(2, 2, 2, b"\x00" * 8)


def test_unwritable_path(tmp_path, rng):
    img = random_image(rng, 4, 4, 3)
    with pytest.raises(ImageIOError):
        save_lossless(img, tmp_path / "no" / "such" / "dir" / "f.png")
