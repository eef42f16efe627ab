"""8-bit raster image buffer and lossless file I/O.

Pixels are kept as raw bytes in row-major, channel-interleaved order so
that patch extraction, encryption, and write-back all agree on a single
canonical layout. Output is always PNG: a lossy recompression would
corrupt ciphertext pixels, so the original format is only remembered as
a provenance string.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ImageIOError, UnsupportedImageError

# Pillow modes we can map onto {1, 3, 4} 8-bit channels, possibly via a
# lossless-at-8-bit conversion first.
_DIRECT_MODES = {"L": 1, "RGB": 3, "RGBA": 4}
_CONVERTIBLE = {"P": "RGB", "PA": "RGBA", "LA": "RGBA", "CMYK": "RGB", "1": "L"}


@dataclass(frozen=True)
class ImageBuffer:
    """Decoded raster: dimensions, channel count, and interleaved pixel bytes."""

    width: int
    height: int
    channels: int
    pixels: bytes

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise UnsupportedImageError(
                f"image dimensions must be >= 1, got {self.width}x{self.height}"
            )
        if self.channels not in (1, 3, 4):
            raise UnsupportedImageError(
                f"channel count must be 1, 3 or 4, got {self.channels}"
            )
        expected = self.width * self.height * self.channels
        if len(self.pixels) != expected:
            raise UnsupportedImageError(
                f"pixel buffer has {len(self.pixels)} bytes, "
                f"expected {expected} for {self.width}x{self.height}x{self.channels}"
            )

    def as_array(self) -> np.ndarray:
        """Read-only (height, width, channels) uint8 view of the pixels."""
        arr = np.frombuffer(self.pixels, dtype=np.uint8)
        return arr.reshape(self.height, self.width, self.channels)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "ImageBuffer":
        if arr.ndim == 2:
            arr = arr[:, :, np.newaxis]
        if arr.dtype != np.uint8:
            raise UnsupportedImageError(f"expected uint8 array, got {arr.dtype}")
        h, w, c = arr.shape
        return cls(w, h, c, np.ascontiguousarray(arr).tobytes())


def _pil_mode(channels: int) -> str:
    return {1: "L", 3: "RGB", 4: "RGBA"}[channels]


def load_image(path) -> ImageBuffer:
    """Decode a PNG/JPEG/BMP file into an 8-bit ImageBuffer.

    Grayscale maps to 1 channel, RGB to 3, RGBA to 4. Palette, LA and
    CMYK images are converted losslessly at 8 bits; higher bit depths
    (16-bit PNG, 32-bit int/float TIFF-style modes) are rejected rather
    than silently truncated.
    """
    try:
        im = Image.open(path)
        im.load()
    except (FileNotFoundError, PermissionError, IsADirectoryError) as exc:
        raise ImageIOError(f"cannot read image file: {exc}") from exc
    except UnidentifiedImageError as exc:
        raise UnsupportedImageError(f"not a supported raster format: {path}") from exc
    except OSError as exc:
        raise ImageIOError(f"cannot read image file: {exc}") from exc

    if im.format not in ("PNG", "JPEG", "BMP"):
        raise UnsupportedImageError(
            f"unsupported format {im.format!r}; expected PNG, JPEG or BMP"
        )
    mode = im.mode
    if mode in ("I", "I;16", "I;16B", "I;16L", "I;16N", "F"):
        raise UnsupportedImageError(
            f"bit depth of mode {mode!r} is not 8; only 8-bit channels are supported"
        )
    if mode in _CONVERTIBLE:
        im = im.convert(_CONVERTIBLE[mode])
        mode = im.mode
    if mode not in _DIRECT_MODES:
        raise UnsupportedImageError(f"unsupported pixel mode {mode!r}")

    channels = _DIRECT_MODES[mode]
    arr = np.asarray(im, dtype=np.uint8)
    if arr.ndim == 2:
        arr = arr[:, :, np.newaxis]
    return ImageBuffer(im.width, im.height, channels, arr.tobytes())


def probe_format(path) -> str:
    """Container format name of an image file (provenance only)."""
    try:
        with Image.open(path) as im:
            return im.format or "PNG"
    except (OSError, UnidentifiedImageError):
        return "PNG"


def save_lossless(img: ImageBuffer, path) -> None:
    """Write the buffer as PNG; a later load_image returns it bit-identically."""
    arr = img.as_array()
    if img.channels == 1:
        pil = Image.fromarray(arr[:, :, 0], mode="L")
    else:
        pil = Image.fromarray(arr, mode=_pil_mode(img.channels))
    try:
        pil.save(path, format="PNG")
    except (OSError, ValueError) as exc:
        raise ImageIOError(f"cannot write PNG to {path}: {exc}") from exc
