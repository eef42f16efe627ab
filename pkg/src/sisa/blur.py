"""Gaussian blur of masked regions via separable convolution.

The 2-D Gaussian weight surface separates into an outer product of
identical 1-D tap vectors, so each axis is convolved independently.
Reads always come from the original image (never from already-altered
neighbours) and image borders are clamp-to-edge replicated. Output is
rounded half-away-from-zero to keep results identical across platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, ValidationError
from .image import ImageBuffer
from .regions import BoundingBox, MaskRLE, _mask_bits_2d


def gaussian_density(x: float, y: float, sigma: float) -> float:
    """Unnormalized 2-D Gaussian weight at (x, y) for the given sigma."""
    return math.exp(-(x * x + y * y) / (2.0 * sigma * sigma)) / (
        2.0 * math.pi * sigma * sigma
    )


@dataclass(frozen=True)
class GaussianKernel:
    """1-D taps whose outer product realizes the 2-D Gaussian weights."""

    sigma: float
    radius: int
    taps: tuple[float, ...]


def gaussian_kernel(sigma: float) -> GaussianKernel:
    """Normalized taps exp(-x^2 / 2 sigma^2) for x in [-radius, radius]."""
    if not (sigma > 0) or not math.isfinite(sigma):
        raise ValidationError(f"sigma must be > 0, got {sigma}")
    radius = math.ceil(3.0 * sigma)
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    taps = np.exp(-(xs * xs) / (2.0 * sigma * sigma))
    taps /= taps.sum()
    return GaussianKernel(sigma=sigma, radius=radius, taps=tuple(taps.tolist()))


def _padded_window(arr: np.ndarray, bbox: BoundingBox, radius: int) -> np.ndarray:
    """Box plus a radius-wide apron, edge-replicated where it leaves the image."""
    h, w = arr.shape[:2]
    x0, x1 = bbox.p - radius, bbox.p + bbox.l + radius
    y0, y1 = bbox.q - radius, bbox.q + bbox.b + radius
    cx0, cx1 = max(0, x0), min(w, x1)
    cy0, cy1 = max(0, y0), min(h, y1)
    window = arr[cy0:cy1, cx0:cx1].astype(np.float64)
    pad = ((cy0 - y0, y1 - cy1), (cx0 - x0, x1 - cx1), (0, 0))
    if any(p > 0 for pair in pad for p in pair):
        window = np.pad(window, pad, mode="edge")
    return window


def _separable_blur_window(
    arr: np.ndarray, bbox: BoundingBox, kernel: GaussianKernel
) -> np.ndarray:
    """Blurred float values for every pixel of the box, shape (b, l, c)."""
    taps = np.asarray(kernel.taps)
    window = _padded_window(arr, bbox, kernel.radius)
    horiz = np.zeros((window.shape[0], bbox.l, window.shape[2]))
    for i, t in enumerate(taps):
        horiz += t * window[:, i : i + bbox.l]
    out = np.zeros((bbox.b, bbox.l, window.shape[2]))
    for i, t in enumerate(taps):
        out += t * horiz[i : i + bbox.b]
    return out


def blur_patch_into(
    canvas: np.ndarray,
    original: np.ndarray,
    bbox: BoundingBox,
    mask: MaskRLE | None,
    sigma: float,
) -> None:
    """Blur the masked pixels of one box in place, reading from `original`."""
    h, w = original.shape[:2]
    bbox.validate_for(w, h)
    if mask is not None and mask.cell_count != bbox.area:
        raise GeometryError(
            f"mask runs sum to {mask.cell_count}, box has {bbox.area} cells"
        )
    if mask is not None and mask.popcount == 0:
        return
    kernel = gaussian_kernel(sigma)
    blurred = _separable_blur_window(original, bbox, kernel)
    # round half away from zero; values are non-negative
    quantized = np.floor(blurred + 0.5).clip(0, 255).astype(np.uint8)
    target = canvas[bbox.q : bbox.q + bbox.b, bbox.p : bbox.p + bbox.l]
    bits = _mask_bits_2d(bbox, mask)
    if bits is None:
        target[:] = quantized
    else:
        target[bits] = quantized[bits]


def blur_region(
    img: ImageBuffer, bbox: BoundingBox, mask: MaskRLE | None, sigma: float
) -> ImageBuffer:
    """New image with the masked pixels of one box Gaussian-blurred."""
    original = img.as_array()
    canvas = np.array(original)
    blur_patch_into(canvas, original, bbox, mask, sigma)
    return ImageBuffer(img.width, img.height, img.channels, canvas.tobytes())
