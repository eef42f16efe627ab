"""Deterministic stub detectors.

Real detections come from an external model process; tests and benchmarks
need region sources that are fast, dependency-free, and identical on
every run. Identical inputs always produce identical documents.
"""

from __future__ import annotations

import math

from .errors import ValidationError
from .regions import BoundingBox, Region, regions_document

STUB_NAMES = ("center-box", "grid")


def center_box_regions(width: int, height: int, fraction: float = 0.30) -> list[Region]:
    """One box at the image center covering ~fraction of the pixels."""
    if not (0.0 < fraction <= 1.0):
        raise ValidationError(f"fraction must be in (0, 1], got {fraction}")
    side = math.sqrt(fraction)
    l = min(width, max(1, round(width * side)))
    b = min(height, max(1, round(height * side)))
    bbox = BoundingBox((width - l) // 2, (height - b) // 2, l, b)
    return [Region(id=0, kind="object", class_label="center-box", bbox=bbox)]


def grid_regions(width: int, height: int, k: int = 3) -> list[Region]:
    """k x k equal boxes tiling the whole image, ids row-major."""
    if k < 1 or k > min(width, height):
        raise ValidationError(f"grid k must be in 1..min(w,h), got {k}")
    xs = [round(i * width / k) for i in range(k + 1)]
    ys = [round(j * height / k) for j in range(k + 1)]
    regions = []
    for j in range(k):
        for i in range(k):
            bbox = BoundingBox(xs[i], ys[j], xs[i + 1] - xs[i], ys[j + 1] - ys[j])
            regions.append(
                Region(
                    id=j * k + i,
                    kind="object",
                    class_label=f"grid-{j}-{i}",
                    bbox=bbox,
                )
            )
    return regions


def stub_regions(
    name: str, width: int, height: int, fraction: float = 0.30, grid_k: int = 3
) -> list[Region]:
    if name == "center-box":
        return center_box_regions(width, height, fraction)
    if name == "grid":
        return grid_regions(width, height, grid_k)
    raise ValidationError(f"unknown stub detector {name!r}; choose from {STUB_NAMES}")


def stub_document(
    name: str, width: int, height: int, fraction: float = 0.30, grid_k: int = 3
) -> dict:
    return regions_document(
        width, height, stub_regions(name, width, height, fraction, grid_k)
    )
