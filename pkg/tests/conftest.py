"""Shared generators for randomized tests. Everything is seeded."""

import numpy as np
import pytest

from sisa import ImageBuffer, BoundingBox, MaskRLE, Region, rle_encode

KINDS = ("object", "face", "text")
TEST_KDF = {"iterations": 1000}


def random_image(rng, width=None, height=None, channels=None, max_side=64):
    width = width or int(rng.integers(1, max_side + 1))
    height = height or int(rng.integers(1, max_side + 1))
    channels = channels or int(rng.choice([1, 3, 4]))
    arr = rng.integers(0, 256, size=(height, width, channels), dtype=np.uint8)
    return ImageBuffer.from_array(arr)


def random_bbox(rng, width, height):
    l = int(rng.integers(1, width + 1))
    b = int(rng.integers(1, height + 1))
    p = int(rng.integers(0, width - l + 1))
    q = int(rng.integers(0, height - b + 1))
    return BoundingBox(p, q, l, b)


def random_mask(rng, bbox, density=None):
    density = rng.uniform(0.1, 0.95) if density is None else density
    bits = rng.random(bbox.l * bbox.b) < density
    return rle_encode(bits, bbox.l, bbox.b)


def random_regions(rng, width, height, count, masked_ratio=0.5, identities=()):
    regions = []
    for i in range(count):
        bbox = random_bbox(rng, width, height)
        mask = random_mask(rng, bbox) if rng.random() < masked_ratio else None
        identity = None
        if identities and rng.random() < 0.3:
            identity = str(rng.choice(list(identities)))
        regions.append(
            Region(
                id=i,
                kind=str(rng.choice(KINDS)),
                class_label=f"thing-{i}",
                bbox=bbox,
                mask=mask,
                confidence=float(rng.random()),
                identity=identity,
            )
        )
    return regions


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0FFEE)
