"""Heuristic text-band detector (optional, off by default).

No pretrained text model ships with this sidecar, so this is a classical
stroke-density heuristic: edge magnitude, Otsu threshold, horizontal
dilation to fuse letters into lines, then connected components filtered
to wide, line-shaped boxes. Good enough to flag document-style text
blocks for alteration; not a reading system.
"""

from __future__ import annotations

import numpy as np
from skimage.color import rgb2gray
from skimage.filters import sobel, threshold_otsu
from skimage.measure import label, regionprops
from skimage.morphology import binary_dilation

MIN_AREA = 60
MAX_AREA_FRACTION = 0.5
MIN_ASPECT = 1.6  # text lines are wider than tall
TEXT_CONFIDENCE = 0.5  # heuristic detections carry a flat mid confidence


def detect_text(image: np.ndarray) -> list[dict]:
    """Text-line candidate boxes as {class_label, bbox, confidence} dicts."""
    gray = rgb2gray(image[:, :, :3]) if image.ndim == 3 else image
    edges = sobel(gray.astype(float))
    if float(edges.max()) <= 0:
        return []
    binary = edges > threshold_otsu(edges)
    fused = binary_dilation(binary, footprint=np.ones((1, 15), dtype=bool))
    height, width = gray.shape
    out = []
    for component in regionprops(label(fused)):
        q0, p0, q1, p1 = component.bbox
        l, b = p1 - p0, q1 - q0
        if l * b < MIN_AREA or l * b > MAX_AREA_FRACTION * width * height:
            continue
        if l < MIN_ASPECT * b:
            continue
        out.append(
            {
                "class_label": "text",
                "bbox": (p0, q0, l, b),
                "confidence": TEXT_CONFIDENCE,
            }
        )
    out.sort(key=lambda d: (d["bbox"][1], d["bbox"][0]))
    return out
