"""Regions document (schema v1): builder, run-length masks, strict validation.

This is the wire format between detectors and the protection tool; the
schema is documented alongside the manifest format in the main
repository (docs/formats.md). Field order is canonical so documents
diff cleanly: schema_version, image, regions; region entries carry
id, kind, class_label, bbox, confidence, mask_rle, identity.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import DocumentError

SCHEMA_VERSION = 1
KINDS = ("object", "face", "text")


def rle_encode(bits: np.ndarray) -> list[int]:
    """Row-major alternating runs of 0s/1s, leading zero-run explicit."""
    flat = np.asarray(bits, dtype=bool).ravel()
    change = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    edges = np.concatenate(([0], change, [flat.size]))
    runs = np.diff(edges).tolist()
    if flat[0]:
        runs = [0] + runs
    return [int(r) for r in runs]


def make_region(
    region_id: int,
    kind: str,
    class_label: str,
    bbox: tuple[int, int, int, int],
    confidence: float,
    mask: np.ndarray | None = None,
    identity: str | None = None,
) -> dict:
    """One region entry in canonical field order. mask is a (b, l) bool array."""
    p, q, l, b = (int(v) for v in bbox)
    entry = {
        "id": int(region_id),
        "kind": kind,
        "class_label": str(class_label),
        "bbox": [p, q, l, b],
        "confidence": round(float(confidence), 6),
    }
    if mask is not None:
        if mask.shape != (b, l):
            raise DocumentError(f"mask shape {mask.shape} does not match box {l}x{b}")
        entry["mask_rle"] = rle_encode(mask)
    if identity is not None:
        entry["identity"] = str(identity)
    return entry


def build_document(width: int, height: int, regions: list[dict]) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "image": {"width": int(width), "height": int(height)},
        "regions": regions,
    }
    validate_document(doc)
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def validate_document(doc: dict) -> None:
    """Raise DocumentError unless doc is a valid schema-v1 regions document."""
    if not isinstance(doc, dict):
        raise DocumentError("document must be a JSON object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise DocumentError(f"schema_version must be {SCHEMA_VERSION}")
    image = doc.get("image")
    if not isinstance(image, dict):
        raise DocumentError("missing image object")
    try:
        width, height = int(image["width"]), int(image["height"])
    except (KeyError, TypeError, ValueError):
        raise DocumentError("image must carry integer width and height")
    if width < 1 or height < 1:
        raise DocumentError(f"bad image dimensions {width}x{height}")
    regions = doc.get("regions")
    if not isinstance(regions, list):
        raise DocumentError("regions must be an array")
    seen = set()
    for i, entry in enumerate(regions):
        where = f"regions[{i}]"
        if not isinstance(entry, dict):
            raise DocumentError(f"{where}: must be an object")
        try:
            rid = int(entry["id"])
            kind = entry["kind"]
            label = entry["class_label"]
            p, q, l, b = (int(v) for v in entry["bbox"])
            confidence = float(entry["confidence"])
        except (KeyError, TypeError, ValueError):
            raise DocumentError(f"{where}: missing or mistyped required field")
        if rid < 0:
            raise DocumentError(f"{where}: id must be non-negative")
        if rid in seen:
            raise DocumentError(f"{where}: duplicate id {rid}")
        seen.add(rid)
        if kind not in KINDS:
            raise DocumentError(f"{where}: unknown kind {kind!r}")
        if not isinstance(label, str) or not label:
            raise DocumentError(f"{where}: class_label must be a non-empty string")
        if l < 1 or b < 1 or p < 0 or q < 0 or p + l > width or q + b > height:
            raise DocumentError(
                f"{where}: box ({p},{q},{l},{b}) outside {width}x{height} image"
            )
        if not (0.0 <= confidence <= 1.0):
            raise DocumentError(f"{where}: confidence {confidence} outside [0,1]")
        runs = entry.get("mask_rle")
        if runs is not None:
            if not isinstance(runs, list) or not runs:
                raise DocumentError(f"{where}: mask_rle must be a non-empty array")
            values = [int(r) for r in runs]
            if any(v < 0 for v in values) or any(v == 0 for v in values[1:]):
                raise DocumentError(f"{where}: non-canonical mask runs")
            if sum(values) != l * b:
                raise DocumentError(
                    f"{where}: mask runs sum to {sum(values)}, box has {l * b} cells"
                )
        identity = entry.get("identity")
        if identity is not None and (not isinstance(identity, str) or not identity):
            raise DocumentError(f"{where}: identity must be a non-empty string")
