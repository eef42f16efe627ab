"""Regions of interest: bounding boxes, run-length masks, patch serialization.

The run-length form is canonical: runs alternate between 0s and 1s over
the box in row-major order and always begin with the count of leading
zeros (which may itself be zero). Two equal masks therefore always
encode to the same runs, which keeps manifests comparable byte-for-byte.

Patch bytes are the masked pixels scanned row-major within the box with
channels interleaved. Both the cipher and the restore path rely on this
single ordering.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError, UnknownVersionError, ValidationError
from .image import ImageBuffer

REGION_KINDS = ("object", "face", "text")
REGIONS_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box: top-left corner (p, q), width l, height b, in pixels."""

    p: int
    q: int
    l: int
    b: int

    def __post_init__(self):
        if self.l < 1 or self.b < 1:
            raise GeometryError(f"box extent must be >= 1, got {self.l}x{self.b}")
        if self.p < 0 or self.q < 0:
            raise GeometryError(f"box corner must be >= 0, got ({self.p}, {self.q})")

    def validate_for(self, width: int, height: int) -> None:
        if self.p + self.l > width or self.q + self.b > height:
            raise GeometryError(
                f"box ({self.p},{self.q},{self.l},{self.b}) exceeds "
                f"{width}x{height} image"
            )

    @property
    def area(self) -> int:
        return self.l * self.b

    def center(self) -> tuple[float, float]:
        return (self.p + self.l / 2.0, self.q + self.b / 2.0)


@dataclass(frozen=True)
class MaskRLE:
    """Alternating run lengths of 0s and 1s, leading zero-run explicit."""

    runs: tuple[int, ...]

    def __post_init__(self):
        runs = tuple(int(r) for r in self.runs)
        object.__setattr__(self, "runs", runs)
        if not runs:
            raise ValidationError("mask runs must be non-empty")
        if any(r < 0 for r in runs):
            raise ValidationError("mask runs must be non-negative")
        if any(r == 0 for r in runs[1:]):
            raise ValidationError("only the leading zero-run may be zero")

    @property
    def cell_count(self) -> int:
        return sum(self.runs)

    @property
    def popcount(self) -> int:
        """Number of 1-cells (odd-indexed runs count the 1s)."""
        return sum(self.runs[1::2])


def rle_encode(mask, l: int, b: int) -> MaskRLE:
    """Encode a flat row-major bit sequence of length l*b to canonical runs."""
    bits = np.asarray(mask).ravel()
    if bits.size != l * b:
        raise GeometryError(f"mask has {bits.size} cells, expected {l * b} ({l}x{b})")
    bits = bits.astype(bool)
    # boundaries between unequal neighbours give the run structure
    change = np.flatnonzero(bits[1:] != bits[:-1]) + 1
    edges = np.concatenate(([0], change, [bits.size]))
    runs = np.diff(edges).tolist()
    if bits[0]:
        runs = [0] + runs
    return MaskRLE(tuple(runs))


def rle_decode(rle: MaskRLE, l: int, b: int) -> np.ndarray:
    """Decode canonical runs to a flat boolean sequence of length l*b."""
    if rle.cell_count != l * b:
        raise GeometryError(
            f"mask runs sum to {rle.cell_count}, expected {l * b} ({l}x{b})"
        )
    values = np.arange(len(rle.runs)) % 2 == 1
    return np.repeat(values, rle.runs)


def full_mask(l: int, b: int) -> MaskRLE:
    return MaskRLE((0, l * b))


@dataclass(frozen=True)
class Region:
    """One detected instance: class, box, optional per-pixel mask."""

    id: int
    kind: str
    class_label: str
    bbox: BoundingBox
    mask: MaskRLE | None = None
    confidence: float = 1.0
    identity: str | None = None

    def __post_init__(self):
        if self.id < 0:
            raise ValidationError(f"region id must be non-negative, got {self.id}")
        if self.kind not in REGION_KINDS:
            raise ValidationError(f"unknown region kind {self.kind!r}")
        if not (0.0 <= self.confidence <= 1.0):
            raise ValidationError(f"confidence must be in [0,1], got {self.confidence}")
        if self.mask is not None and self.mask.cell_count != self.bbox.area:
            raise ValidationError(
                f"region {self.id}: mask covers {self.mask.cell_count} cells, "
                f"box has {self.bbox.area}"
            )

    @property
    def pixel_count(self) -> int:
        """Pixels the region actually covers (mask popcount, or the full box)."""
        return self.bbox.area if self.mask is None else self.mask.popcount


def _mask_bits_2d(bbox: BoundingBox, mask: MaskRLE | None) -> np.ndarray | None:
    """Mask as a (b, l) boolean array, or None when it covers the whole box."""
    if mask is None or mask.popcount == mask.cell_count:
        return None
    return rle_decode(mask, bbox.l, bbox.b).reshape(bbox.b, bbox.l)


def extract_from_array(arr: np.ndarray, bbox: BoundingBox, mask: MaskRLE | None) -> bytes:
    """extract_patch over an (h, w, c) array instead of an ImageBuffer."""
    h, w = arr.shape[:2]
    bbox.validate_for(w, h)
    if mask is not None and mask.cell_count != bbox.area:
        raise GeometryError(
            f"mask runs sum to {mask.cell_count}, box has {bbox.area} cells"
        )
    window = arr[bbox.q : bbox.q + bbox.b, bbox.p : bbox.p + bbox.l]
    bits = _mask_bits_2d(bbox, mask)
    if bits is None:
        return np.ascontiguousarray(window).tobytes()
    return window[bits].tobytes()


def extract_patch(img: ImageBuffer, bbox: BoundingBox, mask: MaskRLE | None = None) -> bytes:
    """Bytes of the masked pixels, row-major within the box, channels interleaved."""
    return extract_from_array(img.as_array(), bbox, mask)


def write_patch(
    img: ImageBuffer, bbox: BoundingBox, mask: MaskRLE | None, data: bytes
) -> ImageBuffer:
    """Inverse of extract_patch; pixels outside the mask are untouched."""
    bbox.validate_for(img.width, img.height)
    canvas = np.array(img.as_array())  # writable copy
    write_patch_into(canvas, bbox, mask, data)
    return ImageBuffer(img.width, img.height, img.channels, canvas.tobytes())


def write_patch_into(
    canvas: np.ndarray, bbox: BoundingBox, mask: MaskRLE | None, data: bytes
) -> None:
    """Write patch bytes into a writable (h, w, c) canvas in place."""
    h, w, c = canvas.shape
    bbox.validate_for(w, h)
    count = bbox.area if mask is None else mask.popcount
    if len(data) != count * c:
        raise GeometryError(
            f"patch has {len(data)} bytes, expected {count * c} "
            f"({count} pixels x {c} channels)"
        )
    window = canvas[bbox.q : bbox.q + bbox.b, bbox.p : bbox.p + bbox.l]
    bits = _mask_bits_2d(bbox, mask)
    flat = np.frombuffer(data, dtype=np.uint8)
    if bits is None:
        window[:] = flat.reshape(bbox.b, bbox.l, c)
    else:
        window[bits] = flat.reshape(count, c)


def parse_regions(doc: dict, width: int | None = None, height: int | None = None):
    """Validate a regions document (schema v1) and build Region objects.

    Returns ((width, height), [Region]). When width/height are given they
    must match the document's image block, so a document produced for one
    image cannot silently drive alteration of another.
    """
    if not isinstance(doc, dict):
        raise ValidationError("regions document must be a JSON object")
    version = doc.get("schema_version")
    if version != REGIONS_SCHEMA_VERSION:
        raise UnknownVersionError(f"unknown regions schema_version {version!r}")
    image = doc.get("image")
    if not isinstance(image, dict) or "width" not in image or "height" not in image:
        raise ValidationError("regions document missing image {width, height}")
    doc_w, doc_h = int(image["width"]), int(image["height"])
    if doc_w < 1 or doc_h < 1:
        raise ValidationError(f"invalid image dimensions {doc_w}x{doc_h}")
    if width is not None and (doc_w, doc_h) != (width, height):
        raise ValidationError(
            f"regions document is for a {doc_w}x{doc_h} image, "
            f"target image is {width}x{height}"
        )
    raw = doc.get("regions")
    if not isinstance(raw, list):
        raise ValidationError("regions document missing regions array")

    regions: list[Region] = []
    seen_ids: set[int] = set()
    for entry in raw:
        try:
            rid = int(entry["id"])
            kind = entry["kind"]
            label = str(entry["class_label"])
            p, q, l, b = (int(v) for v in entry["bbox"])
            confidence = float(entry.get("confidence", 1.0))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed region entry: {entry!r}") from exc
        if rid in seen_ids:
            raise ValidationError(f"duplicate region id {rid}")
        seen_ids.add(rid)
        try:
            bbox = BoundingBox(p, q, l, b)
            bbox.validate_for(doc_w, doc_h)
            mask = None
            if entry.get("mask_rle") is not None:
                mask = MaskRLE(tuple(int(r) for r in entry["mask_rle"]))
            region = Region(
                id=rid,
                kind=kind,
                class_label=label,
                bbox=bbox,
                mask=mask,
                confidence=confidence,
                identity=entry.get("identity"),
            )
        except (GeometryError, ValidationError) as exc:
            raise ValidationError(f"region {rid}: {exc}") from exc
        regions.append(region)
    return (doc_w, doc_h), regions


def region_to_entry(region: Region) -> dict:
    """One region as a schema-v1 JSON entry (canonical field order)."""
    entry = {
        "id": region.id,
        "kind": region.kind,
        "class_label": region.class_label,
        "bbox": [region.bbox.p, region.bbox.q, region.bbox.l, region.bbox.b],
        "confidence": region.confidence,
    }
    if region.mask is not None:
        entry["mask_rle"] = list(region.mask.runs)
    if region.identity is not None:
        entry["identity"] = region.identity
    return entry


def regions_document(width: int, height: int, regions) -> dict:
    """Schema-v1 document for a list of regions."""
    return {
        "schema_version": REGIONS_SCHEMA_VERSION,
        "image": {"width": width, "height": height},
        "regions": [region_to_entry(r) for r in regions],
    }
