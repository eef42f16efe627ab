"""Reconstruction manifest: canonical JSON codec and PNG transport.

The encoding is byte-deterministic: fixed key order, no insignificant
whitespace, binary fields base64. Equal manifests always serialize to
identical bytes, which makes golden-file tests and cross-language
comparison possible.

Transport is a PNG ancillary text chunk with keyword "SISA" (zTXt when
the document exceeds 1 KiB), inserted by chunk surgery so the IDAT
stream is never touched, plus an optional "<image>.sisa.json" sidecar.
"""

from __future__ import annotations

import base64
import json
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .crypto import IV_BYTES, SALT_BYTES, RegionCipherRecord
from .errors import (
    GeometryError,
    ImageIOError,
    MalformedDocumentError,
    ManifestInvariantError,
    MissingManifestError,
    UnknownVersionError,
    ValidationError,
)
from .regions import BoundingBox, MaskRLE, rle_decode

MANIFEST_VERSION = 1
CHUNK_KEYWORD = b"SISA"
SIDECAR_SUFFIX = ".sisa.json"
_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
_COMPRESS_THRESHOLD = 1024  # tEXt below, zTXt above


@dataclass(frozen=True)
class ReconstructionManifest:
    """Everything restore needs except the passphrase."""

    original_format: str
    width: int
    height: int
    channels: int
    kdf_id: str
    kdf_params: dict
    salt: bytes
    level: int
    mode: str
    sigma: float
    target_fraction: float
    achieved_fraction: float
    shortfall: bool
    records: tuple[RegionCipherRecord, ...]
    version: int = MANIFEST_VERSION


def _b64(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def _unb64(text: str, what: str) -> bytes:
    try:
        return base64.b64decode(text, validate=True)
    except (ValueError, TypeError) as exc:
        raise MalformedDocumentError(f"invalid base64 in {what}") from exc


def _record_to_obj(rec: RegionCipherRecord) -> dict:
    return {
        "id": rec.region_id,
        "kind": rec.kind,
        "class_label": rec.class_label,
        "bbox": [rec.bbox.p, rec.bbox.q, rec.bbox.l, rec.bbox.b],
        "mask": None if rec.mask is None else list(rec.mask.runs),
        "mode": rec.mode,
        "iv": _b64(rec.iv),
        "byte_length": rec.byte_length,
        "plaintext_crc32": rec.plaintext_crc32,
        "stored_ciphertext": None
        if rec.stored_ciphertext is None
        else _b64(rec.stored_ciphertext),
    }


def encode_manifest(m: ReconstructionManifest) -> bytes:
    """Canonical UTF-8 JSON bytes; equal manifests give identical bytes."""
    obj = {
        "version": m.version,
        "original_format": m.original_format,
        "width": m.width,
        "height": m.height,
        "channels": m.channels,
        "kdf": {"id": m.kdf_id, "salt": _b64(m.salt), "params": m.kdf_params},
        "policy": {"level": m.level, "mode": m.mode, "sigma": m.sigma},
        "coverage": {
            "target": m.target_fraction,
            "achieved": m.achieved_fraction,
            "shortfall": m.shortfall,
        },
        "records": [_record_to_obj(r) for r in m.records],
    }
    return json.dumps(
        obj, separators=(",", ":"), ensure_ascii=True, allow_nan=False
    ).encode("utf-8")


def _parse_record(entry: dict, channels: int, index: int) -> RegionCipherRecord:
    try:
        region_id = int(entry["id"])
        kind = str(entry["kind"])
        label = str(entry["class_label"])
        p, q, l, b = (int(v) for v in entry["bbox"])
        mask_runs = entry["mask"]
        mode = str(entry["mode"])
        iv = _unb64(str(entry["iv"]), f"records[{index}].iv")
        byte_length = int(entry["byte_length"])
        crc = int(entry["plaintext_crc32"])
        stored = entry["stored_ciphertext"]
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedDocumentError(f"malformed record at index {index}") from exc
    if not (0 <= crc < 2**32):
        raise ManifestInvariantError(f"records[{index}]: crc32 out of range")
    try:
        bbox = BoundingBox(p, q, l, b)
        mask = None if mask_runs is None else MaskRLE(tuple(int(r) for r in mask_runs))
        record = RegionCipherRecord(
            region_id=region_id,
            bbox=bbox,
            mask=mask,
            iv=iv,
            byte_length=byte_length,
            plaintext_crc32=crc,
            mode=mode,
            stored_ciphertext=None
            if stored is None
            else _unb64(str(stored), f"records[{index}].stored_ciphertext"),
            kind=kind,
            class_label=label,
        )
    except (GeometryError, ValidationError) as exc:
        raise ManifestInvariantError(f"records[{index}]: {exc}") from exc
    if mask is not None and mask.cell_count != bbox.area:
        raise ManifestInvariantError(
            f"records[{index}]: mask covers {mask.cell_count} cells, "
            f"box has {bbox.area}"
        )
    pixels = bbox.area if mask is None else mask.popcount
    if byte_length != pixels * channels:
        raise ManifestInvariantError(
            f"records[{index}]: byte_length {byte_length} != "
            f"{pixels} pixels x {channels} channels"
        )
    return record


def decode_manifest(data: bytes) -> ReconstructionManifest:
    """Strict inverse of encode_manifest."""
    try:
        obj = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedDocumentError(f"manifest is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise MalformedDocumentError("manifest must be a JSON object")
    version = obj.get("version")
    if version != MANIFEST_VERSION:
        raise UnknownVersionError(f"unknown manifest version {version!r}")
    try:
        width = int(obj["width"])
        height = int(obj["height"])
        channels = int(obj["channels"])
        kdf = obj["kdf"]
        kdf_id = str(kdf["id"])
        salt = _unb64(str(kdf["salt"]), "kdf.salt")
        kdf_params = dict(kdf["params"])
        policy = obj["policy"]
        level = int(policy["level"])
        mode = str(policy["mode"])
        sigma = float(policy["sigma"])
        coverage = obj["coverage"]
        target = float(coverage["target"])
        achieved = float(coverage["achieved"])
        shortfall = bool(coverage["shortfall"])
        raw_records = obj["records"]
        original_format = str(obj["original_format"])
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedDocumentError(f"manifest missing or mistyped field: {exc}") from exc
    if not isinstance(raw_records, list):
        raise MalformedDocumentError("records must be an array")
    if width < 1 or height < 1 or channels not in (1, 3, 4):
        raise ManifestInvariantError(
            f"invalid geometry {width}x{height}x{channels}"
        )
    if len(salt) != SALT_BYTES:
        raise ManifestInvariantError(f"salt must be {SALT_BYTES} bytes, got {len(salt)}")

    records = tuple(
        _parse_record(entry, channels, i) for i, entry in enumerate(raw_records)
    )
    _check_disjoint(records, width, height)
    return ReconstructionManifest(
        original_format=original_format,
        width=width,
        height=height,
        channels=channels,
        kdf_id=kdf_id,
        kdf_params=kdf_params,
        salt=salt,
        level=level,
        mode=mode,
        sigma=sigma,
        target_fraction=target,
        achieved_fraction=achieved,
        shortfall=shortfall,
        records=records,
        version=version,
    )


def _check_disjoint(records, width: int, height: int) -> None:
    covered = np.zeros((height, width), dtype=bool)
    for i, rec in enumerate(records):
        bbox = rec.bbox
        try:
            bbox.validate_for(width, height)
        except GeometryError as exc:
            raise ManifestInvariantError(f"records[{i}]: {exc}") from exc
        window = covered[bbox.q : bbox.q + bbox.b, bbox.p : bbox.p + bbox.l]
        if rec.mask is None:
            if window.any():
                raise ManifestInvariantError(f"records[{i}] overlaps an earlier record")
            window[:] = True
        else:
            bits = rle_decode(rec.mask, bbox.l, bbox.b).reshape(bbox.b, bbox.l)
            if (window & bits).any():
                raise ManifestInvariantError(f"records[{i}] overlaps an earlier record")
            window |= bits


# --- PNG chunk transport ---------------------------------------------------


def _iter_chunks(data: bytes):
    """Yield (type, data, start, end) for each chunk; validates framing only."""
    offset = len(_PNG_SIGNATURE)
    size = len(data)
    while offset < size:
        if offset + 8 > size:
            raise MalformedDocumentError("truncated PNG chunk header")
        length = int.from_bytes(data[offset : offset + 4], "big")
        ctype = data[offset + 4 : offset + 8]
        end = offset + 8 + length + 4
        if end > size:
            raise MalformedDocumentError(f"truncated PNG chunk {ctype!r}")
        yield ctype, data[offset + 8 : offset + 8 + length], offset, end
        if ctype == b"IEND":
            return
        offset = end
    raise MalformedDocumentError("PNG ends without IEND chunk")


def _build_chunk(ctype: bytes, payload: bytes) -> bytes:
    crc = zlib.crc32(ctype + payload) & 0xFFFFFFFF
    return len(payload).to_bytes(4, "big") + ctype + payload + crc.to_bytes(4, "big")


def _manifest_chunk(manifest_bytes: bytes) -> bytes:
    if len(manifest_bytes) > _COMPRESS_THRESHOLD:
        payload = CHUNK_KEYWORD + b"\x00\x00" + zlib.compress(manifest_bytes, 9)
        return _build_chunk(b"zTXt", payload)
    return _build_chunk(b"tEXt", CHUNK_KEYWORD + b"\x00" + manifest_bytes)


def _chunk_keyword(payload: bytes) -> bytes:
    return payload.split(b"\x00", 1)[0]


def _read_png(path) -> bytes:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ImageIOError(f"cannot read {path}: {exc}") from exc
    if not data.startswith(_PNG_SIGNATURE):
        raise ValidationError(f"{path} is not a PNG file")
    return data


def embed_manifest(png_path, manifest: ReconstructionManifest) -> None:
    """Insert/replace the SISA text chunk; pixel data bytes are untouched."""
    data = _read_png(png_path)
    out = bytearray(_PNG_SIGNATURE)
    inserted = False
    for ctype, payload, start, end in _iter_chunks(data):
        if ctype in (b"tEXt", b"zTXt", b"iTXt") and _chunk_keyword(payload) == CHUNK_KEYWORD:
            continue  # replace, never duplicate
        if ctype == b"IDAT" and not inserted:
            out += _manifest_chunk(encode_manifest(manifest))
            inserted = True
        out += data[start:end]
    if not inserted:
        raise ValidationError(f"{png_path} has no IDAT chunk")
    try:
        Path(png_path).write_bytes(bytes(out))
    except OSError as exc:
        raise ImageIOError(f"cannot write {png_path}: {exc}") from exc


def extract_manifest(png_path) -> ReconstructionManifest:
    """Read back the embedded manifest; exact inverse of embed_manifest."""
    data = _read_png(png_path)
    for ctype, payload, _, _ in _iter_chunks(data):
        if ctype == b"tEXt" and _chunk_keyword(payload) == CHUNK_KEYWORD:
            return decode_manifest(payload[len(CHUNK_KEYWORD) + 1 :])
        if ctype == b"zTXt" and _chunk_keyword(payload) == CHUNK_KEYWORD:
            body = payload[len(CHUNK_KEYWORD) + 1 :]
            if not body or body[0] != 0:
                raise MalformedDocumentError("unsupported zTXt compression method")
            try:
                return decode_manifest(zlib.decompress(body[1:]))
            except zlib.error as exc:
                raise MalformedDocumentError(f"corrupt zTXt payload: {exc}") from exc
    raise MissingManifestError(f"{png_path} carries no SISA manifest chunk")


# --- sidecar transport -----------------------------------------------------


def sidecar_path(image_path) -> Path:
    return Path(str(image_path) + SIDECAR_SUFFIX)


def write_sidecar(image_path, manifest: ReconstructionManifest) -> Path:
    path = sidecar_path(image_path)
    try:
        path.write_bytes(encode_manifest(manifest))
    except OSError as exc:
        raise ImageIOError(f"cannot write sidecar {path}: {exc}") from exc
    return path


def resolve_manifest(image_path, explicit_path=None) -> ReconstructionManifest:
    """Locate a manifest: explicit path wins, then embedded chunk, then sidecar."""
    if explicit_path is not None:
        try:
            data = Path(explicit_path).read_bytes()
        except OSError as exc:
            raise ImageIOError(f"cannot read manifest {explicit_path}: {exc}") from exc
        return decode_manifest(data)
    try:
        return extract_manifest(image_path)
    except MissingManifestError:
        pass  # corrupt embedded chunks surface as errors, only absence falls through
    side = sidecar_path(image_path)
    if side.exists():
        return decode_manifest(side.read_bytes())
    raise MissingManifestError(
        f"no manifest found for {image_path}: no embedded chunk and no {side.name}"
    )
