import json
from pathlib import Path

import numpy as np
import pytest

from sisa import (
    BoundingBox,
    ImageBuffer,
    MalformedDocumentError,
    ManifestInvariantError,
    MaskRLE,
    MissingManifestError,
    ReconstructionManifest,
    UnknownVersionError,
    ValidationError,
    decode_manifest,
    embed_manifest,
    encode_manifest,
    extract_manifest,
    load_image,
    resolve_manifest,
    save_lossless,
    sidecar_path,
    write_sidecar,
)
from sisa.crypto import RegionCipherRecord

from conftest import random_image

DATA = Path(__file__).parent / "data"


def sample_manifest(records=(), **over):
    fields = dict(
        original_format="PNG",
        width=12,
        height=9,
        channels=3,
        kdf_id="pbkdf2-hmac-sha256",
        kdf_params={"iterations": 1000},
        salt=bytes(16),
        level=3,
        mode="encrypt",
        sigma=8.0,
        target_fraction=0.65,
        achieved_fraction=0.7,
        shortfall=False,
        records=tuple(records),
    )
    fields.update(over)
    return ReconstructionManifest(**fields)


def random_manifest(rng):
    w = int(rng.integers(4, 40))
    h = int(rng.integers(4, 40))
    c = int(rng.choice([1, 3, 4]))
    records = []
    # carve disjoint vertical strips so records never overlap
    x = 0
    for i in range(int(rng.integers(0, 4))):
        remaining = w - x
        if remaining < 1:
            break
        l = int(rng.integers(1, remaining + 1))
        b = int(rng.integers(1, h + 1))
        bbox = BoundingBox(x, int(rng.integers(0, h - b + 1)), l, b)
        x += l
        mode = str(rng.choice(["encrypt", "blur"]))
        if rng.random() < 0.5:
            bits = rng.random(l * b) < 0.6
            from sisa import rle_encode

            mask = rle_encode(bits, l, b)
            count = mask.popcount
        else:
            mask, count = None, l * b
        records.append(
            RegionCipherRecord(
                region_id=i,
                bbox=bbox,
                mask=mask,
                iv=bytes(rng.integers(0, 256, 16, dtype=np.uint8)),
                byte_length=count * c,
                plaintext_crc32=int(rng.integers(0, 2**32)),
                mode=mode,
                stored_ciphertext=(
                    bytes(rng.integers(0, 256, count * c, dtype=np.uint8))
                    if mode == "blur"
                    else None
                ),
                kind=str(rng.choice(["object", "face", "text"])),
                class_label=f"label-{i}",
            )
        )
    return sample_manifest(
        records=records,
        width=w,
        height=h,
        channels=c,
        level=int(rng.integers(1, 6)),
        mode=str(rng.choice(["encrypt", "blur"])),
        sigma=float(rng.uniform(0.5, 16)),
        target_fraction=float(rng.uniform(0.3, 1.0)),
        achieved_fraction=float(rng.uniform(0, 1.0)),
        shortfall=bool(rng.random() < 0.5),
        salt=bytes(rng.integers(0, 256, 16, dtype=np.uint8)),
    )


class TestCodec:
    def test_roundtrip_random(self, rng):
        for _ in range(100):
            manifest = random_manifest(rng)
            assert decode_manifest(encode_manifest(manifest)) == manifest

    def test_equal_manifests_encode_identically(self, rng):
        m1 = random_manifest(rng)
        m2 = ReconstructionManifest(**{f: getattr(m1, f) for f in m1.__dataclass_fields__})
        assert m1 == m2
        assert encode_manifest(m1) == encode_manifest(m2)

    def test_encode_decode_encode_is_stable(self, rng):
        data = encode_manifest(random_manifest(rng))
        assert encode_manifest(decode_manifest(data)) == data

    def test_golden_bytes(self):
        golden = (DATA / "golden_manifest.json").read_bytes()
        manifest = decode_manifest(golden)
        assert encode_manifest(manifest) == golden
        assert manifest.width == 12
        assert manifest.level == 2
        assert len(manifest.records) == 2
        assert manifest.records[1].mode == "blur"
        assert manifest.records[1].stored_ciphertext == bytes(range(64, 76))

    def test_truncated_input(self):
        golden = (DATA / "golden_manifest.json").read_bytes()
        with pytest.raises(MalformedDocumentError):
            decode_manifest(golden[: len(golden) // 2])

    def test_not_json(self):
        with pytest.raises(MalformedDocumentError):
            decode_manifest(b"\xff\xfe binary trash")

    def test_unknown_version(self):
        obj = json.loads((DATA / "golden_manifest.json").read_text())
        obj["version"] = 99
        with pytest.raises(UnknownVersionError):
            decode_manifest(json.dumps(obj).encode())

    def test_overlapping_records_rejected(self):
        rec = dict(
            region_id=0, bbox=BoundingBox(0, 0, 4, 4), mask=None, iv=bytes(16),
            byte_length=48, plaintext_crc32=1, mode="encrypt",
        )
        manifest = sample_manifest(
            records=[RegionCipherRecord(**rec), RegionCipherRecord(**{**rec, "region_id": 1})]
        )
        with pytest.raises(ManifestInvariantError):
            decode_manifest(encode_manifest(manifest))

    def test_byte_length_mismatch_rejected(self):
        rec = RegionCipherRecord(
            region_id=0, bbox=BoundingBox(0, 0, 4, 4), mask=None, iv=bytes(16),
            byte_length=47, plaintext_crc32=1, mode="encrypt",
        )
        with pytest.raises(ManifestInvariantError):
            decode_manifest(encode_manifest(sample_manifest(records=[rec])))

    def test_mask_sum_mismatch_rejected(self):
        golden = json.loads((DATA / "golden_manifest.json").read_text())
        golden["records"][1]["mask"] = [1, 2]
        with pytest.raises(ManifestInvariantError):
            decode_manifest(json.dumps(golden).encode())


class TestPngTransport:
    def protected_png(self, tmp_path, rng, manifest=None):
        img = random_image(rng, 10, 8, 3)
        path = tmp_path / "img.png"
        save_lossless(img, path)
        return img, path, manifest or sample_manifest(width=10, height=8)

    def test_embed_extract_roundtrip(self, tmp_path, rng):
        img, path, manifest = self.protected_png(tmp_path, rng)
        embed_manifest(path, manifest)
        assert extract_manifest(path) == manifest

    def test_pixels_bit_identical_after_embed(self, tmp_path, rng):
        img, path, manifest = self.protected_png(tmp_path, rng)
        embed_manifest(path, manifest)
        assert load_image(path) == img

    def test_small_manifest_uses_text_chunk(self, tmp_path, rng):
        img, path, manifest = self.protected_png(tmp_path, rng)
        embed_manifest(path, manifest)
        assert b"tEXt" in path.read_bytes()

    def test_large_manifest_compressed(self, tmp_path, rng):
        big = random_manifest(rng)
        while len(encode_manifest(big)) <= 1024:
            big = random_manifest(rng)
        img, path, _ = self.protected_png(tmp_path, rng)
        # dimensions must match the manifest being embedded? embedding is
        # transport only, so any PNG hosts any manifest
        embed_manifest(path, big)
        raw = path.read_bytes()
        assert b"zTXt" in raw and b"tEXt" not in raw
        assert extract_manifest(path) == big

    def test_reembed_replaces(self, tmp_path, rng):
        img, path, manifest = self.protected_png(tmp_path, rng)
        embed_manifest(path, manifest)
        second = sample_manifest(width=10, height=8, level=5, mode="blur")
        embed_manifest(path, second)
        assert extract_manifest(path) == second
        assert path.read_bytes().count(b"SISA") == 1

    def test_extract_without_chunk(self, tmp_path, rng):
        _, path, _ = self.protected_png(tmp_path, rng)
        with pytest.raises(MissingManifestError):
            extract_manifest(path)

    def test_non_png_rejected(self, tmp_path):
        path = tmp_path / "x.png"
        path.write_bytes(b"not a png at all")
        with pytest.raises(ValidationError):
            extract_manifest(path)


class TestSidecarAndResolve:
    def test_sidecar_roundtrip(self, tmp_path, rng):
        img = random_image(rng, 6, 6, 3)
        path = tmp_path / "img.png"
        save_lossless(img, path)
        manifest = sample_manifest(width=6, height=6)
        side = write_sidecar(path, manifest)
        assert side == sidecar_path(path)
        assert side.name == "img.png.sisa.json"
        assert decode_manifest(side.read_bytes()) == manifest
        assert resolve_manifest(path) == manifest

    def test_explicit_path_wins(self, tmp_path, rng):
        img = random_image(rng, 6, 6, 3)
        path = tmp_path / "img.png"
        save_lossless(img, path)
        embedded = sample_manifest(width=6, height=6, level=1)
        embed_manifest(path, embedded)
        write_sidecar(path, sample_manifest(width=6, height=6, level=2))
        elsewhere = tmp_path / "other.json"
        other = sample_manifest(width=6, height=6, level=4)
        elsewhere.write_bytes(encode_manifest(other))
        assert resolve_manifest(path, elsewhere) == other

    def test_embedded_beats_sidecar(self, tmp_path, rng):
        img = random_image(rng, 6, 6, 3)
        path = tmp_path / "img.png"
        save_lossless(img, path)
        embedded = sample_manifest(width=6, height=6, level=1)
        embed_manifest(path, embedded)
        write_sidecar(path, sample_manifest(width=6, height=6, level=2))
        assert resolve_manifest(path) == embedded

    def test_nothing_found(self, tmp_path, rng):
        img = random_image(rng, 6, 6, 3)
        path = tmp_path / "img.png"
        save_lossless(img, path)
        with pytest.raises(MissingManifestError):
            resolve_manifest(path)
