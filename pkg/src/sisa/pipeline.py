"""End-to-end protect and restore pipelines.

protect: prioritize detections, plan coverage for the security level,
then alter each selected region in rank order - AES-CFB ciphertext
written into the pixels, or a Gaussian blur with the encrypted original
patch parked in the manifest (blurring is lossy, so the true pixels must
travel somewhere). restore applies the records in reverse and is
bit-exact; any checksum failure aborts before output exists.

Per-image work is sequential; all functions are reentrant, so callers
may process many images concurrently.
"""

from __future__ import annotations

import secrets
from typing import Callable

import numpy as np

from .blur import blur_patch_into
from .crypto import (
    IV_BYTES,
    SALT_BYTES,
    KeyMaterial,
    RegionCipherRecord,
    aes_cfb_decrypt,
    aes_cfb_encrypt,
    check_plaintext_crc,
    crc32,
    derive_key,
)
from .errors import GeometryError, MissingPassphraseError, ValidationError
from .image import ImageBuffer
from .manifest import ReconstructionManifest
from .prioritize import Preferences, SecurityPolicy, plan_selection, prioritize
from .regions import extract_from_array, write_patch_into

EntropySource = Callable[[int], bytes]


def protect_with_key(
    img: ImageBuffer,
    regions,
    prefs: Preferences,
    policy: SecurityPolicy,
    key: KeyMaterial,
    rng: EntropySource = secrets.token_bytes,
    original_format: str = "PNG",
) -> tuple[ImageBuffer, ReconstructionManifest]:
    """protect with pre-derived key material (keeps KDF cost out of hot loops)."""
    assignment = prioritize(regions, prefs, img.width, img.height)
    plan = plan_selection(assignment, regions, policy, img.width, img.height)
    mode = policy.resolved_mode()

    original = img.as_array()
    canvas = np.array(original)
    records: list[RegionCipherRecord] = []
    for entry in plan.selected:
        iv = rng(IV_BYTES)
        if len(iv) != IV_BYTES:
            raise ValidationError(f"entropy source returned {len(iv)} bytes, need {IV_BYTES}")
        plaintext = extract_from_array(original, entry.bbox, entry.mask)
        if mode == "encrypt":
            ciphertext = aes_cfb_encrypt(key.key, iv, plaintext)
            write_patch_into(canvas, entry.bbox, entry.mask, ciphertext)
            stored = None
        else:
            stored = aes_cfb_encrypt(key.key, iv, plaintext)
            blur_patch_into(canvas, original, entry.bbox, entry.mask, policy.sigma)
        records.append(
            RegionCipherRecord(
                region_id=entry.region_id,
                bbox=entry.bbox,
                mask=entry.mask,
                iv=iv,
                byte_length=len(plaintext),
                plaintext_crc32=crc32(plaintext),
                mode=mode,
                stored_ciphertext=stored,
                kind=entry.kind,
                class_label=entry.class_label,
            )
        )

    out = ImageBuffer(img.width, img.height, img.channels, canvas.tobytes()) if records else img
    manifest = ReconstructionManifest(
        original_format=original_format,
        width=img.width,
        height=img.height,
        channels=img.channels,
        kdf_id=key.kdf_id,
        kdf_params=dict(key.kdf_params),
        salt=key.salt,
        level=policy.level,
        mode=mode,
        sigma=policy.sigma,
        target_fraction=plan.target_fraction,
        achieved_fraction=plan.achieved_fraction,
        shortfall=plan.shortfall,
        records=tuple(records),
    )
    return out, manifest


def protect(
    img: ImageBuffer,
    regions,
    prefs: Preferences,
    policy: SecurityPolicy,
    passphrase: str,
    rng: EntropySource = secrets.token_bytes,
    original_format: str = "PNG",
    kdf_params: dict | None = None,
) -> tuple[ImageBuffer, ReconstructionManifest]:
    """Alter the planned regions and return the protected image + manifest.

    The passphrase may be empty only when nothing ends up selected (the
    manifest then carries unused KDF metadata and zero records).
    """
    assignment = prioritize(regions, prefs, img.width, img.height)
    plan = plan_selection(assignment, regions, policy, img.width, img.height)
    salt = rng(SALT_BYTES)
    if plan.selected and not passphrase:
        raise MissingPassphraseError(
            "a passphrase is required: selected regions must be encrypted "
            "(blur mode stores an encrypted copy of the original patch)"
        )
    if passphrase:
        key = derive_key(passphrase, salt, kdf_params=kdf_params)
    else:
        key = KeyMaterial(
            key=bytes(32), salt=salt, kdf_id="pbkdf2-hmac-sha256",
            kdf_params=dict(kdf_params or {"iterations": 1}),
        )
    return protect_with_key(
        img, regions, prefs, policy, key, rng=rng, original_format=original_format
    )


def restore_with_key(
    img: ImageBuffer, manifest: ReconstructionManifest, key: KeyMaterial
) -> ImageBuffer:
    """restore with pre-derived key material."""
    if (img.width, img.height, img.channels) != (
        manifest.width,
        manifest.height,
        manifest.channels,
    ):
        raise ValidationError(
            f"image is {img.width}x{img.height}x{img.channels}, manifest describes "
            f"{manifest.width}x{manifest.height}x{manifest.channels}"
        )
    canvas = np.array(img.as_array())
    for record in reversed(manifest.records):
        if record.mode == "encrypt":
            ciphertext = extract_from_array(canvas, record.bbox, record.mask)
        else:
            ciphertext = record.stored_ciphertext
        if len(ciphertext) != record.byte_length:
            raise GeometryError(
                f"region {record.region_id}: ciphertext length {len(ciphertext)} "
                f"does not match recorded {record.byte_length}"
            )
        plaintext = aes_cfb_decrypt(key.key, record.iv, ciphertext)
        check_plaintext_crc(record, plaintext)
        write_patch_into(canvas, record.bbox, record.mask, plaintext)
    return ImageBuffer(img.width, img.height, img.channels, canvas.tobytes())


def restore(img: ImageBuffer, manifest: ReconstructionManifest, passphrase: str) -> ImageBuffer:
    """Bit-exact inverse of protect, gated by per-record checksums."""
    if not manifest.records:
        return img
    key = derive_key(
        passphrase, manifest.salt, kdf_id=manifest.kdf_id, kdf_params=manifest.kdf_params
    )
    return restore_with_key(img, manifest, key)
