"""Key derivation and AES-256-CFB alteration of region patches.

CFB with full 128-bit feedback segments turns AES into a
length-preserving stream cipher, so ciphertext drops back into exactly
the pixel slots the plaintext came from. Every record stores a CRC32 of
the plaintext: a cheap wrong-key/corruption detector (not an
authenticator) that gates restoration.
"""

from __future__ import annotations

import hashlib
import hmac
import zlib
from dataclasses import dataclass

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms

try:  # CFB was moved out of the primary namespace in cryptography 49
    from cryptography.hazmat.decrepit.ciphers.modes import CFB as _CFB
except ImportError:  # pragma: no cover - older library versions
    from cryptography.hazmat.primitives.ciphers.modes import CFB as _CFB

from .errors import ChecksumMismatchError, GeometryError, KdfError, MissingPassphraseError
from .image import ImageBuffer
from .regions import BoundingBox, MaskRLE, extract_patch, write_patch

KEY_BYTES = 32
SALT_BYTES = 16
IV_BYTES = 16

DEFAULT_KDF_ID = "pbkdf2-hmac-sha256"
DEFAULT_KDF_PARAMS = {"iterations": 200_000}


@dataclass(frozen=True)
class KeyMaterial:
    """32-byte cipher key plus everything needed to re-derive it."""

    key: bytes
    salt: bytes
    kdf_id: str
    kdf_params: dict

    def __post_init__(self):
        if len(self.key) != KEY_BYTES:
            raise KdfError(f"key must be {KEY_BYTES} bytes, got {len(self.key)}")
        if len(self.salt) != SALT_BYTES:
            raise KdfError(f"salt must be {SALT_BYTES} bytes, got {len(self.salt)}")


def derive_key(
    passphrase: str,
    salt: bytes,
    kdf_id: str = DEFAULT_KDF_ID,
    kdf_params: dict | None = None,
) -> KeyMaterial:
    """Deterministically derive the 32-byte key for (passphrase, salt, params)."""
    if not passphrase:
        raise MissingPassphraseError("passphrase must be non-empty")
    if len(salt) != SALT_BYTES:
        raise KdfError(f"salt must be {SALT_BYTES} bytes, got {len(salt)}")
    if kdf_id != DEFAULT_KDF_ID:
        raise KdfError(f"unknown kdf_id {kdf_id!r}")
    params = dict(DEFAULT_KDF_PARAMS if kdf_params is None else kdf_params)
    iterations = int(params.get("iterations", 0))
    if iterations < 1:
        raise KdfError(f"iterations must be >= 1, got {params.get('iterations')!r}")
    params["iterations"] = iterations
    key = hashlib.pbkdf2_hmac(
        "sha256", passphrase.encode("utf-8"), salt, iterations, dklen=KEY_BYTES
    )
    return KeyMaterial(key=key, salt=salt, kdf_id=kdf_id, kdf_params=params)


def aes_cfb_encrypt(key: bytes, iv: bytes, plaintext: bytes) -> bytes:
    enc = Cipher(algorithms.AES(key), _CFB(iv)).encryptor()
    return enc.update(plaintext) + enc.finalize()


def aes_cfb_decrypt(key: bytes, iv: bytes, ciphertext: bytes) -> bytes:
    dec = Cipher(algorithms.AES(key), _CFB(iv)).decryptor()
    return dec.update(ciphertext) + dec.finalize()


def crc32(data: bytes) -> int:
    return zlib.crc32(data) & 0xFFFFFFFF


@dataclass(frozen=True)
class RegionCipherRecord:
    """Everything needed to undo the alteration of one region.

    For encrypt mode the ciphertext lives in the image pixels; for blur
    mode the (encrypted) original patch is stored here because blurring
    is lossy. kind/class_label ride along so manifests can be inspected
    without the original regions document.
    """

    region_id: int
    bbox: BoundingBox
    mask: MaskRLE | None
    iv: bytes
    byte_length: int
    plaintext_crc32: int
    mode: str
    stored_ciphertext: bytes | None = None
    kind: str = "object"
    class_label: str = ""

    def __post_init__(self):
        if len(self.iv) != IV_BYTES:
            raise GeometryError(f"iv must be {IV_BYTES} bytes, got {len(self.iv)}")
        if self.mode not in ("encrypt", "blur"):
            raise GeometryError(f"record mode must be encrypt or blur, got {self.mode!r}")
        if self.mode == "blur":
            if self.stored_ciphertext is None:
                raise GeometryError("blur record requires stored_ciphertext")
            if len(self.stored_ciphertext) != self.byte_length:
                raise GeometryError(
                    f"stored ciphertext has {len(self.stored_ciphertext)} bytes, "
                    f"record says {self.byte_length}"
                )
        elif self.stored_ciphertext is not None:
            raise GeometryError("encrypt record must not carry stored_ciphertext")


def encrypt_region(
    img: ImageBuffer,
    bbox: BoundingBox,
    mask: MaskRLE | None,
    key: KeyMaterial,
    iv: bytes,
    region_id: int = 0,
    kind: str = "object",
    class_label: str = "",
) -> tuple[ImageBuffer, RegionCipherRecord]:
    """Encrypt the masked patch in place (CFB keeps the byte count equal)."""
    if len(iv) != IV_BYTES:
        raise GeometryError(f"iv must be {IV_BYTES} bytes, got {len(iv)}")
    plaintext = extract_patch(img, bbox, mask)
    ciphertext = aes_cfb_encrypt(key.key, iv, plaintext)
    out = write_patch(img, bbox, mask, ciphertext)
    record = RegionCipherRecord(
        region_id=region_id,
        bbox=bbox,
        mask=mask,
        iv=iv,
        byte_length=len(plaintext),
        plaintext_crc32=crc32(plaintext),
        mode="encrypt",
        kind=kind,
        class_label=class_label,
    )
    return out, record


def decrypt_region(
    img: ImageBuffer, record: RegionCipherRecord, key: KeyMaterial
) -> ImageBuffer:
    """Invert encrypt_region; aborts on checksum mismatch without output."""
    if record.mode != "encrypt":
        raise GeometryError(f"decrypt_region needs an encrypt record, got {record.mode!r}")
    ciphertext = extract_patch(img, record.bbox, record.mask)
    if len(ciphertext) != record.byte_length:
        raise GeometryError(
            f"region {record.region_id}: ciphertext length {len(ciphertext)} "
            f"does not match recorded {record.byte_length}"
        )
    plaintext = aes_cfb_decrypt(key.key, record.iv, ciphertext)
    check_plaintext_crc(record, plaintext)
    return write_patch(img, record.bbox, record.mask, plaintext)


def check_plaintext_crc(record: RegionCipherRecord, plaintext: bytes) -> None:
    actual = crc32(plaintext)
    # constant-time compare; the CRC is a detector, not an authenticator
    if not hmac.compare_digest(
        actual.to_bytes(4, "big"), record.plaintext_crc32.to_bytes(4, "big")
    ):
        raise ChecksumMismatchError(
            f"region {record.region_id}: plaintext checksum mismatch "
            "(wrong passphrase or corrupted image)"
        )
