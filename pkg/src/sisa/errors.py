"""Exception hierarchy and CLI exit codes."""

EXIT_IO = 2
EXIT_VALIDATION = 3
EXIT_CRYPTO = 4


class SisaError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ImageIOError(SisaError):
    """Unreadable, unwritable, or unsupported image file."""

    exit_code = EXIT_IO


class UnsupportedImageError(SisaError):
    """Image format or bit depth this package refuses to process."""

    exit_code = EXIT_VALIDATION


class GeometryError(SisaError):
    """Bounding box, mask, or patch length violates image geometry."""

    exit_code = EXIT_VALIDATION


class ValidationError(SisaError):
    """Malformed or inconsistent document (regions file, manifest, CLI args)."""

    exit_code = EXIT_VALIDATION


class MalformedDocumentError(ValidationError):
    """Document bytes are not parseable at all (truncated, not JSON, not PNG)."""


class UnknownVersionError(ValidationError):
    """Manifest or regions document declares a version this reader does not know."""


class ManifestInvariantError(ValidationError):
    """Parsed manifest violates a structural invariant (overlap, bad lengths)."""


class MissingManifestError(ValidationError):
    """No reconstruction manifest found embedded in or beside the image."""


class MissingPassphraseError(SisaError):
    """Operation requires a passphrase and none was provided."""

    exit_code = EXIT_CRYPTO


class KdfError(SisaError):
    """Unknown key-derivation scheme or unusable parameters."""

    exit_code = EXIT_CRYPTO


class ChecksumMismatchError(SisaError):
    """Recovered plaintext failed its integrity check.

    Signals a wrong key/passphrase or a corrupted image; restoration
    aborts without producing output.
    """

    exit_code = EXIT_CRYPTO
