"""Selective image security: blur or encrypt prioritized regions, restore bit-exactly."""

__version__ = "0.1.0"

from .blur import GaussianKernel, blur_region, gaussian_density, gaussian_kernel
from .crypto import (
    KeyMaterial,
    RegionCipherRecord,
    decrypt_region,
    derive_key,
    encrypt_region,
)
from .errors import (
    ChecksumMismatchError,
    GeometryError,
    ImageIOError,
    KdfError,
    MalformedDocumentError,
    ManifestInvariantError,
    MissingManifestError,
    MissingPassphraseError,
    SisaError,
    UnknownVersionError,
    UnsupportedImageError,
    ValidationError,
)
from .image import ImageBuffer, load_image, save_lossless
from .manifest import (
    ReconstructionManifest,
    decode_manifest,
    embed_manifest,
    encode_manifest,
    extract_manifest,
    resolve_manifest,
    sidecar_path,
    write_sidecar,
)
from .pipeline import protect, protect_with_key, restore, restore_with_key
from .prioritize import (
    FULL_IMAGE_ID,
    LEVEL_COVERAGE,
    PlanEntry,
    Preferences,
    PriorityAssignment,
    PriorityEntry,
    SecurityPolicy,
    SelectionPlan,
    center_affinity,
    coverage_for_level,
    plan_selection,
    prioritize,
    union_pixel_count,
)
from .regions import (
    BoundingBox,
    MaskRLE,
    Region,
    extract_patch,
    full_mask,
    parse_regions,
    region_to_entry,
    regions_document,
    rle_decode,
    rle_encode,
    write_patch,
)
from .stubs import center_box_regions, grid_regions, stub_document, stub_regions
