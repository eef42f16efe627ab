"""Detector sidecar: pretrained models in, regions documents out."""

__version__ = "0.1.0"

from .document import build_document, dumps, make_region, rle_encode, validate_document
from .errors import DetectorError, DocumentError, ImageReadError, ModelUnavailableError
from .faces import detect_faces, face_embedding, load_gallery, match_identity
