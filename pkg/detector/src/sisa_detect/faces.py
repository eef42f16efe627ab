"""Face detection and identification with locally-bundled models.

Detection runs scikit-image's shipped LBP frontal-face cascade at
several scale factors and clusters the per-pass hits by overlap; the
confidence of a cluster is support-based (1 - 0.5^hits), so boxes found
at many scales score high and one-off hits sit at 0.5. Faces are
labelled with the "person" class.

Identification follows the usual two-step shape: embed the detected
face crop, then nearest-gallery-match under a distance threshold. The
embedding is a classical one - HOG over the equalized 64x64 grayscale
crop, L2-normalized - so distances are Euclidean in [0, 2]. On desk
photos, same-person pairs land around 0.3-0.5 and different people
around 0.65-0.9, which the conventional 0.6 default threshold
separates. It is far weaker than a deep embedding; treat identities as
hints, not authentication.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from skimage import data as skdata
from skimage.color import rgb2gray
from skimage.exposure import equalize_hist
from skimage.feature import Cascade, hog
from skimage.transform import resize

from .errors import ImageReadError, ModelUnavailableError

SCALE_FACTORS = (1.1, 1.15, 1.2, 1.25)
IOU_CLUSTER = 0.3
EMBED_SIZE = 64
DEFAULT_MATCH_THRESHOLD = 0.6
GALLERY_EXTENSIONS = {".png", ".jpg", ".jpeg", ".bmp"}

_cascade = None


def _get_cascade() -> Cascade:
    global _cascade
    if _cascade is None:
        try:
            _cascade = Cascade(skdata.lbp_frontal_face_cascade_filename())
        except Exception as exc:  # missing data file in a broken install
            raise ModelUnavailableError(
                "cannot load the bundled LBP face cascade; reinstall scikit-image "
                f"(scikit-image>=0.22): {exc}"
            ) from exc
    return _cascade


@dataclass
class FaceBox:
    p: int
    q: int
    l: int
    b: int
    confidence: float


def _iou(a, b) -> float:
    ax1, ay1 = a["c"] + a["width"], a["r"] + a["height"]
    bx1, by1 = b["c"] + b["width"], b["r"] + b["height"]
    ix = max(0, min(ax1, bx1) - max(a["c"], b["c"]))
    iy = max(0, min(ay1, by1) - max(a["r"], b["r"]))
    inter = ix * iy
    union = a["width"] * a["height"] + b["width"] * b["height"] - inter
    return inter / union if union else 0.0


def detect_faces(image: np.ndarray, min_size: int = 48) -> list[FaceBox]:
    """Clustered face boxes with support-based confidences, largest first."""
    detector = _get_cascade()
    side = min(image.shape[0], image.shape[1])
    if side < min_size:
        return []
    hits = []
    for factor in SCALE_FACTORS:
        hits += list(
            detector.detect_multi_scale(
                img=image,
                scale_factor=factor,
                step_ratio=1,
                min_size=(min_size, min_size),
                max_size=(side, side),
            )
        )
    hits.sort(key=lambda h: -(h["width"] * h["height"]))
    clusters: list[list[dict]] = []
    for hit in hits:
        for cluster in clusters:
            if any(_iou(hit, member) > IOU_CLUSTER for member in cluster):
                cluster.append(hit)
                break
        else:
            clusters.append([hit])

    boxes = []
    height, width = image.shape[:2]
    for cluster in clusters:
        p = int(round(np.mean([h["c"] for h in cluster])))
        q = int(round(np.mean([h["r"] for h in cluster])))
        l = int(round(np.mean([h["width"] for h in cluster])))
        b = int(round(np.mean([h["height"] for h in cluster])))
        p, q = max(0, p), max(0, q)
        l = min(l, width - p)
        b = min(b, height - q)
        if l < 1 or b < 1:
            continue
        boxes.append(FaceBox(p, q, l, b, confidence=1.0 - 0.5 ** len(cluster)))
    boxes.sort(key=lambda fb: (-fb.confidence, -(fb.l * fb.b)))
    return boxes


def _to_gray(image: np.ndarray) -> np.ndarray:
    if image.ndim == 3:
        return rgb2gray(image[:, :, :3])
    return image.astype(float) / 255.0 if image.dtype == np.uint8 else image


def face_embedding(image: np.ndarray, box: FaceBox | None = None) -> np.ndarray:
    """L2-normalized HOG descriptor of the (equalized) face crop."""
    gray = _to_gray(image)
    if box is not None:
        gray = gray[box.q : box.q + box.b, box.p : box.p + box.l]
    crop = equalize_hist(resize(gray, (EMBED_SIZE, EMBED_SIZE), anti_aliasing=True))
    vec = hog(crop, orientations=9, pixels_per_cell=(8, 8), cells_per_block=(2, 2))
    return vec / (np.linalg.norm(vec) + 1e-12)


def load_gallery(gallery_dir) -> dict[str, list[np.ndarray]]:
    """Embeddings per person from <gallery>/<person>/*.png|jpg|jpeg|bmp.

    The face is located in each reference photo with the same cascade;
    when no face is found the whole photo is embedded (tight head-shot
    crops often sit closer than the cascade's minimum window).
    """
    from PIL import Image, UnidentifiedImageError

    root = Path(gallery_dir)
    if not root.is_dir():
        raise ImageReadError(f"gallery directory not found: {gallery_dir}")
    gallery: dict[str, list[np.ndarray]] = {}
    for person_dir in sorted(root.iterdir()):
        if not person_dir.is_dir():
            continue
        embeddings = []
        for photo in sorted(person_dir.iterdir()):
            if photo.suffix.lower() not in GALLERY_EXTENSIONS:
                continue
            try:
                with Image.open(photo) as im:
                    arr = np.asarray(im.convert("RGB"))
            except (OSError, UnidentifiedImageError) as exc:
                print(f"warning: skipping unreadable gallery photo {photo}: {exc}",
                      file=sys.stderr)
                continue
            faces = detect_faces(arr)
            embeddings.append(face_embedding(arr, faces[0] if faces else None))
        if embeddings:
            gallery[person_dir.name] = embeddings
    return gallery


def match_identity(
    embedding: np.ndarray,
    gallery: dict[str, list[np.ndarray]],
    threshold: float = DEFAULT_MATCH_THRESHOLD,
) -> tuple[str | None, float]:
    """Closest gallery person, or None when nothing is under the threshold."""
    best_name, best_distance = None, float("inf")
    for name, embeddings in gallery.items():
        for reference in embeddings:
            distance = float(np.linalg.norm(embedding - reference))
            if distance < best_distance:
                best_name, best_distance = name, distance
    if best_name is not None and best_distance < threshold:
        return best_name, best_distance
    return None, best_distance
