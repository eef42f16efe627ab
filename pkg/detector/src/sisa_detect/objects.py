"""Instance segmentation via torchvision's COCO-pretrained Mask R-CNN.

torch/torchvision are optional and imported lazily; weights resolve from
an explicit path, the SISA_DETECT_WEIGHTS environment variable, or the
torch hub cache. When none of those work the error says exactly what to
download and where to put it - this sidecar never fails silently into
fake detections.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .errors import ModelUnavailableError

WEIGHTS_FILE = "maskrcnn_resnet50_fpn_coco-bf2d0c1e.pth"
WEIGHTS_URL = f"https://download.pytorch.org/models/{WEIGHTS_FILE}"
WEIGHTS_ENV = "SISA_DETECT_WEIGHTS"

# torchvision COCO label space (91 entries, some unused placeholders)
COCO_CATEGORIES = [
    "__background__", "person", "bicycle", "car", "motorcycle", "airplane",
    "bus", "train", "truck", "boat", "traffic light", "fire hydrant", "N/A",
    "stop sign", "parking meter", "bench", "bird", "cat", "dog", "horse",
    "sheep", "cow", "elephant", "bear", "zebra", "giraffe", "N/A", "backpack",
    "umbrella", "N/A", "N/A", "handbag", "tie", "suitcase", "frisbee", "skis",
    "snowboard", "sports ball", "kite", "baseball bat", "baseball glove",
    "skateboard", "surfboard", "tennis racket", "bottle", "N/A", "wine glass",
    "cup", "fork", "knife", "spoon", "bowl", "banana", "apple", "sandwich",
    "orange", "broccoli", "carrot", "hot dog", "pizza", "donut", "cake",
    "chair", "couch", "potted plant", "bed", "N/A", "dining table", "N/A",
    "N/A", "toilet", "N/A", "tv", "laptop", "mouse", "remote", "keyboard",
    "cell phone", "microwave", "oven", "toaster", "sink", "refrigerator",
    "N/A", "book", "clock", "vase", "scissors", "teddy bear", "hair drier",
    "toothbrush",
]

MASK_PROB_THRESHOLD = 0.5


def _hub_cache_path() -> Path:
    hub = os.environ.get("TORCH_HOME")
    base = Path(hub) if hub else Path.home() / ".cache" / "torch"
    return base / "hub" / "checkpoints" / WEIGHTS_FILE


def resolve_weights(weights_path=None) -> Path:
    """Locate the checkpoint or explain how to obtain it."""
    candidates = []
    if weights_path:
        candidates.append(Path(weights_path))
    if os.environ.get(WEIGHTS_ENV):
        candidates.append(Path(os.environ[WEIGHTS_ENV]))
    candidates.append(_hub_cache_path())
    for candidate in candidates:
        if candidate.is_file():
            return candidate
    raise ModelUnavailableError(
        "Mask R-CNN weights not found. Download the COCO checkpoint:\n"
        f"  curl -L -o {WEIGHTS_FILE} {WEIGHTS_URL}\n"
        f"then pass --weights {WEIGHTS_FILE}, set {WEIGHTS_ENV}=/path/to/{WEIGHTS_FILE}, "
        f"or place it at {_hub_cache_path()}"
    )


def _load_model(weights_path=None):
    try:
        import torch
        from torchvision.models.detection import maskrcnn_resnet50_fpn
    except ImportError as exc:
        raise ModelUnavailableError(
            "torch/torchvision are not installed; install the maskrcnn extra: "
            "pip install 'sisa-detect[maskrcnn]'"
        ) from exc
    checkpoint = resolve_weights(weights_path)
    model = maskrcnn_resnet50_fpn(weights=None, weights_backbone=None, num_classes=91)
    try:
        state = torch.load(checkpoint, map_location="cpu", weights_only=True)
        model.load_state_dict(state)
    except Exception as exc:
        raise ModelUnavailableError(
            f"cannot load Mask R-CNN checkpoint {checkpoint}: {exc}"
        ) from exc
    model.eval()
    return model, torch


def detect_objects(
    image: np.ndarray,
    min_confidence: float = 0.5,
    weights_path=None,
) -> list[dict]:
    """COCO instances above the score threshold, with per-pixel masks.

    Returns dicts {class_label, bbox (p,q,l,b), confidence, mask (bool
    (b,l) array or None)}, sorted by descending confidence.
    """
    model, torch = _load_model(weights_path)
    if image.ndim == 2:
        image = np.stack([image] * 3, axis=-1)
    tensor = torch.from_numpy(np.ascontiguousarray(image[:, :, :3])).permute(2, 0, 1)
    tensor = tensor.float() / 255.0
    with torch.no_grad():
        output = model([tensor])[0]

    height, width = image.shape[:2]
    detections = []
    for box, label, score, mask in zip(
        output["boxes"], output["labels"], output["scores"], output["masks"]
    ):
        score = float(score)
        if score < min_confidence:
            continue
        x0, y0, x1, y1 = (float(v) for v in box)
        p = max(0, int(np.floor(x0)))
        q = max(0, int(np.floor(y0)))
        l = min(width, int(np.ceil(x1))) - p
        b = min(height, int(np.ceil(y1))) - q
        if l < 1 or b < 1:
            continue
        bits = (mask[0].numpy() >= MASK_PROB_THRESHOLD)[q : q + b, p : p + l]
        index = int(label)
        name = COCO_CATEGORIES[index] if 0 <= index < len(COCO_CATEGORIES) else str(index)
        detections.append(
            {
                "class_label": name,
                "bbox": (p, q, l, b),
                "confidence": score,
                "mask": bits if bits.any() else None,
            }
        )
    detections.sort(key=lambda d: -d["confidence"])
    return detections
