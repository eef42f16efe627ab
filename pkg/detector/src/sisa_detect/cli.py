"""sisa-detect: run pretrained detectors, emit a regions document.

Backends: "maskrcnn" (torchvision, needs downloaded weights), "face"
(bundled LBP cascade, always available), or "auto" (maskrcnn when its
weights resolve, otherwise fall back to the face backend with a
warning). Passing --gallery adds identity matching to face regions and
implies face detection. Exit codes: 0 ok, 2 unreadable input, 3 bad
arguments/document, 4 model unavailable.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .document import build_document, dumps, make_region
from .errors import DetectorError, ImageReadError, ModelUnavailableError
from .faces import (
    DEFAULT_MATCH_THRESHOLD,
    detect_faces,
    face_embedding,
    load_gallery,
    match_identity,
)

BACKENDS = ("auto", "maskrcnn", "face")


def read_image(path) -> np.ndarray:
    try:
        with Image.open(path) as im:
            if im.mode in ("RGB", "RGBA"):
                return np.asarray(im.convert("RGB"))
            if im.mode == "L":
                return np.asarray(im)
            return np.asarray(im.convert("RGB"))
    except FileNotFoundError as exc:
        raise ImageReadError(f"image not found: {path}") from exc
    except (OSError, UnidentifiedImageError) as exc:
        raise ImageReadError(f"cannot read image {path}: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sisa-detect",
        description="Detect regions of interest and emit a schema-v1 regions document.",
    )
    parser.add_argument("image", help="input image (PNG/JPEG/BMP)")
    parser.add_argument("--out", help="write the document here instead of stdout")
    parser.add_argument("--backend", choices=BACKENDS, default="auto",
                        help="detector backend (default: auto)")
    parser.add_argument("--min-confidence", type=float, default=0.5,
                        help="drop detections below this score (default: 0.5)")
    parser.add_argument("--gallery", help="directory of per-person reference photos")
    parser.add_argument("--match-threshold", type=float, default=DEFAULT_MATCH_THRESHOLD,
                        help="max embedding distance for an identity match (default: 0.6)")
    parser.add_argument("--enable-text", action="store_true",
                        help="also emit heuristic text-line regions")
    parser.add_argument("--weights", help="path to Mask R-CNN COCO checkpoint")
    parser.add_argument("--min-face-size", type=int, default=48,
                        help="smallest face window in pixels (default: 48)")
    return parser


def run(args) -> dict:
    image = read_image(args.image)
    height, width = image.shape[:2]
    if not (0.0 <= args.min_confidence <= 1.0):
        raise DetectorError(f"--min-confidence must be in [0,1], got {args.min_confidence}")

    want_objects = args.backend in ("auto", "maskrcnn")
    want_faces = args.backend == "face" or args.gallery is not None

    entries = []
    if want_objects:
        try:
            from .objects import detect_objects

            for det in detect_objects(image, args.min_confidence, args.weights):
                entries.append(
                    dict(kind="object", class_label=det["class_label"],
                         bbox=det["bbox"], confidence=det["confidence"],
                         mask=det["mask"])
                )
        except ModelUnavailableError:
            if args.backend == "maskrcnn":
                raise
            print("warning: Mask R-CNN unavailable, falling back to the face backend "
                  "(run with --backend maskrcnn for the download instructions)",
                  file=sys.stderr)
            want_faces = True

    if want_faces:
        gallery = {}
        if args.gallery is not None:
            gallery = load_gallery(args.gallery)
            if not gallery:
                print(f"warning: gallery {args.gallery} is empty; "
                      "faces will carry no identity", file=sys.stderr)
        rgb = image if image.ndim == 3 else np.stack([image] * 3, axis=-1)
        for face in detect_faces(rgb, min_size=args.min_face_size):
            if face.confidence < args.min_confidence:
                continue
            identity = None
            if gallery:
                identity, _ = match_identity(
                    face_embedding(rgb, face), gallery, args.match_threshold
                )
            entries.append(
                dict(kind="face", class_label="person",
                     bbox=(face.p, face.q, face.l, face.b),
                     confidence=face.confidence, mask=None, identity=identity)
            )

    if args.enable_text:
        from .textspot import detect_text

        for det in detect_text(image):
            if det["confidence"] < args.min_confidence:
                continue
            entries.append(
                dict(kind="text", class_label=det["class_label"],
                     bbox=det["bbox"], confidence=det["confidence"], mask=None)
            )

    regions = [
        make_region(i, entry["kind"], entry["class_label"], entry["bbox"],
                    entry["confidence"], mask=entry.get("mask"),
                    identity=entry.get("identity"))
        for i, entry in enumerate(entries)
    ]
    return build_document(width, height, regions)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc = run(args)
    except DetectorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = dumps(doc)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {len(doc['regions'])} regions to {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
