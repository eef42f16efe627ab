"""Region prioritization and coverage planning.

Regions are scored by affinity to the image center (the default
heuristic: what matters usually sits mid-frame) plus user-preference
boosts, then selected greedily in rank order until the security level's
target fraction of the image is covered. Selected regions are
disjointified - every pixel belongs only to the highest-ranked region
covering it - so alteration and restoration never touch a pixel twice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError, ValidationError
from .regions import BoundingBox, MaskRLE, Region, full_mask, rle_decode, rle_encode

# Target altered fraction per security level: anchored at a 30% floor for
# level 1 and rising linearly to the whole image at level 5.
LEVEL_COVERAGE = (0.30, 0.475, 0.65, 0.825, 1.00)

MODES = ("auto", "blur", "encrypt")
# Whole-image fallback entries carry this sentinel id in plans/manifests.
FULL_IMAGE_ID = -1


@dataclass(frozen=True)
class Preferences:
    """Scoring weights. Boosts are additive and may be negative."""

    w_center: float = 1.0
    kind_boost: dict = field(default_factory=dict)
    identity_boost: dict = field(default_factory=dict)
    w_area: float = 0.0

    def __post_init__(self):
        for name, value in (("w_center", self.w_center), ("w_area", self.w_area)):
            if not math.isfinite(value) or value < 0:
                raise ValidationError(f"{name} must be finite and >= 0, got {value}")
        for table in (self.kind_boost, self.identity_boost):
            for key, value in table.items():
                if not math.isfinite(value):
                    raise ValidationError(f"boost for {key!r} must be finite")


@dataclass(frozen=True)
class PriorityEntry:
    region_id: int
    class_label: str
    score: float
    rank: int


@dataclass(frozen=True)
class PriorityAssignment:
    entries: tuple[PriorityEntry, ...]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class SecurityPolicy:
    """Level 1-5 plus alteration mode and blur width.

    mode "auto" resolves to blur for levels 1-2 and encrypt for 3-5;
    an explicit mode overrides. passphrase_present records whether the
    caller supplied key material alongside this policy.
    """

    level: int = 1
    mode: str = "auto"
    sigma: float = 8.0
    passphrase_present: bool = False

    def __post_init__(self):
        if not (1 <= self.level <= 5):
            raise ValidationError(f"security level must be in 1..5, got {self.level}")
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not (self.sigma > 0) or not math.isfinite(self.sigma):
            raise ValidationError(f"sigma must be > 0, got {self.sigma}")

    def resolved_mode(self) -> str:
        if self.mode != "auto":
            return self.mode
        return "blur" if self.level <= 2 else "encrypt"


@dataclass(frozen=True)
class PlanEntry:
    """One selected region with its disjointified effective mask.

    mask None means the whole box is owned. region_id FULL_IMAGE_ID marks
    the synthetic whole-image entry produced at level 5.
    """

    region_id: int
    bbox: BoundingBox
    mask: MaskRLE | None
    kind: str = "object"
    class_label: str = ""


@dataclass(frozen=True)
class SelectionPlan:
    selected: tuple[PlanEntry, ...]
    target_fraction: float
    achieved_fraction: float
    shortfall: bool
    full_image_fallback: bool


def center_affinity(region: Region, width: int, height: int) -> float:
    """1 at the image center falling linearly (in distance) to 0 at a corner."""
    if width < 1 or height < 1:
        raise GeometryError(f"image must be at least 1x1, got {width}x{height}")
    region.bbox.validate_for(width, height)
    cx, cy = region.bbox.center()
    dx = cx - width / 2.0
    dy = cy - height / 2.0
    d = math.hypot(dx, dy)
    half_diag = math.hypot(width / 2.0, height / 2.0)
    return 1.0 - d / half_diag


def score_region(region: Region, prefs: Preferences, width: int, height: int) -> float:
    score = prefs.w_center * center_affinity(region, width, height)
    score += prefs.kind_boost.get(region.kind, 0.0)
    if region.identity is not None:
        score += prefs.identity_boost.get(region.identity, 0.0)
    score += prefs.w_area * (region.pixel_count / (width * height))
    return score


def prioritize(
    regions, prefs: Preferences, width: int, height: int
) -> PriorityAssignment:
    """Total order over regions: score desc, then larger area, then smaller id."""
    scored = [(score_region(r, prefs, width, height), r) for r in regions]
    scored.sort(key=lambda item: (-item[0], -item[1].pixel_count, item[1].id))
    entries = tuple(
        PriorityEntry(region_id=r.id, class_label=r.class_label, score=s, rank=i + 1)
        for i, (s, r) in enumerate(scored)
    )
    return PriorityAssignment(entries)


def coverage_for_level(level: int) -> float:
    """Target altered fraction for a security level (0.30 rising to 1.00)."""
    if not isinstance(level, int) or not (1 <= level <= 5):
        raise ValidationError(f"security level must be an integer in 1..5, got {level}")
    return LEVEL_COVERAGE[level - 1]


def union_pixel_count(regions, width: int, height: int) -> int:
    """Distinct pixels covered by the union of (bbox, mask) areas."""
    covered = np.zeros((height, width), dtype=bool)
    for bbox, mask in regions:
        bbox.validate_for(width, height)
        window = covered[bbox.q : bbox.q + bbox.b, bbox.p : bbox.p + bbox.l]
        if mask is None:
            window[:] = True
        else:
            if mask.cell_count != bbox.area:
                raise GeometryError(
                    f"mask runs sum to {mask.cell_count}, box has {bbox.area} cells"
                )
            window |= rle_decode(mask, bbox.l, bbox.b).reshape(bbox.b, bbox.l)
    return int(np.count_nonzero(covered))


def plan_selection(
    assignment: PriorityAssignment,
    regions,
    policy: SecurityPolicy,
    width: int,
    height: int,
) -> SelectionPlan:
    """Greedily select ranked regions until the level's coverage target is met.

    Stops at the first region whose inclusion reaches the target. Regions
    whose pixels are all owned by higher ranks contribute nothing and are
    dropped. Level 5 short-circuits to a single whole-image entry. When
    the detections cannot reach the target the plan is clamped and the
    shortfall flag raised; pixels outside detections are never invented.
    """
    target = coverage_for_level(policy.level)
    total = width * height

    if policy.level == 5:
        entry = PlanEntry(
            region_id=FULL_IMAGE_ID,
            bbox=BoundingBox(0, 0, width, height),
            mask=None,
            kind="object",
            class_label="full-image",
        )
        return SelectionPlan(
            selected=(entry,),
            target_fraction=target,
            achieved_fraction=1.0,
            shortfall=False,
            full_image_fallback=True,
        )

    by_id = {r.id: r for r in regions}
    if set(by_id) != {e.region_id for e in assignment}:
        raise ValidationError("assignment does not cover exactly the given regions")

    covered = np.zeros((height, width), dtype=bool)
    covered_count = 0
    selected: list[PlanEntry] = []
    for entry in assignment:
        region = by_id[entry.region_id]
        bbox = region.bbox
        bbox.validate_for(width, height)
        window = covered[bbox.q : bbox.q + bbox.b, bbox.p : bbox.p + bbox.l]
        if region.mask is None:
            effective = ~window
        else:
            effective = rle_decode(region.mask, bbox.l, bbox.b).reshape(bbox.b, bbox.l)
            effective &= ~window
        gain = int(np.count_nonzero(effective))
        if gain == 0:
            continue
        window |= effective
        covered_count += gain
        mask = None if gain == bbox.area else rle_encode(effective.ravel(), bbox.l, bbox.b)
        selected.append(
            PlanEntry(
                region_id=region.id,
                bbox=bbox,
                mask=mask,
                kind=region.kind,
                class_label=region.class_label,
            )
        )
        if covered_count >= target * total - 1e-9:
            break

    achieved = covered_count / total
    return SelectionPlan(
        selected=tuple(selected),
        target_fraction=target,
        achieved_fraction=achieved,
        shortfall=achieved < target - 1e-9,
        full_image_fallback=False,
    )
