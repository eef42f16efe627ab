"""Benchmark harness: full-image vs selective alteration timing.

Synthetic images come from a seeded PRNG so runs are reproducible in
shape; timings are wall-clock on a single thread with warmup iterations
discarded, summarized as median/p10/p90 (percentiles resist scheduler
noise on desk machines). Key derivation happens once, outside the timed
loops: the comparison is about alteration cost, not KDF cost.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .crypto import KeyMaterial, derive_key
from .errors import ValidationError
from .image import ImageBuffer
from .pipeline import protect_with_key, restore_with_key
from .prioritize import Preferences, SecurityPolicy
from .stubs import center_box_regions

BENCH_MODES = ("full_encrypt", "sisa_encrypt", "sisa_blur", "full_decrypt", "sisa_decrypt")

_BENCH_KDF_PARAMS = {"iterations": 10_000}


@dataclass(frozen=True)
class BenchRow:
    width: int
    height: int
    mode: str
    coverage: float
    median_ms: float
    p10_ms: float
    p90_ms: float
    iterations: int


def parse_sizes(spec: str) -> list[tuple[int, int]]:
    """Parse "640x480,1280x720" into [(640, 480), (1280, 720)]."""
    sizes = []
    for token in spec.split(","):
        token = token.strip().lower()
        parts = token.split("x")
        try:
            w, h = int(parts[0]), int(parts[1])
            if len(parts) != 2 or w < 1 or h < 1:
                raise ValueError
        except (ValueError, IndexError):
            raise ValidationError(f"unparsable size {token!r}; expected WIDTHxHEIGHT")
        sizes.append((w, h))
    if not sizes:
        raise ValidationError("empty size list")
    return sizes


def synthetic_image(width: int, height: int, seed: int = 2024) -> ImageBuffer:
    rng = np.random.default_rng(seed)
    arr = rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8)
    return ImageBuffer.from_array(arr)


def _time_loop(fn, iterations: int, warmup: int) -> tuple[float, float, float]:
    for _ in range(warmup):
        fn()
    samples = np.empty(iterations)
    for i in range(iterations):
        t0 = time.perf_counter()
        fn()
        samples[i] = time.perf_counter() - t0
    p10, median, p90 = np.percentile(samples, (10, 50, 90)) * 1000.0
    return float(median), float(p10), float(p90)


def bench_key(seed: int = 2024) -> KeyMaterial:
    salt = np.random.default_rng(seed).bytes(16)
    return derive_key("benchmark-passphrase", salt, kdf_params=_BENCH_KDF_PARAMS)


def run_size(
    width: int,
    height: int,
    coverage: float = 0.30,
    iterations: int = 20,
    warmup: int = 3,
    sigma: float = 8.0,
    seed: int = 2024,
    modes=BENCH_MODES,
) -> list[BenchRow]:
    """One BenchRow per requested mode at this size."""
    for mode in modes:
        if mode not in BENCH_MODES:
            raise ValidationError(f"unknown bench mode {mode!r}")
    img = synthetic_image(width, height, seed)
    key = bench_key(seed)
    prefs = Preferences()
    # iv stream: deterministic per-call cost, no entropy-pool stalls in the loop
    iv_rng = np.random.default_rng(seed + 1)
    rng = lambda n: iv_rng.bytes(n)

    full_policy = SecurityPolicy(level=5, mode="encrypt")
    sisa_policy = SecurityPolicy(level=1, mode="encrypt")
    blur_policy = SecurityPolicy(level=1, mode="blur", sigma=sigma)
    sisa_regions = center_box_regions(width, height, coverage)

    protected_full, manifest_full = protect_with_key(img, [], prefs, full_policy, key, rng)
    protected_sisa, manifest_sisa = protect_with_key(
        img, sisa_regions, prefs, sisa_policy, key, rng
    )
    achieved = manifest_sisa.achieved_fraction

    runners = {
        "full_encrypt": (
            1.0,
            lambda: protect_with_key(img, [], prefs, full_policy, key, rng),
        ),
        "sisa_encrypt": (
            achieved,
            lambda: protect_with_key(img, sisa_regions, prefs, sisa_policy, key, rng),
        ),
        "sisa_blur": (
            achieved,
            lambda: protect_with_key(img, sisa_regions, prefs, blur_policy, key, rng),
        ),
        "full_decrypt": (
            1.0,
            lambda: restore_with_key(protected_full, manifest_full, key),
        ),
        "sisa_decrypt": (
            achieved,
            lambda: restore_with_key(protected_sisa, manifest_sisa, key),
        ),
    }
    rows = []
    for mode in modes:
        cov, fn = runners[mode]
        median, p10, p90 = _time_loop(fn, iterations, warmup)
        rows.append(
            BenchRow(
                width=width,
                height=height,
                mode=mode,
                coverage=cov,
                median_ms=median,
                p10_ms=p10,
                p90_ms=p90,
                iterations=iterations,
            )
        )
    return rows


def rows_to_csv(rows) -> str:
    lines = ["width,height,mode,coverage,median_ms,p10_ms,p90_ms,iterations"]
    for r in rows:
        lines.append(
            f"{r.width},{r.height},{r.mode},{r.coverage:.4f},"
            f"{r.median_ms:.3f},{r.p10_ms:.3f},{r.p90_ms:.3f},{r.iterations}"
        )
    return "\n".join(lines) + "\n"


def ratios(rows) -> dict[tuple[int, int], dict[str, float]]:
    """Per-size sisa/full median ratios for encrypt and decrypt."""
    by_size: dict[tuple[int, int], dict[str, float]] = {}
    for r in rows:
        by_size.setdefault((r.width, r.height), {})[r.mode] = r.median_ms
    out: dict[tuple[int, int], dict[str, float]] = {}
    for size, medians in by_size.items():
        entry = {}
        if "full_encrypt" in medians and "sisa_encrypt" in medians:
            entry["encrypt"] = medians["sisa_encrypt"] / medians["full_encrypt"]
        if "full_decrypt" in medians and "sisa_decrypt" in medians:
            entry["decrypt"] = medians["sisa_decrypt"] / medians["full_decrypt"]
        out[size] = entry
    return out
