"""Command-line interface: protect, restore, inspect, bench.

Exit codes: 0 success, 2 I/O failure, 3 validation failure, 4 crypto
failure (missing passphrase, checksum mismatch). The passphrase comes
from the SISA_PASSPHRASE environment variable or an interactive prompt,
never from argv.
"""

from __future__ import annotations

import functools
import getpass
import json
import os
import sys
from pathlib import Path

import click

from . import __version__
from .bench import BENCH_MODES, parse_sizes, ratios, rows_to_csv, run_size
from .errors import (
    EXIT_IO,
    EXIT_VALIDATION,
    MissingPassphraseError,
    SisaError,
    ValidationError,
)
from .image import load_image, probe_format, save_lossless
from .manifest import embed_manifest, resolve_manifest, write_sidecar
from .pipeline import protect, restore
from .prioritize import Preferences, SecurityPolicy
from .regions import parse_regions
from .stubs import STUB_NAMES, stub_regions

PASSPHRASE_ENV = "SISA_PASSPHRASE"


def _get_passphrase() -> str:
    passphrase = os.environ.get(PASSPHRASE_ENV)
    if passphrase:
        return passphrase
    if sys.stdin.isatty():
        passphrase = getpass.getpass("Passphrase: ")
        if passphrase:
            return passphrase
    raise MissingPassphraseError(
        f"no passphrase: set {PASSPHRASE_ENV} or run interactively"
    )


def _sisa_errors(fn):
    """Map package errors onto the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except SisaError as exc:
            click.echo(f"error: {exc}", err=True)
            raise SystemExit(exc.exit_code)
        except OSError as exc:
            click.echo(f"error: {exc}", err=True)
            raise SystemExit(EXIT_IO)

    return wrapper


@click.group()
@click.version_option(version=__version__, prog_name="sisa")
def main():
    """Secure images by altering only prioritized regions."""


def _load_regions_for(img, regions_path, stub, stub_fraction, stub_grid):
    if (regions_path is None) == (stub is None):
        raise ValidationError("exactly one of --regions or --stub-detector is required")
    if stub is not None:
        return stub_regions(stub, img.width, img.height, stub_fraction, stub_grid)
    try:
        doc = json.loads(Path(regions_path).read_text("utf-8"))
    except OSError as exc:
        raise SisaError(f"cannot read regions file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"regions file is not valid JSON: {exc}") from exc
    _, regions = parse_regions(doc, img.width, img.height)
    return regions


@main.command(name="protect")
@click.option("--input", "input_path", required=True, type=click.Path(), help="Image to protect (PNG/JPEG/BMP).")
@click.option("--regions", "regions_path", type=click.Path(), help="Regions document (schema v1 JSON).")
@click.option("--stub-detector", "stub", type=str, default=None, help=f"Built-in detector stub: {', '.join(STUB_NAMES)}.")
@click.option("--stub-fraction", type=float, default=0.30, show_default=True, help="Area fraction for the center-box stub.")
@click.option("--stub-grid", type=int, default=3, show_default=True, help="k for the k x k grid stub.")
@click.option("--level", type=int, default=1, show_default=True, help="Security level 1..5.")
@click.option("--mode", type=str, default="auto", show_default=True, help="auto, blur, or encrypt.")
@click.option("--sigma", type=float, default=8.0, show_default=True, help="Gaussian blur standard deviation.")
@click.option("--output", "output_path", required=True, type=click.Path(), help="Protected PNG destination.")
@click.option("--no-sidecar", is_flag=True, help="Do not write the .sisa.json sidecar.")
@click.option("--embed", is_flag=True, help="Embed the manifest in the output PNG.")
@click.option("--kdf-iterations", type=int, default=200_000, show_default=True, help="PBKDF2 iteration count.")
@_sisa_errors
def protect_cmd(input_path, regions_path, stub, stub_fraction, stub_grid,
                level, mode, sigma, output_path, no_sidecar, embed, kdf_iterations):
    """Blur or encrypt the prioritized regions of an image."""
    img = load_image(input_path)
    policy = SecurityPolicy(level=level, mode=mode, sigma=sigma)
    regions = _load_regions_for(img, regions_path, stub, stub_fraction, stub_grid)
    passphrase = _get_passphrase()
    original_format = probe_format(input_path)
    protected, manifest = protect(
        img,
        regions,
        Preferences(),
        policy,
        passphrase,
        original_format=original_format,
        kdf_params={"iterations": kdf_iterations},
    )
    save_lossless(protected, output_path)
    if not no_sidecar:
        write_sidecar(output_path, manifest)
    if embed:
        embed_manifest(output_path, manifest)

    click.echo(f"protected {input_path} -> {output_path}")
    click.echo(
        f"level {manifest.level} mode {manifest.mode} "
        f"target {manifest.target_fraction:.3f} achieved {manifest.achieved_fraction:.3f}"
        + (" (shortfall)" if manifest.shortfall else "")
    )
    for i, rec in enumerate(manifest.records, start=1):
        pixels = rec.byte_length // img.channels
        click.echo(
            f"  {i}. region {rec.region_id} {rec.kind} {rec.class_label!r} "
            f"bbox=({rec.bbox.p},{rec.bbox.q},{rec.bbox.l},{rec.bbox.b}) "
            f"{pixels} px {rec.mode}"
        )


@main.command(name="restore")
@click.option("--input", "input_path", required=True, type=click.Path(), help="Protected PNG.")
@click.option("--manifest", "manifest_path", type=click.Path(), default=None, help="Explicit manifest path (wins over embedded chunk and sidecar).")
@click.option("--output", "output_path", required=True, type=click.Path(), help="Restored PNG destination.")
@_sisa_errors
def restore_cmd(input_path, manifest_path, output_path):
    """Recover the original image bit-exactly."""
    img = load_image(input_path)
    manifest = resolve_manifest(input_path, manifest_path)
    passphrase = _get_passphrase()
    restored = restore(img, manifest, passphrase)
    save_lossless(restored, output_path)
    click.echo(f"restored {input_path} -> {output_path} ({len(manifest.records)} regions)")


@main.command(name="inspect")
@click.option("--input", "input_path", required=True, type=click.Path(), help="Protected PNG.")
@click.option("--manifest", "manifest_path", type=click.Path(), default=None, help="Explicit manifest path.")
@_sisa_errors
def inspect_cmd(input_path, manifest_path):
    """Print the manifest summary; no passphrase needed."""
    manifest = resolve_manifest(input_path, manifest_path)
    click.echo(f"manifest version {manifest.version} ({manifest.original_format} original)")
    click.echo(f"image {manifest.width}x{manifest.height}x{manifest.channels}")
    click.echo(
        f"level {manifest.level} mode {manifest.mode} sigma {manifest.sigma} "
        f"target {manifest.target_fraction:.3f} achieved {manifest.achieved_fraction:.6f}"
        + (" (shortfall)" if manifest.shortfall else "")
    )
    click.echo(f"regions: {len(manifest.records)}")
    for i, rec in enumerate(manifest.records, start=1):
        click.echo(
            f"  {i}. region {rec.region_id} {rec.kind} {rec.class_label!r} "
            f"bbox=({rec.bbox.p},{rec.bbox.q},{rec.bbox.l},{rec.bbox.b}) {rec.mode}"
        )


@main.command(name="bench")
@click.option("--sizes", default="640x480,1280x720,1920x1080", show_default=True, help="Comma-separated WIDTHxHEIGHT list.")
@click.option("--coverage", type=float, default=0.30, show_default=True, help="Selective coverage fraction.")
@click.option("--iterations", type=int, default=20, show_default=True, help="Timed iterations per mode.")
@click.option("--warmup", type=int, default=3, show_default=True, help="Discarded warmup iterations.")
@click.option("--sigma", type=float, default=8.0, show_default=True, help="Blur sigma for the sisa_blur mode.")
@click.option("--modes", default=",".join(BENCH_MODES), show_default=True, help="Comma-separated subset of bench modes.")
@click.option("--seed", type=int, default=2024, show_default=True, help="PRNG seed for synthetic images.")
@click.option("--out", "out_path", required=True, type=click.Path(), help="CSV destination.")
@_sisa_errors
def bench_cmd(sizes, coverage, iterations, warmup, sigma, modes, seed, out_path):
    """Time full-image vs selective alteration on synthetic images."""
    size_list = parse_sizes(sizes)
    mode_list = tuple(m.strip() for m in modes.split(",") if m.strip())
    if iterations < 1:
        raise ValidationError(f"iterations must be >= 1, got {iterations}")
    if not (0.0 < coverage <= 1.0):
        raise ValidationError(f"coverage must be in (0, 1], got {coverage}")
    rows = []
    for w, h in size_list:
        rows.extend(
            run_size(
                w, h,
                coverage=coverage,
                iterations=iterations,
                warmup=warmup,
                sigma=sigma,
                seed=seed,
                modes=mode_list,
            )
        )
        click.echo(f"benched {w}x{h}", err=True)
    csv_text = rows_to_csv(rows)
    Path(out_path).write_text(csv_text)
    click.echo(csv_text, nl=False)
    for (w, h), entry in ratios(rows).items():
        for op, value in entry.items():
            click.echo(f"ratio {w}x{h} sisa_{op}/full_{op}: {value:.3f}")


if __name__ == "__main__":
    main()
