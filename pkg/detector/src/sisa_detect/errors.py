"""Detector error types and exit codes."""

EXIT_IO = 2
EXIT_VALIDATION = 3
EXIT_MODEL = 4


class DetectorError(Exception):
    exit_code = 1


class ImageReadError(DetectorError):
    exit_code = EXIT_IO


class DocumentError(DetectorError):
    """Regions document violates schema v1."""

    exit_code = EXIT_VALIDATION


class ModelUnavailableError(DetectorError):
    """Required model or weights cannot be loaded; message says how to fix it."""

    exit_code = EXIT_MODEL
