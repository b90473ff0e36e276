"""Raster types, binary netpbm I/O, and grayscale preprocessing.

Images are stored as numpy arrays indexed ``[y, x]``: x is the column
index growing rightward, y the row index growing downward, both 0-based.
All filters use one rounding rule (half away from zero) and one border
policy (mirror reflection about the edge pixel, numpy ``mode='reflect'``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import NetpbmError, ParameterError


def round_half_away(values):
    """Round to the nearest integer, halves away from zero.

    Returns floats (numpy's default banker's rounding is deliberately
    not used anywhere in this package).
    """
    v = np.asarray(values, dtype=np.float64)
    return np.sign(v) * np.floor(np.abs(v) + 0.5)


def _as_uint8(pixels, expect_ndim: int, what: str) -> np.ndarray:
    arr = np.asarray(pixels)
    if arr.ndim != expect_ndim:
        raise ParameterError(f"{what} must be {expect_ndim}-dimensional, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if not np.issubdtype(arr.dtype, np.integer):
            raise ParameterError(f"{what} values must be integers in 0..255")
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise ParameterError(f"{what} values must lie in 0..255")
        arr = arr.astype(np.uint8)
    if arr.size == 0:
        raise ParameterError(f"{what} must contain at least one pixel")
    return np.ascontiguousarray(arr)


@dataclass(frozen=True, eq=False)
class GrayImage:
    """8-bit grayscale raster, ``pixels[y, x]`` row-major."""

    pixels: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "pixels", _as_uint8(self.pixels, 2, "GrayImage"))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True, eq=False)
class RgbImage:
    """8-bit color raster, ``pixels[y, x]`` holding (r, g, b)."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = _as_uint8(self.pixels, 3, "RgbImage")
        if arr.shape[2] != 3:
            raise ParameterError(f"RgbImage needs 3 channels, got {arr.shape[2]}")
        object.__setattr__(self, "pixels", arr)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


# ---------------------------------------------------------------------------
# netpbm I/O (binary P5/P6, maxval 255)

_WHITESPACE = b" \t\r\n\x0b\x0c"


def _next_token(data: bytes, pos: int, field: str) -> tuple[bytes, int]:
    n = len(data)
    while pos < n:
        c = data[pos:pos + 1]
        if c == b"#":
            while pos < n and data[pos:pos + 1] not in b"\r\n":
                pos += 1
        elif c in _WHITESPACE:
            pos += 1
        else:
            break
    if pos >= n:
        raise NetpbmError(field, "header ended before the value")
    start = pos
    while pos < n and data[pos:pos + 1] not in _WHITESPACE and data[pos:pos + 1] != b"#":
        pos += 1
    return data[start:pos], pos


def _int_token(data: bytes, pos: int, field: str) -> tuple[int, int]:
    tok, pos = _next_token(data, pos, field)
    if not tok.isdigit():
        raise NetpbmError(field, f"expected a decimal integer, got {tok!r}")
    return int(tok), pos


def load_netpbm(path) -> GrayImage | RgbImage:
    """Read a binary PGM (P5) or PPM (P6) file with maxval 255.

    Header comments (#) and arbitrary whitespace are accepted; exactly one
    whitespace byte separates the maxval from the raw payload.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    magic = data[:2]
    if magic not in (b"P5", b"P6"):
        raise NetpbmError("magic", f"expected P5 or P6, got {magic!r}")
    channels = 1 if magic == b"P5" else 3
    pos = 2
    width, pos = _int_token(data, pos, "width")
    height, pos = _int_token(data, pos, "height")
    if width < 1:
        raise NetpbmError("width", f"must be >= 1, got {width}")
    if height < 1:
        raise NetpbmError("height", f"must be >= 1, got {height}")
    maxval, pos = _int_token(data, pos, "maxval")
    if maxval != 255:
        raise NetpbmError("maxval", f"only maxval 255 is supported, got {maxval}")
    if pos >= len(data) or data[pos:pos + 1] not in _WHITESPACE:
        raise NetpbmError("payload", "missing whitespace byte after maxval")
    pos += 1
    expected = width * height * channels
    payload = data[pos:pos + expected]
    if len(payload) < expected:
        raise NetpbmError(
            "payload",
            f"truncated: expected {expected} bytes, found {len(payload)}",
        )
    arr = np.frombuffer(payload, dtype=np.uint8)
    if channels == 1:
        return GrayImage(arr.reshape(height, width).copy())
    return RgbImage(arr.reshape(height, width, 3).copy())


def save_netpbm(image: GrayImage | RgbImage, path) -> None:
    """Write binary P5 (gray) or P6 (color), byte-for-byte deterministic.

    Header is exactly ``P5\\n<w> <h>\\n255\\n`` followed by the raw pixels.
    """
    if isinstance(image, GrayImage):
        magic = b"P5"
    elif isinstance(image, RgbImage):
        magic = b"P6"
    else:
        raise ParameterError(f"cannot save object of type {type(image).__name__}")
    header = magic + b"\n%d %d\n255\n" % (image.width, image.height)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(image.pixels.tobytes())


# ---------------------------------------------------------------------------
# color conversion and preprocessing filters

def rgb_to_gray(img: RgbImage) -> GrayImage:
    """BT.601 luma: gray = round(0.299 r + 0.587 g + 0.114 b)."""
    p = img.pixels.astype(np.float64)
    gray = 0.299 * p[:, :, 0] + 0.587 * p[:, :, 1] + 0.114 * p[:, :, 2]
    return GrayImage(round_half_away(gray).astype(np.uint8))


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Sampled 2-D Gaussian of radius ceil(3 sigma), renormalized to sum 1."""
    if not sigma > 0:
        raise ParameterError(f"sigma must be > 0, got {sigma}")
    radius = math.ceil(3.0 * sigma)
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    g1 = np.exp(-(xs * xs) / (2.0 * sigma * sigma))
    kernel = np.outer(g1, g1)
    return kernel / kernel.sum()


def _gaussian_kernel_1d(sigma: float) -> np.ndarray:
    radius = math.ceil(3.0 * sigma)
    xs = np.arange(-radius, radius + 1, dtype=np.float64)
    g1 = np.exp(-(xs * xs) / (2.0 * sigma * sigma))
    return g1 / g1.sum()


def smooth_raster(values: np.ndarray, sigma: float) -> np.ndarray:
    """Gaussian-smooth a 2-D float raster; no rounding, reflected borders.

    Separable implementation of the kernel returned by gaussian_kernel().
    """
    if not sigma > 0:
        raise ParameterError(f"sigma must be > 0, got {sigma}")
    k1 = _gaussian_kernel_1d(sigma)
    radius = (len(k1) - 1) // 2
    padded = np.pad(np.asarray(values, dtype=np.float64), radius, mode="reflect")
    rows = sliding_window_view(padded, len(k1), axis=1) @ k1
    return sliding_window_view(rows, len(k1), axis=0) @ k1


def gaussian_smooth(img: GrayImage, sigma: float) -> GrayImage:
    """Gaussian blur with kernel radius ceil(3 sigma); result re-quantized."""
    smoothed = smooth_raster(img.pixels, sigma)
    return GrayImage(round_half_away(smoothed).astype(np.uint8))


def median_filter(img: GrayImage, window: int) -> GrayImage:
    """Exact window x window median, reflected borders; window odd and >= 3."""
    if window < 3 or window % 2 == 0:
        raise ParameterError(f"median window must be odd and >= 3, got {window}")
    radius = window // 2
    padded = np.pad(img.pixels, radius, mode="reflect")
    windows = sliding_window_view(padded, (window, window))
    med = np.median(windows, axis=(2, 3))
    return GrayImage(med.astype(np.uint8))


def contrast_stretch(img: GrayImage) -> GrayImage:
    """Linear min-max stretch onto [0, 255]; flat images pass through."""
    lo = int(img.pixels.min())
    hi = int(img.pixels.max())
    if hi == lo:
        return img
    levels = np.arange(256, dtype=np.float64)
    stretched = round_half_away((levels - lo) * 255.0 / (hi - lo))
    # entries outside [lo, hi] are never indexed; clip keeps the cast safe
    lut = np.clip(stretched, 0, 255).astype(np.uint8)
    return GrayImage(lut[img.pixels])
