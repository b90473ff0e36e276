"""Seeded synthetic head phantoms with exact ground truth.

A phantom is a dark background (20) holding a filled skull ellipse at
base intensity 160, textured with uniform integer noise that is drawn
for the left half only and mirrored exactly onto the right half, so the
image is perfectly bilaterally symmetric. An optional lesion disk breaks
that symmetry and is recorded pixel-exactly in the ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .imaging import GrayImage

BACKGROUND = 20
TISSUE = 160


class Lcg64:
    """64-bit linear congruential generator, fully specified so any
    implementation can reproduce the stream.

    state' = (6364136223846793005 * state + 1442695040888963407) mod 2**64

    Each draw advances the state once and uses the top 31 bits
    (state' >> 33). uniform_int(lo, hi) reduces that value modulo the
    range size; the tiny modulo bias is irrelevant, what matters is that
    the stream is exactly defined.
    """

    MULTIPLIER = 6364136223846793005
    INCREMENT = 1442695040888963407
    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = seed & self.MASK

    def next_bits(self) -> int:
        self.state = (self.MULTIPLIER * self.state + self.INCREMENT) & self.MASK
        return self.state >> 33

    def uniform_int(self, lo: int, hi: int) -> int:
        return lo + self.next_bits() % (hi - lo + 1)


@dataclass(frozen=True)
class LesionSpec:
    """Disk lesion: offset from the symmetry axis, row, radius, contrast."""

    center_dx: int
    center_y: int
    radius: int
    delta: int


@dataclass(frozen=True)
class PhantomSpec:
    width: int = 257
    height: int = 257
    seed: int = 1
    semi_axis_x: int = 100
    semi_axis_y: int = 120
    noise_amplitude: int = 10
    lesion: LesionSpec | None = None


@dataclass(frozen=True, eq=False)
class GroundTruth:
    axis_column: float
    lesion_mask: np.ndarray  # bool raster, all False when no lesion


def _validate(spec: PhantomSpec) -> None:
    if spec.width < 1 or spec.height < 1:
        raise ParameterError(f"raster must be at least 1x1, got {spec.width}x{spec.height}")
    cx = (spec.width - 1) / 2.0
    cy = (spec.height - 1) / 2.0
    if spec.semi_axis_x < 1 or spec.semi_axis_y < 1:
        raise ParameterError("ellipse semi-axes must be >= 1")
    if cx - spec.semi_axis_x < 4 or cy - spec.semi_axis_y < 4:
        raise ParameterError(
            f"ellipse with semi-axes ({spec.semi_axis_x}, {spec.semi_axis_y}) does not fit "
            f"a {spec.width}x{spec.height} raster with a 4 px margin"
        )
    if not (0 <= spec.noise_amplitude <= 95):
        raise ParameterError(
            f"noise amplitude must lie in 0..95 so tissue stays in 8-bit range, "
            f"got {spec.noise_amplitude}"
        )
    lesion = spec.lesion
    if lesion is None:
        return
    if lesion.radius < 1:
        raise ParameterError(f"lesion radius must be >= 1, got {lesion.radius}")
    if abs(lesion.delta) < 1:
        raise ParameterError(f"lesion delta must satisfy |delta| >= 1, got {lesion.delta}")
    lx = cx + lesion.center_dx
    ly = lesion.center_y
    r = lesion.radius
    dy, dx = np.ogrid[-r:r + 1, -r:r + 1]
    in_disk = dx * dx + dy * dy <= r * r
    px = lx + dx
    py = ly + dy
    inside = ((px - cx) / spec.semi_axis_x) ** 2 + ((py - cy) / spec.semi_axis_y) ** 2 <= 1.0
    if not np.all(inside[in_disk]):
        raise ParameterError("lesion disk must lie entirely inside the skull ellipse")


def generate(spec: PhantomSpec) -> tuple[GrayImage, GroundTruth]:
    """Build the phantom and its ground truth, deterministically.

    Noise draws happen in row-major order over the left half (columns
    0 .. floor((width-1)/2), top to bottom), one draw per in-ellipse
    pixel; each value is written to the pixel and to its mirror.
    """
    _validate(spec)
    w, h = spec.width, spec.height
    cx = (w - 1) / 2.0
    cy = (h - 1) / 2.0
    ys, xs = np.ogrid[0:h, 0:w]
    ellipse = ((xs - cx) / spec.semi_axis_x) ** 2 + ((ys - cy) / spec.semi_axis_y) ** 2 <= 1.0

    img = np.full((h, w), BACKGROUND, dtype=np.uint8)
    rng = Lcg64(spec.seed)
    amp = spec.noise_amplitude
    left_cols = (w + 1) // 2
    for y in range(h):
        row_ellipse = ellipse[y]
        row = img[y]
        for x in range(left_cols):
            if row_ellipse[x]:
                value = TISSUE + rng.uniform_int(-amp, amp)
                row[x] = value
                row[w - 1 - x] = value

    lesion_mask = np.zeros((h, w), dtype=bool)
    if spec.lesion is not None:
        lx = cx + spec.lesion.center_dx
        ly = float(spec.lesion.center_y)
        dist2 = (xs - lx) ** 2 + (ys - ly) ** 2
        lesion_mask = dist2 <= spec.lesion.radius ** 2
        value = min(255, max(0, TISSUE + spec.lesion.delta))
        img[lesion_mask] = value

    return GrayImage(img), GroundTruth(axis_column=cx, lesion_mask=lesion_mask)
