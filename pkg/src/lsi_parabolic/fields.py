"""Permeability fields, source terms and initial data.

Synthetic fields draw every random number from :class:`SplitMix64` and only
use integer cell arithmetic, so a given seed yields the same field in any
implementation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, MalformedRaster, UnknownKind
from .grid import CoarseFineGrid

FIELD_KINDS = ("constant", "inclusions", "channels", "fracture_synthetic")
_MASK64 = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Float in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def randint(self, lo: int, hi: int) -> int:
        """Integer in [lo, hi] (inclusive); modulo bias is accepted."""
        return lo + self.next_u64() % (hi - lo + 1)


@dataclass(frozen=True, eq=False)
class PermeabilityField:
    """Cell-wise permeability, flat in fine-cell order (``cy * n + cx``)."""

    values: np.ndarray
    n: int

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.n * self.n,):
            raise DimensionMismatch(f"expected {self.n * self.n} cell values, got {v.shape}")
        if not np.all(np.isfinite(v)) or v.min() <= 0.0:
            raise ValueError("permeability must be finite and strictly positive")
        object.__setattr__(self, "values", v)

    @property
    def kappa_min(self) -> float:
        return float(self.values.min())

    @property
    def kappa_max(self) -> float:
        return float(self.values.max())

    @property
    def contrast(self) -> float:
        return self.kappa_max / self.kappa_min

    def as_image(self) -> np.ndarray:
        """(n, n) array indexed ``[cy, cx]``."""
        return self.values.reshape(self.n, self.n)

    def scaled(self, c: float) -> "PermeabilityField":
        return PermeabilityField(self.values * c, self.n)

    def to_csv(self, path) -> None:
        rows = (",".join(repr(float(v)) for v in row) for row in self.as_image())
        Path(path).write_text("\n".join(rows) + "\n")


def _mark_inclusions(mask, rng, n):
    for _ in range(max(1, n * n // 80)):
        w, h = rng.randint(2, 4), rng.randint(2, 4)
        x0, y0 = rng.randint(0, n - w), rng.randint(0, n - h)
        mask[y0:y0 + h, x0:x0 + w] = True


def _mark_channels(mask, rng, n):
    for _ in range(max(2, n // 12)):
        width = rng.randint(1, 2)
        pos = rng.randint(0, n - width)
        length = rng.randint(n // 2, n)
        start = rng.randint(0, n - length)
        if rng.next_u64() & 1:
            mask[pos:pos + width, start:start + length] = True
        else:
            mask[start:start + length, pos:pos + width] = True


def _bresenham(x0, y0, x1, y1):
    dx, dy = abs(x1 - x0), -abs(y1 - y0)
    sx, sy = (1 if x0 < x1 else -1), (1 if y0 < y1 else -1)
    err = dx + dy
    while True:
        yield x0, y0
        if x0 == x1 and y0 == y1:
            return
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy


def _mark_fractures(mask, rng, n):
    reach = max(2, n // 3)
    for _ in range(max(3, n // 10)):
        x0, y0 = rng.randint(0, n - 1), rng.randint(0, n - 1)
        x1 = min(max(x0 + rng.randint(-reach, reach), 0), n - 1)
        y1 = min(max(y0 + rng.randint(-reach, reach), 0), n - 1)
        for x, y in _bresenham(x0, y0, x1, y1):
            mask[y, x] = True


_MARKERS = {
    "inclusions": _mark_inclusions,
    "channels": _mark_channels,
    "fracture_synthetic": _mark_fractures,
}


def generate_field(grid: CoarseFineGrid, kind: str, contrast: float = 1.0, seed: int = 0) -> PermeabilityField:
    """Background permeability 1, features ``contrast``."""
    if contrast < 1.0:
        raise ValueError("contrast must be >= 1")
    n = grid.n
    mask = np.zeros((n, n), dtype=bool)
    if kind == "constant":
        pass
    elif kind in _MARKERS:
        _MARKERS[kind](mask, SplitMix64(seed), n)
    else:
        raise UnknownKind(f"unknown field kind {kind!r}; expected one of {FIELD_KINDS}")
    values = np.where(mask, float(contrast), 1.0).ravel()
    return PermeabilityField(values, n)


def read_raster(path) -> np.ndarray:
    """Plain-text grayscale raster: ``rows cols maxval`` then row-major values.

    ``#`` starts a comment.  Row 0 is the top of the image.
    """
    tokens = []
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise MalformedRaster(f"{path}: {exc}") from exc
    for line in text.splitlines():
        tokens.extend(line.split("#", 1)[0].split())
    if len(tokens) < 3:
        raise MalformedRaster(f"{path}: missing header")
    try:
        rows, cols, maxval = (int(t) for t in tokens[:3])
        data = np.array([float(t) for t in tokens[3:]])
    except ValueError as exc:
        raise MalformedRaster(f"{path}: non-numeric token ({exc})") from exc
    if rows <= 0 or cols <= 0 or maxval <= 0:
        raise MalformedRaster(f"{path}: bad header")
    if data.size != rows * cols:
        raise MalformedRaster(f"{path}: expected {rows * cols} values, found {data.size}")
    if data.min(initial=0.0) < 0 or data.max(initial=0.0) > maxval:
        raise MalformedRaster(f"{path}: values outside [0, {maxval}]")
    return data.reshape(rows, cols)


def write_raster(path, image, maxval: int = 255) -> None:
    image = np.asarray(image)
    rows, cols = image.shape
    lines = [f"{rows} {cols} {maxval}"]
    lines += [" ".join(str(int(v)) for v in row) for row in image]
    Path(path).write_text("\n".join(lines) + "\n")


def load_raster(path, threshold: float, kappa_low: float, kappa_high: float, grid: CoarseFineGrid) -> PermeabilityField:
    """Nearest-neighbour downsample of a raster onto the fine cells.

    Pixels brighter than ``threshold`` become ``kappa_high``.
    """
    image = read_raster(path)
    rows, cols = image.shape
    n = grid.n
    if rows < n or cols < n:
        raise DimensionMismatch(f"raster {rows}x{cols} is coarser than the {n}x{n} fine grid")
    c = np.arange(n)
    col = ((2 * c + 1) * cols) // (2 * n)
    row = ((2 * (n - 1 - c) + 1) * rows) // (2 * n)
    sampled = image[np.ix_(row, col)]  # [cy, cx]
    values = np.where(sampled > threshold, float(kappa_high), float(kappa_low)).ravel()
    return PermeabilityField(values, n)


@dataclass(frozen=True)
class SourceSpec:
    """Source ``f(x, t)`` and initial value ``u0(x)`` descriptors.

    Kinds: ``zero``, ``constant`` (value ``scale``) and ``sine``
    (``scale * 2 pi^2 sin(pi x) sin(pi y)``).  The default is the benchmark
    pairing of a sine source with zero initial data.
    """

    f_kind: str = "sine"
    f_scale: float = 1.0
    u0_kind: str = "zero"
    u0_scale: float = 1.0

    @property
    def time_independent(self) -> bool:
        return True

    def f(self, coords: np.ndarray, t: float) -> np.ndarray:
        return _evaluate(self.f_kind, self.f_scale, coords)

    def u0(self, coords: np.ndarray) -> np.ndarray:
        return _evaluate(self.u0_kind, self.u0_scale, coords)


def _evaluate(kind: str, scale: float, coords: np.ndarray) -> np.ndarray:
    x, y = coords[:, 0], coords[:, 1]
    if kind == "zero":
        return np.zeros(len(coords))
    if kind == "constant":
        return np.full(len(coords), float(scale))
    if kind == "sine":
        return scale * 2.0 * math.pi**2 * np.sin(math.pi * x) * np.sin(math.pi * y)
    raise UnknownKind(f"unknown source kind {kind!r}")
