"""Dyadic grids, pixel images and the synthesis/analysis pair.

A coefficient array ``a`` of shape ``(2**n1, 2**n2)`` stands for the
piecewise-constant function

    f = sum_{i, j} a[i, j] * 1_{E[i, j]}

on the unit square ``K = [0, 1]^2``, where ``E[i, j]`` is the pixel
``[i / rows, (i + 1) / rows] x [j / cols, (j + 1) / cols]``.  Axis 0 of the
array runs along the first coordinate ``x1``.  Non-dyadic shapes are accepted
everywhere a level is not needed; the pixel side along each axis is then
``1 / rows`` and ``1 / cols``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

__all__ = [
    "GridLevel",
    "PixelImage",
    "PiecewiseConstantFn",
    "as_array",
    "synthesize",
    "analyze",
    "refine",
]


@dataclass(frozen=True)
class GridLevel:
    """Dyadic level ``n``: ``2**n x 2**n`` pixels of side ``2**-n``."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise ValueError(f"grid level must be a nonnegative integer, got {self.n!r}")

    @property
    def size(self) -> int:
        return 2**self.n

    @property
    def spacing(self) -> float:
        return 2.0 ** (-self.n)

    def knots(self) -> np.ndarray:
        """Knot coordinates ``2**-n * [0 .. 2**n]`` along one axis."""
        return np.arange(self.size + 1) * self.spacing


@dataclass(frozen=True, eq=False)
class PixelImage:
    """Immutable 2-D coefficient array on the unit square.

    Parameters
    ----------
    values : array_like
        Pixel coefficients, converted to a read-only float64 array.
    nonneg : bool
        If True, every entry must be >= 0 (the feasible cone of the
        reconstruction problems).
    """

    values: np.ndarray
    nonneg: bool = False
    _level: Union[tuple, None] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        arr = np.array(self.values, dtype=float, copy=True)
        if arr.ndim != 2 or arr.size == 0:
            raise ValueError(f"pixel image must be a nonempty 2-D array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("pixel image contains non-finite values")
        if self.nonneg and np.any(arr < 0):
            raise ValueError("nonnegative image has negative entries")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @classmethod
    def zeros(cls, n: int, nonneg: bool = True) -> "PixelImage":
        size = GridLevel(n).size
        return cls(np.zeros((size, size)), nonneg=nonneg)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def spacing(self) -> tuple[float, float]:
        """Pixel side along ``x1`` and ``x2``."""
        return 1.0 / self.shape[0], 1.0 / self.shape[1]

    @property
    def levels(self) -> tuple[int, int] | None:
        """Per-axis dyadic levels, or None for non-dyadic shapes."""
        out = []
        for s in self.shape:
            if s & (s - 1):
                return None
            out.append(s.bit_length() - 1)
        return tuple(out)

    @property
    def level(self) -> GridLevel:
        """Level of a square dyadic image; raises otherwise."""
        lv = self.levels
        if lv is None or lv[0] != lv[1]:
            raise ValueError(f"image of shape {self.shape} is not on a square dyadic grid")
        return GridLevel(lv[0])

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, PixelImage):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.values, other.values))

    __hash__ = None


def as_array(a) -> np.ndarray:
    """Coefficient array of a PixelImage, PiecewiseConstantFn or array."""
    if isinstance(a, PiecewiseConstantFn):
        return a.image.values
    if isinstance(a, PixelImage):
        return a.values
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a nonempty 2-D array, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class PiecewiseConstantFn:
    """The function ``sum a[i, j] 1_{E[i, j]}``; zero outside ``K``."""

    image: PixelImage

    def __call__(self, x1, x2):
        a = self.image.values
        rows, cols = a.shape
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        inside = (x1 >= 0) & (x1 <= 1) & (x2 >= 0) & (x2 <= 1)
        # the closing edge x = 1 belongs to the last pixel
        i = np.clip(np.floor(x1 * rows).astype(int), 0, rows - 1)
        j = np.clip(np.floor(x2 * cols).astype(int), 0, cols - 1)
        return np.where(inside, a[i, j], 0.0)

    def pixel_integrals(self) -> np.ndarray:
        """``<f, 1_E>`` for every pixel of the native grid."""
        dx1, dx2 = self.image.spacing
        return self.image.values * (dx1 * dx2)


def synthesize(a) -> PiecewiseConstantFn:
    """Map coefficients to the piecewise-constant function they expand."""
    if isinstance(a, PixelImage):
        return PiecewiseConstantFn(a)
    return PiecewiseConstantFn(PixelImage(as_array(a)))


def analyze(f: PiecewiseConstantFn, shape: tuple[int, int] | None = None) -> PixelImage:
    """Normalized pixel integrals ``|E|^-1 <f, 1_E>``.

    On the function's native grid this is the inverse of :func:`synthesize`.
    A coarser ``shape`` (each axis dividing the native one) returns block
    means, i.e. the analysis on the coarser grid.
    """
    img = f.image
    if shape is None or tuple(shape) == img.shape:
        return img
    rows, cols = img.shape
    r, c = shape
    if r <= 0 or c <= 0 or rows % r or cols % c:
        raise ValueError(f"cannot analyze a {img.shape} function on a {tuple(shape)} grid")
    blocks = img.values.reshape(r, rows // r, c, cols // c)
    return PixelImage(blocks.mean(axis=(1, 3)), nonneg=img.nonneg)


def refine(a, times: int = 1) -> PixelImage:
    """Embed an image into the next finer dyadic grid(s).

    Every parent pixel is copied into its ``2 x 2`` children, so the
    synthesized function is unchanged.
    """
    if times < 0:
        raise ValueError("times must be >= 0")
    arr = as_array(a)
    nonneg = a.nonneg if isinstance(a, PixelImage) else False
    k = 2**times
    return PixelImage(np.kron(arr, np.ones((k, k))), nonneg=nonneg)
