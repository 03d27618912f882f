"""Measurement, downsampling and simulation operators.

Data are in intensity units: a measurement is the *mean* of ``f`` over a
pixel of the data grid rather than the raw integral ``<f, 1_E>``.  A data
term written with raw integrals on a ``2**N`` grid, ``||y - nu(f)||^2``,
therefore matches ``2**(-4N) ||y' - measure(f)||^2`` here; rescale lambda
accordingly when porting parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .grid import PixelImage, as_array
from .norms import discrete_theta_norm, h_theta_norm

__all__ = [
    "MeasurementOp",
    "DenoiseProblem",
    "InfeasibleError",
    "measure",
    "downsample",
    "objective",
    "regularizer",
    "add_gaussian_noise",
    "psnr",
    "PSNR_CAP",
]

PSNR_CAP = 200.0

Regularizer = Literal["h_theta", "theta_norm"]


class InfeasibleError(ValueError):
    """Raised when a candidate leaves the nonnegative cone."""


def measure(f, shape) -> np.ndarray:
    """Pixel means of ``f`` over a coarser grid of the given shape.

    ``shape`` may be an int (square grid side) or a ``(rows, cols)`` pair; the
    image shape must be a multiple of it along each axis.
    """
    arr = as_array(f)
    if np.isscalar(shape):
        shape = (int(shape), int(shape))
    r, c = shape
    rows, cols = arr.shape
    if r <= 0 or c <= 0 or rows < r or cols < c or rows % r or cols % c:
        raise ValueError(f"cannot measure a {arr.shape} image on a {(r, c)} grid")
    if (r, c) == (rows, cols):
        return arr.copy()
    return arr.reshape(r, rows // r, c, cols // c).mean(axis=(1, 3))


def downsample(a) -> PixelImage:
    """Average each ``2 x 2`` block of children into its parent pixel."""
    arr = as_array(a)
    rows, cols = arr.shape
    if rows < 2 or cols < 2 or rows % 2 or cols % 2:
        raise ValueError(f"cannot downsample an image of shape {arr.shape}")
    b = 0.25 * (arr[0::2, 0::2] + arr[0::2, 1::2] + arr[1::2, 0::2] + arr[1::2, 1::2])
    nonneg = a.nonneg if isinstance(a, PixelImage) else False
    return PixelImage(b, nonneg=nonneg)


class MeasurementOp:
    """Linear measurement map from pixel images to a data vector.

    Use :meth:`block_average` for the denoising data model or
    :meth:`from_matrix` for an arbitrary dense ``M x (rows * cols)`` matrix
    acting on the row-major flattened image.
    """

    def __init__(self, kind, domain_shape, output_dim, matrix=None, data_shape=None):
        self.kind = kind
        self.domain_shape = tuple(domain_shape)
        self.output_dim = int(output_dim)
        self.matrix = matrix
        self.data_shape = data_shape

    @classmethod
    def block_average(cls, domain_shape, data_shape) -> "MeasurementOp":
        domain_shape = tuple(domain_shape)
        data_shape = tuple(data_shape)
        if any(d % s or d < s for d, s in zip(domain_shape, data_shape)):
            raise ValueError(f"domain {domain_shape} is not a refinement of data grid {data_shape}")
        return cls("block_average", domain_shape, data_shape[0] * data_shape[1], data_shape=data_shape)

    @classmethod
    def from_matrix(cls, matrix, domain_shape) -> "MeasurementOp":
        matrix = np.asarray(matrix, dtype=float)
        domain_shape = tuple(domain_shape)
        if matrix.ndim != 2 or matrix.shape[1] != domain_shape[0] * domain_shape[1]:
            raise ValueError(f"matrix of shape {matrix.shape} does not act on {domain_shape} images")
        if not np.all(np.isfinite(matrix)):
            raise ValueError("measurement matrix has non-finite entries")
        return cls("general_matrix", domain_shape, matrix.shape[0], matrix=matrix)

    def _block(self):
        return self.domain_shape[0] // self.data_shape[0], self.domain_shape[1] // self.data_shape[1]

    def apply(self, a) -> np.ndarray:
        arr = as_array(a)
        if arr.shape != self.domain_shape:
            raise ValueError(f"operator acts on {self.domain_shape} images, got {arr.shape}")
        if self.kind == "block_average":
            return measure(arr, self.data_shape).ravel()
        return self.matrix @ arr.ravel()

    def adjoint(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float).ravel()
        if r.size != self.output_dim:
            raise ValueError(f"expected {self.output_dim} data values, got {r.size}")
        if self.kind == "block_average":
            br, bc = self._block()
            return np.kron(r.reshape(self.data_shape), np.ones((br, bc))) / (br * bc)
        return (self.matrix.T @ r).reshape(self.domain_shape)

    def norm_sq(self) -> float:
        """Squared operator norm (exact for both kinds)."""
        if self.kind == "block_average":
            br, bc = self._block()
            return 1.0 / (br * bc)
        if self.output_dim == 0:
            return 0.0
        return float(np.linalg.norm(self.matrix, 2) ** 2)


@dataclass(frozen=True, eq=False)
class DenoiseProblem:
    """``min_{a >= 0} 1/2 ||y - measure(a)||^2 + lam * R(a)``.

    ``regularizer="h_theta"`` (default) is the filter penalty
    ``||h_theta * a||_1`` used by the denoiser; ``"theta_norm"`` is the exact
    theta-norm, which is the one to use when comparing grid levels.
    """

    y: np.ndarray
    lam: float
    theta: float
    regularizer: Regularizer = "h_theta"

    def __post_init__(self):
        y = np.array(as_array(self.y), dtype=float)
        if not np.all(np.isfinite(y)):
            raise ValueError("y contains non-finite values")
        y.setflags(write=False)
        object.__setattr__(self, "y", y)
        if not np.isfinite(self.lam) or self.lam < 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError(f"theta must lie in [0, 1], got {self.theta}")
        if self.regularizer not in ("h_theta", "theta_norm"):
            raise ValueError(f"unknown regularizer {self.regularizer!r}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.y.shape


def regularizer(a, prob: DenoiseProblem) -> float:
    if prob.regularizer == "theta_norm":
        return discrete_theta_norm(a, prob.theta)
    return h_theta_norm(a, prob.theta)


def objective(a, prob: DenoiseProblem) -> float:
    """Loss of a feasible candidate, possibly on a finer grid than ``y``."""
    arr = as_array(a)
    if np.any(arr < 0):
        raise InfeasibleError("candidate has negative entries")
    r = prob.y - measure(arr, prob.shape)
    return float(0.5 * np.sum(r * r) + prob.lam * regularizer(arr, prob))


def add_gaussian_noise(img, sigma: float, seed: int) -> PixelImage:
    """Add i.i.d. ``N(0, sigma^2)`` noise; deterministic for a fixed seed."""
    if not sigma >= 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    arr = as_array(img)
    rng = np.random.default_rng(seed)
    return PixelImage(arr + sigma * rng.standard_normal(arr.shape))


def psnr(x, ref) -> float:
    """PSNR in dB for peak intensity 1, capped at ``PSNR_CAP``."""
    x = as_array(x)
    ref = as_array(ref)
    if x.shape != ref.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {ref.shape}")
    mse = float(np.mean((x - ref) ** 2))
    if mse == 0.0:
        return PSNR_CAP
    return float(min(PSNR_CAP, -10.0 * math.log10(mse)))
