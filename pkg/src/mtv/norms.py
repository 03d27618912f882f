"""Difference filters, the exact discrete theta-norm and corner measures.

For ``f = sum a[i, j] 1_E[i, j]`` the three measures ``[D x D] f``,
``[D x I] f`` and ``[I x D] f`` are sums of Dirac masses on the knots, with
amplitudes given by full (zero-padded) convolutions of ``a`` with

    h11 = [[1, -1], [-1, 1]],   h10 = [[1], [-1]],   h01 = [[1, -1]].

The continuous-domain norm

    ||f||_theta = theta ||[D x D] f||_M + (1 - theta) ||grad f||_{M^2}

is therefore evaluated without any discretization error:

    ||a||_theta = theta ||h11 * a||_1
                  + (1 - theta) (dx2 ||h10 * a||_1 + dx1 ||h01 * a||_1),

with ``dx1 = dx2 = 2**-n`` on a square dyadic grid.

``theta = 0`` is accepted and gives plain anisotropic TV.  Norm equivalence
with the mixed-derivative norm only holds for ``theta > 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import as_array

__all__ = [
    "H11",
    "H10",
    "H01",
    "FilterBank",
    "AtomicMeasure",
    "conv_full",
    "conv_full_adjoint",
    "corner_norm",
    "corner_measure",
    "gradient_norms",
    "total_variation",
    "discrete_theta_norm",
    "h_theta_norm",
    "to_theta_norm_params",
    "to_h_theta_params",
]

H11 = np.array([[1.0, -1.0], [-1.0, 1.0]])
H10 = np.array([[1.0], [-1.0]])
H01 = np.array([[1.0, -1.0]])
for _h in (H11, H10, H01):
    _h.setflags(write=False)


def _check_theta(theta):
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")


@dataclass(frozen=True)
class FilterBank:
    """The three difference kernels and the blending parameter theta."""

    theta: float = 0.5

    def __post_init__(self):
        _check_theta(self.theta)

    h11 = H11
    h10 = H10
    h01 = H01

    def kernels(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.h11, self.h10, self.h01


@dataclass(frozen=True)
class AtomicMeasure:
    """Finite sum of Dirac masses ``sum_k amp[k] delta_{points[k]}``.

    ``points`` has shape ``(K, 2)`` with coordinates in ``[0, 1]^2``.
    """

    points: np.ndarray
    amplitudes: np.ndarray

    def __len__(self):
        return len(self.amplitudes)

    @property
    def total_variation(self) -> float:
        return float(np.abs(self.amplitudes).sum())

    def as_dict(self) -> dict[tuple[float, float], float]:
        return {tuple(p): float(v) for p, v in zip(self.points.tolist(), self.amplitudes)}


def conv_full(a, h) -> np.ndarray:
    """Full 2-D linear convolution of ``a`` with a small kernel ``h``.

    The input is implicitly zero outside its support; the output has shape
    ``(rows + kr - 1, cols + kc - 1)``.  Computed directly as a sum of shifted
    copies so results are bit-reproducible.
    """
    a = np.asarray(a, dtype=float)
    h = np.asarray(h, dtype=float)
    if a.ndim != 2 or a.size == 0:
        raise ValueError(f"conv_full needs a nonempty 2-D input, got shape {a.shape}")
    rows, cols = a.shape
    kr, kc = h.shape
    out = np.zeros((rows + kr - 1, cols + kc - 1))
    for p in range(kr):
        for q in range(kc):
            if h[p, q] != 0:
                out[p : p + rows, q : q + cols] += h[p, q] * a
    return out


def conv_full_adjoint(v, h, shape) -> np.ndarray:
    """Adjoint of ``conv_full(., h)`` for inputs of the given shape."""
    v = np.asarray(v, dtype=float)
    rows, cols = shape
    kr, kc = h.shape
    out = np.zeros((rows, cols))
    for p in range(kr):
        for q in range(kc):
            if h[p, q] != 0:
                out += h[p, q] * v[p : p + rows, q : q + cols]
    return out


def corner_norm(a) -> float:
    """``||[D x D] f||_M = ||h11 * a||_1``."""
    return float(np.abs(conv_full(as_array(a), H11)).sum())


def corner_measure(a) -> AtomicMeasure:
    """Atomic measure ``[D x D] f`` of the synthesized function.

    Atoms sit on the knots ``(i / rows, j / cols)``; only exact zeros are
    dropped, so floating-point residue is kept rather than discarded.
    """
    arr = as_array(a)
    rows, cols = arr.shape
    amp = conv_full(arr, H11)
    i, j = np.nonzero(amp)
    points = np.column_stack([i / rows, j / cols])
    return AtomicMeasure(points=points, amplitudes=amp[i, j])


def gradient_norms(a) -> tuple[float, float]:
    """``(||[D x I] f||_M, ||[I x D] f||_M)``.

    A jump across a line ``x1 = const`` extends over pixel edges of length
    ``1 / cols``, hence the per-axis weights.
    """
    arr = as_array(a)
    rows, cols = arr.shape
    g10 = np.abs(conv_full(arr, H10)).sum() / cols
    g01 = np.abs(conv_full(arr, H01)).sum() / rows
    return float(g10), float(g01)


def total_variation(a) -> float:
    """Anisotropic TV ``||grad f||_{M^2}``."""
    return sum(gradient_norms(a))


def discrete_theta_norm(a, theta: float) -> float:
    """Exact ``||f||_theta`` of the synthesized function."""
    _check_theta(theta)
    arr = as_array(a)
    return theta * corner_norm(arr) + (1.0 - theta) * total_variation(arr)


def h_theta_norm(a, theta: float) -> float:
    """``||h_theta * a||_1`` with ``h_theta = [theta h11; (1 - theta/2) h10; (1 - theta/2) h01]``.

    This is the grid-level penalty of the shipped denoiser.  It does not carry
    the pixel-size factor, so it is not invariant under :func:`~mtv.grid.refine`.
    """
    _check_theta(theta)
    arr = as_array(a)
    w = 1.0 - theta / 2.0
    return float(
        theta * np.abs(conv_full(arr, H11)).sum()
        + w * np.abs(conv_full(arr, H10)).sum()
        + w * np.abs(conv_full(arr, H01)).sum()
    )


def to_theta_norm_params(lam: float, theta: float, n: int) -> tuple[float, float]:
    """Convert an ``h_theta`` penalty on a ``2**n`` square grid to theta-norm form.

    Returns ``(lam2, theta2)`` with ``lam * ||h_theta * a||_1 ==
    lam2 * ||a||_theta2`` for every ``2**n x 2**n`` array ``a``.
    """
    _check_theta(theta)
    side = 2.0 ** (-n)
    lam2 = lam * (theta + (1.0 - theta / 2.0) / side)
    if lam2 == 0:
        return 0.0, theta
    return lam2, lam * theta / lam2


def to_h_theta_params(lam: float, theta: float, n: int) -> tuple[float, float]:
    """Inverse of :func:`to_theta_norm_params`.

    Only corner/TV weight ratios of at least ``1 / 2`` are reachable by the
    ``h_theta`` family; other inputs raise ``ValueError``.
    """
    _check_theta(theta)
    side = 2.0 ** (-n)
    lam2 = lam * ((1.0 - theta) * side + theta / 2.0)
    if lam2 == 0:
        return 0.0, theta
    theta2 = lam * theta / lam2
    if theta2 > 1.0 + 1e-12:
        raise ValueError("corner weight too large for the h_theta parametrization")
    return lam2, min(theta2, 1.0)
