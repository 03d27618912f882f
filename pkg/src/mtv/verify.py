"""Level-set decompositions, truncations, and the coarea/cocorner checks.

For a nonnegative pixel image taking the values ``0 = v0 < v1 < ... < vM``,

    a = sum_m (v_m - v_{m-1}) 1{a >= v_m}

exactly.  The anisotropic TV splits accordingly (coarea formula), because
every edge difference satisfies ``|p - q| = int |1{p >= t} - 1{q >= t}| dt``.

The analogous splitting of the corner norm is *not* an identity on general
pixel images: a knot where a layer has a convex corner sitting on a reflex
corner of the layer below carries atoms of opposite signs that cancel in
``a`` but not in the layers.  Only the inequality

    C_-(a, s) + C_+(a, s) >= ||[D x D] a||

holds in general (triangle inequality), with equality whenever nested layers
never put opposite-signed atoms on a common knot (for instance nested
rectangles).  :func:`corner_sign_conflicts` counts the offending knots.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .grid import PixelImage, as_array, synthesize
from .norms import H11, conv_full, corner_norm, total_variation

__all__ = [
    "LevelDecomposition",
    "level_sets",
    "truncate_min",
    "truncate_max",
    "CocornerResult",
    "CoareaResult",
    "cocorner_check",
    "coarea_check",
    "corner_sign_conflicts",
    "continuous_norms",
    "nested_rectangles_image",
]


def _nonneg(a) -> np.ndarray:
    arr = as_array(a)
    if np.any(arr < 0):
        raise ValueError("image must be nonnegative")
    return arr


def truncate_min(a, s: float) -> PixelImage:
    """``min(a, s)`` componentwise."""
    if s < 0:
        raise ValueError(f"threshold must be >= 0, got {s}")
    return PixelImage(np.minimum(as_array(a), s))


def truncate_max(a, s: float) -> PixelImage:
    """``max(a - s, 0)`` componentwise."""
    if s < 0:
        raise ValueError(f"threshold must be >= 0, got {s}")
    return PixelImage(np.maximum(as_array(a) - s, 0.0), nonneg=True)


@dataclass(frozen=True)
class LevelDecomposition:
    """Nested superlevel sets ``1{a >= v_m}`` with jump heights."""

    thresholds: np.ndarray  # v_0 = 0 < v_1 < ... < v_M
    level_sets: tuple  # boolean arrays, one per v_1 .. v_M

    @property
    def heights(self) -> np.ndarray:
        return np.diff(self.thresholds)

    def reconstruct(self) -> np.ndarray:
        out = np.zeros(self.level_sets[0].shape) if self.level_sets else None
        for h, mask in zip(self.heights, self.level_sets):
            out = out + h * mask
        return out

    def layer_corner_sum(self) -> float:
        return float(sum(h * corner_norm(m.astype(float)) for h, m in zip(self.heights, self.level_sets)))

    def layer_tv_sum(self) -> float:
        return float(sum(h * total_variation(m.astype(float)) for h, m in zip(self.heights, self.level_sets)))


def level_sets(a, quantize_bits: int | None = None) -> LevelDecomposition:
    """Superlevel-set decomposition over the distinct values of ``a``.

    Values are grouped by exact equality.  ``quantize_bits=b`` first rounds
    every entry to the nearest multiple of ``2**-b`` to merge near-ties.
    """
    arr = _nonneg(a)
    if quantize_bits is not None:
        arr = np.round(arr * 2.0**quantize_bits) / 2.0**quantize_bits
    values = np.unique(arr)
    thresholds = np.concatenate([[0.0], values[values > 0]])
    sets = tuple(arr >= v for v in thresholds[1:])
    if not sets:
        sets = ()
    return LevelDecomposition(thresholds=thresholds, level_sets=sets)


class CocornerResult(NamedTuple):
    c_minus: float
    c_plus: float
    total: float

    @property
    def defect(self) -> float:
        """``C_- + C_+ - total``; never negative."""
        return self.c_minus + self.c_plus - self.total


class CoareaResult(NamedTuple):
    p_minus: float
    p_plus: float
    total: float
    layer_cake: float

    @property
    def defect(self) -> float:
        return max(abs(self.p_minus + self.p_plus - self.total), abs(self.layer_cake - self.total))


def cocorner_check(a, s: float) -> CocornerResult:
    """``(C_-(a, s), C_+(a, s), ||[D x D] a||)``."""
    arr = _nonneg(a)
    return CocornerResult(
        corner_norm(truncate_min(arr, s)),
        corner_norm(truncate_max(arr, s)),
        corner_norm(arr),
    )


def coarea_check(a, s: float) -> CoareaResult:
    """``(P_-(a, s), P_+(a, s), TV(a), layer-cake sum of level-set perimeters)``."""
    arr = _nonneg(a)
    return CoareaResult(
        total_variation(truncate_min(arr, s)),
        total_variation(truncate_max(arr, s)),
        total_variation(arr),
        level_sets(arr).layer_tv_sum(),
    )


def corner_sign_conflicts(decomp: LevelDecomposition) -> int:
    """Number of knots where two layers carry corner atoms of opposite sign."""
    if not decomp.level_sets:
        return 0
    amps = np.stack([conv_full(m.astype(float), H11) for m in decomp.level_sets])
    pos = (amps > 0).any(axis=0)
    neg = (amps < 0).any(axis=0)
    return int(np.count_nonzero(pos & neg))


def continuous_norms(f, eps: float = 0.25) -> tuple[float, float, float]:
    """``(||[D x D] f||, ||[D x I] f||, ||[I x D] f||)`` from point evaluations only.

    Brute force: the mixed-derivative atom at a knot is the second difference
    of ``f`` over the four quadrants touching it, and each edge contributes its
    jump times its length.  Samples are taken ``eps`` pixel sides away from the
    knot or edge; no convolution is involved.
    """
    fn = synthesize(f) if not callable(f) else f
    rows, cols = fn.image.shape
    h1, h2 = 1.0 / rows, 1.0 / cols
    d1, d2 = eps * h1, eps * h2
    x1 = np.arange(rows + 1)[:, None] * h1 + np.zeros((1, cols + 1))
    x2 = np.arange(cols + 1)[None, :] * h2 + np.zeros((rows + 1, 1))
    amp = fn(x1 + d1, x2 + d2) - fn(x1 - d1, x2 + d2) - fn(x1 + d1, x2 - d2) + fn(x1 - d1, x2 - d2)
    corner = float(np.abs(amp).sum())
    # edges on lines x1 = i h1, one segment per pixel column
    e1 = np.arange(rows + 1)[:, None] * h1 + np.zeros((1, cols))
    m2 = (np.arange(cols)[None, :] + 0.5) * h2 + np.zeros((rows + 1, 1))
    jump1 = np.abs(fn(e1 + d1, m2) - fn(e1 - d1, m2)).sum() * h2
    e2 = np.arange(cols + 1)[None, :] * h2 + np.zeros((rows, 1))
    m1 = (np.arange(rows)[:, None] + 0.5) * h1 + np.zeros((1, cols + 1))
    jump2 = np.abs(fn(m1, e2 + d2) - fn(m1, e2 - d2)).sum() * h1
    return corner, float(jump1), float(jump2)


def nested_rectangles_image(rng: np.random.Generator, n: int, layers: int = 4) -> np.ndarray:
    """Random image whose superlevel sets are nested rectangles.

    Shared corners of nested rectangles always have matching orientation, so
    the corner norm splits exactly across layers for these images.
    """
    size = 2**n
    img = np.zeros((size, size))
    r0, r1, c0, c1 = 0, size, 0, size
    for _ in range(layers):
        if r1 - r0 < 1 or c1 - c0 < 1:
            break
        nr0 = int(rng.integers(r0, r1))
        nr1 = int(rng.integers(nr0 + 1, r1 + 1))
        nc0 = int(rng.integers(c0, c1))
        nc1 = int(rng.integers(nc0 + 1, c1 + 1))
        img[nr0:nr1, nc0:nc1] += rng.uniform(0.1, 1.0)
        r0, r1, c0, c1 = nr0, nr1, nc0, nc1
    return img
