"""Synthetic corpus, parameter tuning and the grid-refinement experiment."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .grid import as_array, refine
from .norms import to_theta_norm_params
from .operators import DenoiseProblem, MeasurementOp, add_gaussian_noise, measure, objective, psnr
from .solvers import SolverConfig, denoise_dual_apg, solve_ip_conic

__all__ = [
    "synthetic_image",
    "synthetic_corpus",
    "golden_section_max",
    "TuneResult",
    "tune_lambda",
    "tune_theta_lambda",
    "ImageBench",
    "bench_image",
    "bench_per_sigma",
    "RefineRow",
    "refinement_experiment",
]

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def synthetic_image(seed: int, size: int = 64) -> np.ndarray:
    """Piecewise-constant image whose regions are axis-aligned polygons.

    A random background is overpainted by 4 to 8 random rectangles; their
    overlaps produce general rectilinear regions.  Values lie in ``[0, 1]``.
    """
    if size < 2:
        raise ValueError("size must be >= 2")
    lo = min(4, max(1, size // 8))
    rng = np.random.default_rng(seed)
    img = np.full((size, size), rng.uniform(0.1, 0.9))
    for _ in range(int(rng.integers(4, 9))):
        r0, c0 = rng.integers(0, size - lo, 2)
        h, w = rng.integers(lo, max(lo + 1, size // 2), 2)
        img[r0 : r0 + h, c0 : c0 + w] = rng.uniform(0.0, 1.0)
    return img


def synthetic_corpus(count: int = 10, size: int = 64, seed: int = 0) -> list[np.ndarray]:
    return [synthetic_image(seed * 1000 + k, size) for k in range(count)]


def golden_section_max(
    f: Callable[[float], float], lo: float, hi: float, evals: int = 20
) -> tuple[float, float, list[tuple[float, float]]]:
    """Maximize ``f`` on ``[lo, hi]`` with exactly ``evals`` evaluations.

    Returns ``(x_best, f_best, history)``; the best point is taken over all
    evaluations.  The endpoints are never evaluated.
    """
    if evals < 2:
        raise ValueError("golden-section search needs at least 2 evaluations")
    if not hi > lo:
        raise ValueError("empty search interval")
    history: list[tuple[float, float]] = []

    def ev(x):
        v = float(f(x))
        history.append((x, v))
        return v

    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = ev(c), ev(d)
    while len(history) < evals:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = ev(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = ev(d)
    x, v = max(history, key=lambda t: t[1])
    return x, v, history


@dataclass
class TuneResult:
    lam: float
    theta: float
    psnr: float
    denoised: np.ndarray = field(repr=False)
    iterations: int = 0
    runtime_ms: float = 0.0
    objective: float = math.nan
    evaluations: list = field(default_factory=list, repr=False)
    dual: tuple | None = field(default=None, repr=False)


def _denoise_psnr(noisy, clean, lam, theta, cfg, v0=None):
    a, rep = denoise_dual_apg(DenoiseProblem(noisy, lam, theta), cfg, v0=v0)
    return psnr(a, clean), a.values, rep


def tune_lambda(
    noisy,
    clean,
    theta: float,
    bracket: tuple[float, float] = (0.01, 0.5),
    evals: int = 12,
    cfg: SolverConfig | None = None,
    v0: tuple | None = None,
    v0_lam: float | None = None,
) -> TuneResult:
    """Golden-section search on ``log(lambda)`` for the best PSNR at fixed theta.

    Each solve is warm-started from the dual of the nearest lambda tried so
    far, rescaled to the new box; ``(v0, v0_lam)`` seeds the first one.
    """
    cfg = SolverConfig(tol=1e-6, max_iter=5000) if cfg is None else cfg
    noisy, clean = as_array(noisy), as_array(clean)
    cache = {}

    def f(loglam):
        lam = math.exp(loglam)
        start = None
        if cache:
            near = min(cache, key=lambda x: abs(x - loglam))
            start = (cache[near][2].dual, math.exp(near))
        elif v0 is not None and v0_lam:
            start = (v0, v0_lam)
        w = None if start is None else tuple(p * (lam / start[1]) for p in start[0])
        out = _denoise_psnr(noisy, clean, lam, theta, cfg, w)
        cache[loglam] = out
        return out[0]

    x, v, hist = golden_section_max(f, math.log(bracket[0]), math.log(bracket[1]), evals)
    _, a, rep = cache[x]
    return TuneResult(
        lam=math.exp(x),
        theta=theta,
        psnr=v,
        denoised=a,
        iterations=sum(cache[h[0]][2].iterations for h in hist),
        runtime_ms=sum(cache[h[0]][2].runtime_ms for h in hist),
        objective=rep.final_objective,
        evaluations=[(math.exp(h[0]), theta, h[1]) for h in hist],
        dual=rep.dual,
    )


def tune_theta_lambda(
    noisy,
    clean,
    theta_evals: int = 20,
    lambda_evals: int = 8,
    bracket: tuple[float, float] = (0.01, 0.5),
    cfg: SolverConfig | None = None,
) -> TuneResult:
    """Golden-section search over theta in ``[0, 1]`` with nested lambda tuning.

    The first theta uses the full lambda bracket; later ones search within a
    factor 2 of the best lambda found at the nearest theta evaluated so far.
    """
    found: list[TuneResult] = []

    def f(theta):
        v0 = v0_lam = None
        if found:
            near = min(found, key=lambda r: abs(r.theta - theta))
            br = (near.lam / 2.0, near.lam * 2.0)
            n = lambda_evals
            v0, v0_lam = near.dual, near.lam
        else:
            br, n = bracket, max(lambda_evals, 12)
        res = tune_lambda(noisy, clean, theta, br, n, cfg, v0, v0_lam)
        found.append(res)
        return res.psnr

    golden_section_max(f, 0.0, 1.0, theta_evals)
    best = max(found, key=lambda r: r.psnr)
    best.iterations = sum(r.iterations for r in found)
    best.runtime_ms = sum(r.runtime_ms for r in found)
    best.evaluations = [e for r in found for e in r.evaluations]
    return best


@dataclass
class ImageBench:
    image_id: str
    sigma: float
    tv: TuneResult
    mtv: TuneResult


def bench_image(
    image_id: str,
    clean,
    sigma: float,
    seed: int,
    mode: str = "per-image",
    fixed: tuple[float, float] | None = None,
    theta_evals: int = 20,
    lambda_evals: int = 8,
    cfg: SolverConfig | None = None,
) -> ImageBench:
    """TV and MTV results for one image at one noise level.

    ``mode="per-image"`` tunes both methods on this image.  ``mode="fixed"``
    uses ``fixed=(lam, theta)`` for MTV and the tuned TV lambda for TV.
    """
    clean = as_array(clean)
    noisy = add_gaussian_noise(clean, sigma, seed).values
    tv = tune_lambda(noisy, clean, 0.0, evals=12, cfg=cfg)
    if mode == "per-image":
        mtv = tune_theta_lambda(noisy, clean, theta_evals, lambda_evals, cfg=cfg)
    elif mode == "fixed":
        if fixed is None:
            raise ValueError("fixed mode needs (lambda, theta)")
        lam, theta = fixed
        cfg_ = SolverConfig(tol=1e-6, max_iter=5000) if cfg is None else cfg
        p, a, rep = _denoise_psnr(noisy, clean, lam, theta, cfg_)
        mtv = TuneResult(lam, theta, p, a, rep.iterations, rep.runtime_ms, rep.final_objective)
    else:
        raise ValueError(f"unknown tuning mode {mode!r}")
    return ImageBench(image_id, sigma, tv, mtv)


def bench_per_sigma(
    items: Sequence[tuple[str, np.ndarray]],
    sigma: float,
    seed: int,
    theta_evals: int = 20,
    lambda_evals: int = 8,
    cfg: SolverConfig | None = None,
    map_fn: Callable = map,
) -> list[ImageBench]:
    """One theta per noise level, chosen to maximize the corpus mean PSNR.

    Lambda stays tuned per image.  ``map_fn`` may be a pool's ``map``; it is
    called with picklable arguments only.
    """
    noisy = [add_gaussian_noise(c, sigma, seed + k).values for k, (_, c) in enumerate(items)]
    cleans = [as_array(c) for _, c in items]
    cache: dict[float, list[TuneResult]] = {}

    def f(theta):
        args = [(y, c, theta, (0.01, 0.5), lambda_evals, cfg) for y, c in zip(noisy, cleans)]
        res = list(map_fn(_tune_lambda_star, args))
        cache[theta] = res
        return float(np.mean([r.psnr for r in res]))

    theta, _, _ = golden_section_max(f, 0.0, 1.0, theta_evals)
    tv = list(map_fn(_tune_lambda_star, [(y, c, 0.0, (0.01, 0.5), 12, cfg) for y, c in zip(noisy, cleans)]))
    return [ImageBench(iid, sigma, t, m) for (iid, _), t, m in zip(items, tv, cache[theta])]


def _tune_lambda_star(args):
    return tune_lambda(*args)


@dataclass
class RefineRow:
    level: int
    objective: float
    measurement_dev: float
    solution_dev: float
    gap: float
    converged: bool
    runtime_ms: float


def refinement_experiment(
    y,
    lam: float,
    theta: float,
    levels: Sequence[int],
    embedding: str = "refined-data",
    tol: float = 1e-13,
    max_iter: int = 200000,
) -> list[RefineRow]:
    """Solve one denoising problem at several dyadic levels ``>= N``.

    ``y`` lives on level ``N``; ``lam`` and ``theta`` are in the ``h_theta``
    parametrization at that level and are converted to theta-norm form,
    which is invariant under refinement.

    ``embedding="refined-data"`` solves, at level ``n = N + k``, the native
    denoising problem with data ``refine(y, k)`` and ``lam * 4**k`` (pixel
    counts scale the data term by ``4**k``).  Its unique minimizer is the
    refinement of the level-``N`` one.  ``embedding="measurement"`` instead
    keeps the data term ``1/2 ||y - measure(a)||^2`` with an interior-point
    solver; the optimal value and measurements are level independent but
    the fine-level minimizer is generally not unique.

    Every row reports the level-``N`` objective of the fine solution and its
    deviations from the level-``N`` solution.
    """
    y = as_array(y)
    rows_, cols_ = y.shape
    if rows_ != cols_ or rows_ & (rows_ - 1):
        raise ValueError("refinement experiment needs a square dyadic image")
    base = rows_.bit_length() - 1
    levels = [int(n) for n in levels]
    if not levels:
        raise ValueError("no levels given")
    if min(levels) < base:
        raise ValueError(f"levels must be >= {base}")
    lam2, theta2 = to_theta_norm_params(lam, theta, base)
    prob = DenoiseProblem(y, lam2, theta2, "theta_norm")
    cfg = SolverConfig(tol=tol, max_iter=max_iter)
    a0, _ = denoise_dual_apg(prob, SolverConfig(tol=min(tol, 1e-14), max_iter=max_iter))

    out = []
    for n in levels:
        k = n - base
        if embedding == "refined-data":
            fine = DenoiseProblem(refine(y, k).values, lam2 * 4.0**k, theta2, "theta_norm")
            a, rep = denoise_dual_apg(fine, cfg)
        elif embedding == "measurement":
            op = MeasurementOp.block_average((2**n, 2**n), y.shape)
            a, rep = solve_ip_conic(op, y, lam2, theta2, "theta_norm")
        else:
            raise ValueError(f"unknown embedding {embedding!r}")
        out.append(
            RefineRow(
                level=n,
                objective=objective(a, prob),
                measurement_dev=float(np.abs(measure(a, y.shape) - a0.values).max()),
                solution_dev=float(np.abs(a.values - refine(a0, k).values).max()),
                gap=rep.gap,
                converged=rep.converged,
                runtime_ms=rep.runtime_ms,
            )
        )
    return out
