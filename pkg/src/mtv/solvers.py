"""Solvers for the pixel-basis reconstruction problem.

All solvers minimize, over the nonnegative cone,

    E(y, M a) + lam * ||H a||_1,

where ``H`` stacks the three weighted difference filters
(:class:`StackedAnalysisOp`).

* :func:`denoise_dual_apg` handles ``M = I`` with a squared data term.  The
  Fenchel dual is ``min_{|v| <= lam} 1/2 ||(y - H^T v)_+||^2`` (a smooth
  function over a box), solved with FISTA plus adaptive restart; the primal
  is recovered as ``a = (y - H^T v)_+``.
* :func:`solve_ip_primal_dual` handles any linear measurement operator and
  any smooth convex data term with a Condat-Vu iteration.
* :func:`solve_ip_conic` hands the same problem to an interior-point conic
  solver (Clarabel through cvxpy); it is the backend for fine grids, where
  first-order methods need too many iterations for tight tolerances.
* :func:`oracle_solve` is a slow projected-subgradient reference that shares
  no code path with the two above beyond the filter matrix.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .grid import PixelImage, as_array
from .operators import DenoiseProblem, MeasurementOp, add_gaussian_noise, psnr

__all__ = [
    "SolverConfig",
    "SolverReport",
    "StackedAnalysisOp",
    "SquaredLoss",
    "denoise_dual_apg",
    "solve_ip_primal_dual",
    "solve_ip_conic",
    "oracle_solve",
    "dual_gap",
    "SweepResult",
    "sweep_theta_lambda",
]

log = logging.getLogger(__name__)

Dual = tuple  # (v11, v10, v01)


@dataclass(frozen=True)
class SolverConfig:
    max_iter: int = 20000
    tol: float = 1e-9
    step_rule: Literal["fixed", "backtracking"] = "fixed"
    check_every: int = 10

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if self.step_rule not in ("fixed", "backtracking"):
            raise ValueError(f"unknown step rule {self.step_rule!r}")
        if self.check_every < 1:
            raise ValueError("check_every must be >= 1")


@dataclass
class SolverReport:
    """Outcome of a solver run.

    ``residual`` is the relative duality gap ``gap / max(1, objective)`` when a
    gap is available, otherwise the relative fixed-point residual.
    """

    iterations: int
    objective_trace: list[float]
    final_objective: float
    residual: float
    converged: bool
    gap: float = math.nan
    runtime_ms: float = 0.0
    dual: Dual | None = field(default=None, repr=False)


# --------------------------------------------------------------------------
# stacked filter operator


def _diff0(a):
    rows, cols = a.shape
    out = np.zeros((rows + 1, cols))
    out[:-1] += a
    out[1:] -= a
    return out


def _diff1(a):
    rows, cols = a.shape
    out = np.zeros((rows, cols + 1))
    out[:, :-1] += a
    out[:, 1:] -= a
    return out


def _diff0_t(v):
    return v[:-1] - v[1:]


def _diff1_t(v):
    return v[:, :-1] - v[:, 1:]


class StackedAnalysisOp:
    """``a -> (w11 h11 * a, w10 h10 * a, w01 h01 * a)`` with full convolutions.

    Use :meth:`h_theta` for the denoising filter bank and :meth:`theta_norm`
    for the exact theta-norm weights on the image's own grid.
    """

    def __init__(self, shape, w11: float, w10: float, w01: float):
        self.shape = tuple(shape)
        self.weights = (float(w11), float(w10), float(w01))

    @classmethod
    def h_theta(cls, shape, theta: float) -> "StackedAnalysisOp":
        w = 1.0 - theta / 2.0
        return cls(shape, theta, w, w)

    @classmethod
    def theta_norm(cls, shape, theta: float) -> "StackedAnalysisOp":
        rows, cols = shape
        return cls(shape, theta, (1.0 - theta) / cols, (1.0 - theta) / rows)

    @classmethod
    def for_problem(cls, prob: DenoiseProblem, shape=None) -> "StackedAnalysisOp":
        shape = prob.shape if shape is None else shape
        if prob.regularizer == "theta_norm":
            return cls.theta_norm(shape, prob.theta)
        return cls.h_theta(shape, prob.theta)

    @property
    def theta(self) -> float:
        return self.weights[0]

    def dual_shapes(self):
        rows, cols = self.shape
        return (rows + 1, cols + 1), (rows + 1, cols), (rows, cols + 1)

    def zeros_dual(self) -> Dual:
        return tuple(np.zeros(s) for s in self.dual_shapes())

    def apply(self, a) -> Dual:
        w11, w10, w01 = self.weights
        d0 = _diff0(a)
        return w11 * _diff1(d0), w10 * d0, w01 * _diff1(a)

    def adjoint(self, v: Dual) -> np.ndarray:
        w11, w10, w01 = self.weights
        v11, v10, v01 = v
        return w11 * _diff0_t(_diff1_t(v11)) + w10 * _diff0_t(v10) + w01 * _diff1_t(v01)

    def l1(self, a) -> float:
        return float(sum(np.abs(p).sum() for p in self.apply(a)))

    def norm_sq_bound(self) -> float:
        """Upper bound on ``||H||^2`` from the kernels' l1 norms (Young)."""
        w11, w10, w01 = self.weights
        return 16.0 * w11**2 + 4.0 * w10**2 + 4.0 * w01**2

    def matrix(self) -> np.ndarray:
        """Dense matrix acting on the row-major flattened image."""
        n = self.shape[0] * self.shape[1]
        cols = []
        for k in range(n):
            e = np.zeros(n)
            e[k] = 1.0
            cols.append(np.concatenate([p.ravel() for p in self.apply(e.reshape(self.shape))]))
        return np.array(cols).T

    def sparse(self):
        """Sparse (CSR) matrix acting on the row-major flattened image."""
        import scipy.sparse as sp

        rows, cols = self.shape
        w11, w10, w01 = self.weights

        def d(n):
            return sp.diags([np.ones(n), -np.ones(n)], [0, -1], shape=(n + 1, n))

        return sp.vstack(
            [
                w11 * sp.kron(d(rows), d(cols)),
                w10 * sp.kron(d(rows), sp.identity(cols)),
                w01 * sp.kron(sp.identity(rows), d(cols)),
            ]
        ).tocsr()


def _clip_box(v: Dual, lam: float) -> Dual:
    return tuple(np.clip(p, -lam, lam) for p in v)


def _dot(u: Dual, v: Dual) -> float:
    return float(sum(np.vdot(p, q) for p, q in zip(u, v)))


def _axpy(alpha, x: Dual, y: Dual) -> Dual:
    return tuple(alpha * p + q for p, q in zip(x, y))


def _sub(x: Dual, y: Dual) -> Dual:
    return tuple(p - q for p, q in zip(x, y))


def _sqnorm(x: Dual) -> float:
    return float(sum(np.vdot(p, p) for p in x))


# --------------------------------------------------------------------------
# dual accelerated proximal gradient


def _primal_value(y, a, lam, H):
    r = y - a
    return 0.5 * float(np.vdot(r, r)) + lam * H.l1(a)


def dual_gap(prob: DenoiseProblem, a, v: Dual, H: StackedAnalysisOp | None = None) -> float:
    """Duality gap ``P(a) - D(v)`` for the native-level denoising problem.

    ``v`` must lie in the box ``|v| <= lam``.  Since the primal is 1-strongly
    convex, ``||a - a*||_2 <= sqrt(2 * gap)``.
    """
    H = StackedAnalysisOp.for_problem(prob) if H is None else H
    y = prob.y
    z = np.maximum(y - H.adjoint(v), 0.0)
    dual = 0.5 * float(np.vdot(y, y)) - 0.5 * float(np.vdot(z, z))
    return _primal_value(y, as_array(a), prob.lam, H) - dual


def denoise_dual_apg(
    prob: DenoiseProblem,
    cfg: SolverConfig | None = None,
    v0: Dual | None = None,
) -> tuple[PixelImage, SolverReport]:
    """Solve the native-level denoising problem through its dual.

    Parameters
    ----------
    prob : DenoiseProblem
        Data ``y`` and parameters; the regularizer kind selects the filter
        weights.
    cfg : SolverConfig, optional
        Stopping is on the relative duality gap, tested every
        ``cfg.check_every`` iterations.
    v0 : tuple of arrays, optional
        Dual warm start; projected onto the feasible box first.

    Returns
    -------
    a : PixelImage
        The (unique) nonnegative minimizer.
    report : SolverReport
        ``report.dual`` holds the final dual variable for warm starts.
    """
    cfg = SolverConfig() if cfg is None else cfg
    t_start = time.perf_counter()
    H = StackedAnalysisOp.for_problem(prob)
    y = prob.y
    lam = prob.lam
    yy = 0.5 * float(np.vdot(y, y))

    v = H.zeros_dual() if v0 is None else _clip_box(tuple(np.array(p, dtype=float) for p in v0), lam)
    if tuple(p.shape for p in v) != H.dual_shapes():
        raise ValueError("warm start has the wrong shape")

    def g_and_primal(w):
        a = np.maximum(y - H.adjoint(w), 0.0)
        return 0.5 * float(np.vdot(a, a)), a

    L = H.norm_sq_bound()
    if cfg.step_rule == "backtracking":
        L = L / 8.0
    w = v
    t = 1.0
    trace: list[float] = []
    gap = rel = math.inf
    it = 0
    converged = False
    a = np.maximum(y - H.adjoint(v), 0.0)

    for it in range(1, cfg.max_iter + 1):
        gw, aw = g_and_primal(w)
        grad = H.apply(aw)  # -grad g(w)
        if lam == 0.0:
            v_new = H.zeros_dual()
        elif cfg.step_rule == "fixed":
            v_new = _clip_box(_axpy(1.0 / L, grad, w), lam)
        else:
            while True:
                v_new = _clip_box(_axpy(1.0 / L, grad, w), lam)
                d = _sub(v_new, w)
                g_new, _ = g_and_primal(v_new)
                if g_new <= gw - _dot(grad, d) + 0.5 * L * _sqnorm(d) + 1e-15 * max(1.0, gw):
                    break
                L *= 2.0
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        step = _sub(v_new, v)
        if _dot(_sub(w, v_new), step) > 0:
            # momentum points uphill: restart
            t_new = 1.0
            w = v_new
        else:
            w = _axpy((t - 1.0) / t_new, step, v_new)
        v, t = v_new, t_new

        if it % cfg.check_every == 0 or it == cfg.max_iter:
            a = np.maximum(y - H.adjoint(v), 0.0)
            primal = _primal_value(y, a, lam, H)
            gap = primal - (yy - 0.5 * float(np.vdot(a, a)))
            rel = max(gap, 0.0) / max(1.0, primal)
            trace.append(primal)
            if rel <= cfg.tol:
                converged = True
                break

    a = np.maximum(y - H.adjoint(v), 0.0)
    final = _primal_value(y, a, lam, H)
    if not trace or trace[-1] != final:
        trace.append(final)
    if not converged:
        log.warning("dual APG stopped after %d iterations, relative gap %.3g", it, rel)
    report = SolverReport(
        iterations=it,
        objective_trace=trace,
        final_objective=final,
        residual=rel,
        converged=converged,
        gap=gap,
        runtime_ms=1e3 * (time.perf_counter() - t_start),
        dual=v,
    )
    return PixelImage(a, nonneg=True), report


# --------------------------------------------------------------------------
# general primal-dual solver


class SquaredLoss:
    """``E(y, z) = 1/2 ||y - z||^2``."""

    lipschitz = 1.0

    def value(self, y, z) -> float:
        r = z - y
        return 0.5 * float(np.vdot(r, r))

    def grad(self, y, z) -> np.ndarray:
        return z - y


def _block_average_dual(op: MeasurementOp, y, lam, c):
    """``min_{a >= 0} 1/2 ||y - M a||^2 + <a, c>`` for block averages.

    Inside a block only the mean is seen by the data term, so the inner
    minimum puts all of the block's mass on its cheapest pixel.
    """
    br, bc = op._block()
    r, s = op.data_shape
    k = br * bc
    cmin = c.reshape(r, br, s, bc).min(axis=(1, 3)).ravel()
    m = np.maximum(y - k * cmin, 0.0)
    return float(0.5 * np.sum((y - m) ** 2) + np.sum(k * m * cmin))


def solve_ip_primal_dual(
    op: MeasurementOp,
    y,
    lam: float,
    theta: float,
    data_fit="squared",
    cfg: SolverConfig | None = None,
    regularizer: Literal["h_theta", "theta_norm"] = "theta_norm",
    a0=None,
    v0: Dual | None = None,
) -> tuple[PixelImage, SolverReport]:
    """Condat-Vu primal-dual splitting for ``E(y, M a) + lam ||H a||_1``, ``a >= 0``.

    ``data_fit`` is ``"squared"`` or an object with ``value(y, z)``,
    ``grad(y, z)`` and a ``lipschitz`` attribute (of ``grad`` in ``z``).  The
    filter weights follow ``regularizer``, evaluated on the domain grid of
    ``op``.  With a squared data fit and a block-average operator the relative
    duality gap is used for stopping; otherwise the relative fixed-point
    residual is.
    """
    cfg = SolverConfig() if cfg is None else cfg
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    if not lam >= 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    t_start = time.perf_counter()
    y = np.asarray(as_array(y) if np.ndim(y) == 2 else y, dtype=float).ravel()
    if y.size != op.output_dim:
        raise ValueError(f"operator produces {op.output_dim} values, data has {y.size}")
    loss = SquaredLoss() if data_fit == "squared" else data_fit
    shape = op.domain_shape
    if regularizer == "theta_norm":
        H = StackedAnalysisOp.theta_norm(shape, theta)
    elif regularizer == "h_theta":
        H = StackedAnalysisOp.h_theta(shape, theta)
    else:
        raise ValueError(f"unknown regularizer {regularizer!r}")

    can_gap = data_fit == "squared" and op.kind == "block_average"
    beta = loss.lipschitz * op.norm_sq()
    hn = H.norm_sq_bound()
    # tau * (beta / 2 + sigma * ||H||^2) < 1
    sigma = 1.0 / math.sqrt(hn) if hn > 0 else 1.0
    tau = 0.99 / (beta / 2.0 + sigma * hn)

    a = np.zeros(shape) if a0 is None else np.maximum(np.array(as_array(a0), dtype=float), 0.0)
    v = H.zeros_dual() if v0 is None else _clip_box(tuple(np.array(p, dtype=float) for p in v0), lam)

    def primal(a):
        return loss.value(y, op.apply(a)) + lam * H.l1(a)

    trace: list[float] = []
    rel = gap = math.inf
    converged = False
    it = 0
    for it in range(1, cfg.max_iter + 1):
        g = op.adjoint(loss.grad(y, op.apply(a))) + H.adjoint(v)
        a_new = np.maximum(a - tau * g, 0.0)
        v_new = _clip_box(_axpy(sigma, H.apply(2.0 * a_new - a), v), lam)

        if it % cfg.check_every == 0 or it == cfg.max_iter:
            p = primal(a_new)
            trace.append(p)
            if can_gap:
                gap = p - _block_average_dual(op, y, lam, H.adjoint(v_new))
                rel = max(gap, 0.0) / max(1.0, abs(p))
            else:
                da = np.linalg.norm(a_new - a) / tau
                dv = math.sqrt(_sqnorm(_sub(v_new, v))) / sigma
                scale = max(1.0, np.linalg.norm(a_new) / tau, math.sqrt(_sqnorm(v_new)) / sigma)
                rel = (da + dv) / scale
            a, v = a_new, v_new
            if rel <= cfg.tol:
                converged = True
                break
        else:
            a, v = a_new, v_new

    final = primal(a)
    if not trace or trace[-1] != final:
        trace.append(final)
    if not converged:
        log.warning("primal-dual stopped after %d iterations, residual %.3g", it, rel)
    report = SolverReport(
        iterations=it,
        objective_trace=trace,
        final_objective=final,
        residual=rel,
        converged=converged,
        gap=gap,
        runtime_ms=1e3 * (time.perf_counter() - t_start),
        dual=v,
    )
    return PixelImage(a, nonneg=True), report


# --------------------------------------------------------------------------
# interior-point backend


def _measurement_matrix(op: MeasurementOp):
    import scipy.sparse as sp

    if op.kind != "block_average":
        return sp.csr_matrix(op.matrix)
    rows, cols = op.domain_shape
    br, bc = op._block()
    target = (np.arange(rows)[:, None] // br) * op.data_shape[1] + (np.arange(cols)[None, :] // bc)
    n = rows * cols
    return sp.csr_matrix(
        (np.full(n, 1.0 / (br * bc)), (target.ravel(), np.arange(n))), shape=(op.output_dim, n)
    )


def solve_ip_conic(
    op: MeasurementOp,
    y,
    lam: float,
    theta: float,
    regularizer: Literal["h_theta", "theta_norm"] = "theta_norm",
    tol: float = 1e-12,
    max_iter: int = 500,
) -> tuple[PixelImage, SolverReport]:
    """Squared-loss reconstruction with an interior-point conic solver.

    Same problem as :func:`solve_ip_primal_dual` with ``data_fit="squared"``.
    ``report.gap`` is the certified duality gap when the operator is a block
    average and NaN otherwise.
    """
    import cvxpy as cp

    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    if not lam >= 0:
        raise ValueError(f"lambda must be >= 0, got {lam}")
    t_start = time.perf_counter()
    y = np.asarray(as_array(y) if np.ndim(y) == 2 else y, dtype=float).ravel()
    if y.size != op.output_dim:
        raise ValueError(f"operator produces {op.output_dim} values, data has {y.size}")
    shape = op.domain_shape
    if regularizer == "theta_norm":
        H = StackedAnalysisOp.theta_norm(shape, theta)
    elif regularizer == "h_theta":
        H = StackedAnalysisOp.h_theta(shape, theta)
    else:
        raise ValueError(f"unknown regularizer {regularizer!r}")

    n = shape[0] * shape[1]
    Hs = H.sparse()
    x = cp.Variable(n, nonneg=True)
    t = cp.Variable(Hs.shape[0])
    upper = Hs @ x <= t
    lower = -(Hs @ x) <= t
    M = _measurement_matrix(op)
    cost = 0.5 * cp.sum_squares(y - M @ x) + lam * cp.sum(t)
    problem = cp.Problem(cp.Minimize(cost), [upper, lower])
    problem.solve(
        solver="CLARABEL", tol_gap_abs=tol, tol_gap_rel=tol, tol_feas=tol, max_iter=max_iter
    )
    if x.value is None:
        raise RuntimeError(f"conic solver failed with status {problem.status}")
    a = np.maximum(np.asarray(x.value).reshape(shape), 0.0)
    final = 0.5 * float(np.sum((y - op.apply(a)) ** 2)) + lam * H.l1(a)

    # multipliers of the two one-sided constraints combine into v, |v| <= lam
    flat = np.clip(np.asarray(upper.dual_value) - np.asarray(lower.dual_value), -lam, lam)
    v, k = [], 0
    for s_ in H.dual_shapes():
        size = s_[0] * s_[1]
        v.append(flat[k : k + size].reshape(s_))
        k += size
    v = tuple(v)
    gap = math.nan
    rel = 0.0
    if op.kind == "block_average":
        gap = final - _block_average_dual(op, y, lam, H.adjoint(v))
        rel = max(gap, 0.0) / max(1.0, abs(final))
    report = SolverReport(
        iterations=int(problem.solver_stats.num_iters or 0),
        objective_trace=[final],
        final_objective=final,
        residual=rel,
        converged=problem.status == cp.OPTIMAL,
        gap=gap,
        runtime_ms=1e3 * (time.perf_counter() - t_start),
        dual=v,
    )
    return PixelImage(a, nonneg=True), report


# --------------------------------------------------------------------------
# projected subgradient oracle

ORACLE_MAX_PIXELS = 16 * 16


def oracle_solve(prob: DenoiseProblem, iters: int = 1_000_000, return_gap: bool = False):
    """Projected subgradient descent with steps ``1 / (k + 1)``.

    The step matches the unit strong convexity of the data term.  The
    returned point is the average of the second half of the iterates with
    weights ``k**3``, which damps the oscillation around kinks of the l1
    term.  The matching average of ``lam * sign(H a_k)`` is a feasible dual
    point; with ``return_gap=True`` the certified gap ``P(a) - D(v_avg)`` is
    returned as well.  Only for small native-level instances (at most
    16 x 16 pixels).

    The filters are applied by explicit stencil loops, independently of
    :class:`StackedAnalysisOp`.
    """
    y = prob.y
    if y.size > ORACLE_MAX_PIXELS:
        raise ValueError(f"oracle_solve is limited to {ORACLE_MAX_PIXELS} pixels, got {y.size}")
    if iters < 2:
        raise ValueError("iters must be >= 2")
    if prob.regularizer == "theta_norm":
        rows, cols = y.shape
        w = (prob.theta, (1.0 - prob.theta) / cols, (1.0 - prob.theta) / rows)
    else:
        w = (prob.theta, 1.0 - prob.theta / 2.0, 1.0 - prob.theta / 2.0)
    a, s11, s10, s01 = _subgradient_loop(np.array(y), float(prob.lam), *map(float, w), int(iters))
    a_img = PixelImage(a, nonneg=True)
    if not return_gap:
        return a_img
    v = (prob.lam * s11, prob.lam * s10, prob.lam * s01)
    return a_img, dual_gap(prob, a_img, v)


def _sgn(x):
    return (x > 0.0) - (x < 0.0)


def _subgradient_loop_py(y, lam, w11, w10, w01, iters):
    R, C = y.shape
    a = np.maximum(y, 0.0)
    s11 = np.zeros((R + 1, C + 1))
    s10 = np.zeros((R + 1, C))
    s01 = np.zeros((R, C + 1))
    a_avg = np.zeros((R, C))
    m11 = np.zeros((R + 1, C + 1))
    m10 = np.zeros((R + 1, C))
    m01 = np.zeros((R, C + 1))
    wsum = 0.0
    tail = iters // 2
    for k in range(iters):
        # signs of the zero-padded differences at every knot / edge
        for i in range(R + 1):
            for j in range(C + 1):
                v = 0.0
                if i < R and j < C:
                    v += a[i, j]
                if i > 0 and j < C:
                    v -= a[i - 1, j]
                if i < R and j > 0:
                    v -= a[i, j - 1]
                if i > 0 and j > 0:
                    v += a[i - 1, j - 1]
                s11[i, j] = _sgn(v)
        for i in range(R + 1):
            for j in range(C):
                v = 0.0
                if i < R:
                    v += a[i, j]
                if i > 0:
                    v -= a[i - 1, j]
                s10[i, j] = _sgn(v)
        for i in range(R):
            for j in range(C + 1):
                v = 0.0
                if j < C:
                    v += a[i, j]
                if j > 0:
                    v -= a[i, j - 1]
                s01[i, j] = _sgn(v)
        step = 1.0 / (k + 1.0)
        for i in range(R):
            for j in range(C):
                g = w11 * (s11[i, j] - s11[i + 1, j] - s11[i, j + 1] + s11[i + 1, j + 1])
                g += w10 * (s10[i, j] - s10[i + 1, j]) + w01 * (s01[i, j] - s01[i, j + 1])
                a[i, j] = max(a[i, j] - step * (a[i, j] - y[i, j] + lam * g), 0.0)
        if k >= tail:
            wk = (k + 1.0) ** 3
            wsum += wk
            a_avg += wk * a
            m11 += wk * s11
            m10 += wk * s10
            m01 += wk * s01
    return a_avg / wsum, m11 / wsum, m10 / wsum, m01 / wsum


try:
    import numba

    _sgn = numba.njit(inline="always")(_sgn)
    _subgradient_loop = numba.njit(cache=True)(_subgradient_loop_py)
except ImportError:  # pragma: no cover
    _subgradient_loop = _subgradient_loop_py


# --------------------------------------------------------------------------
# parameter sweep


@dataclass
class SweepResult:
    thetas: np.ndarray
    lambdas: np.ndarray
    table: np.ndarray  # PSNR, shape (len(thetas), len(lambdas))
    iterations: np.ndarray
    objectives: np.ndarray
    runtime_ms: np.ndarray

    @property
    def best(self) -> tuple[float, float, float]:
        """``(lam*, theta*, psnr*)``; ties go to the first grid point."""
        i, j = np.unravel_index(int(np.argmax(self.table)), self.table.shape)
        return float(self.lambdas[j]), float(self.thetas[i]), float(self.table[i, j])


def sweep_theta_lambda(
    y_clean,
    sigma: float,
    theta_grid: Sequence[float],
    lambda_grid: Sequence[float],
    seed: int = 0,
    cfg: SolverConfig | None = None,
    y_noisy=None,
) -> SweepResult:
    """PSNR of the denoised image for every ``(theta, lambda)`` grid point."""
    thetas = np.asarray(list(theta_grid), dtype=float)
    lambdas = np.asarray(list(lambda_grid), dtype=float)
    if thetas.size == 0 or lambdas.size == 0:
        raise ValueError("theta and lambda grids must be nonempty")
    cfg = SolverConfig(tol=1e-6, max_iter=5000) if cfg is None else cfg
    clean = as_array(y_clean)
    noisy = add_gaussian_noise(clean, sigma, seed).values if y_noisy is None else as_array(y_noisy)
    shape = (thetas.size, lambdas.size)
    table = np.empty(shape)
    iters = np.empty(shape, dtype=int)
    objs = np.empty(shape)
    times = np.empty(shape)
    for i, th in enumerate(thetas):
        v = None
        prev_lam = None
        for j, lam in enumerate(lambdas):
            if v is not None and prev_lam:
                v = tuple(p * (lam / prev_lam) for p in v)
            a, rep = denoise_dual_apg(DenoiseProblem(noisy, float(lam), float(th)), cfg, v0=v)
            v, prev_lam = rep.dual, lam
            table[i, j] = psnr(a, clean)
            iters[i, j] = rep.iterations
            objs[i, j] = rep.final_objective
            times[i, j] = rep.runtime_ms
    return SweepResult(thetas, lambdas, table, iters, objs, times)
