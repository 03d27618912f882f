"""Self-checking invariant suite run by ``mtv verify``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grid import refine
from .norms import (
    H11,
    conv_full,
    corner_measure,
    corner_norm,
    discrete_theta_norm,
    total_variation,
)
from .operators import DenoiseProblem, MeasurementOp, downsample, measure, objective
from .solvers import SolverConfig, StackedAnalysisOp, denoise_dual_apg, solve_ip_primal_dual
from .verify import (
    coarea_check,
    cocorner_check,
    continuous_norms,
    level_sets,
    nested_rectangles_image,
)

__all__ = ["CheckResult", "run_suite"]


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _rand(rng, n, sparse=True):
    size = 2**n
    a = rng.random((size, size))
    if sparse:
        a = np.where(rng.random((size, size)) < 0.4, 0.0, np.round(a * 4) / 4)
    return a


def _check_exactness(rng, fault):
    worst = 0.0
    for _ in range(20):
        a = _rand(rng, int(rng.integers(1, 5)), sparse=False)
        c, g1, g2 = continuous_norms(a)
        for th in (0.01, 0.33, 1.0):
            ref = th * c + (1 - th) * (g1 + g2)
            val = discrete_theta_norm(a, th) * (1.0 + 1e-6 if fault else 1.0)
            worst = max(worst, abs(val - ref) / max(1.0, ref))
    return worst <= 1e-12, f"max rel. deviation {worst:.2e}"


def _check_norm_axioms(rng, fault):
    worst = 0.0
    for _ in range(30):
        n = int(rng.integers(1, 5))
        a, b = rng.standard_normal((2, 2**n, 2**n))
        c = rng.standard_normal()
        th = rng.random()
        na, nb = discrete_theta_norm(a, th), discrete_theta_norm(b, th)
        worst = max(worst, abs(discrete_theta_norm(c * a, th) - abs(c) * na) / max(1, na))
        worst = max(worst, discrete_theta_norm(a + b, th) - na - nb - 1e-12)
    return worst <= 1e-12, f"worst violation {worst:.2e}"


def _check_tv_vs_corner(rng, fault):
    bad = 0
    for _ in range(50):
        a = _rand(rng, int(rng.integers(1, 6)))
        bad += total_variation(a) > 2.0 * corner_norm(a) + 1e-12
    return bad == 0, f"{bad} violations of TV <= 2 corner"


def _check_refine_invariance(rng, fault):
    worst = 0.0
    for _ in range(30):
        a = rng.random((2 ** int(rng.integers(1, 5)),) * 2)
        th = rng.random()
        worst = max(worst, abs(discrete_theta_norm(refine(a), th) - discrete_theta_norm(a, th)))
        worst = max(worst, float(np.abs(measure(refine(a), a.shape) - a).max()))
        worst = max(worst, float(np.abs(downsample(refine(a)).values - a).max()))
    return worst <= 1e-12, f"max deviation {worst:.2e}"


def _check_corner_counts(rng, fault):
    sq = np.zeros((4, 4))
    sq[1:3, 1:3] = 1
    t = np.zeros((4, 4))
    t[2, 0:3] = 1
    t[1, 1] = 1
    ok = corner_norm(sq) == 4.0 and corner_norm(t) == 8.0
    # merged atoms are +-1, or +-2 where two pixels touch only diagonally
    binary = (rng.random((16, 16)) < 0.5).astype(float)
    amp = conv_full(binary, H11)
    p = np.pad(binary, 1)
    saddle = (p[:-1, :-1] == p[1:, 1:]) & (p[:-1, 1:] == p[1:, :-1]) & (p[:-1, :-1] != p[1:, :-1])
    ok = ok and bool(np.all((np.abs(amp) == 2) == saddle))
    ok = ok and bool(np.all(np.isin(corner_measure(binary).amplitudes, [-2.0, -1.0, 1.0, 2.0])))
    return ok, f"rectangle {corner_norm(sq)}, bar+bump {corner_norm(t)}, indicator atoms in {{+-1, +-2}}"


def _check_downsampling(rng, fault):
    bad = 0
    for _ in range(50):
        n = int(rng.integers(2, 6))
        a = _rand(rng, n)
        b = downsample(a).values
        bad += corner_norm(b) > corner_norm(a) + 1e-12
        bad += total_variation(b) > total_variation(a) + 1e-12
        y = rng.standard_normal((2 ** int(rng.integers(0, n)),) * 2)
        prob = DenoiseProblem(y, rng.random(), rng.random(), "theta_norm")
        bad += objective(refine(b), prob) > objective(a, prob) + 1e-12
    return bad == 0, f"{bad} violations"


def _check_layers(rng, fault):
    worst = 0.0
    for _ in range(30):
        a = _rand(rng, int(rng.integers(1, 5)))
        d = level_sets(a)
        worst = max(worst, float(np.abs(d.reconstruct() - a).max()) if d.level_sets else float(a.max()))
        for s in rng.random(5) * a.max():
            worst = max(worst, coarea_check(a, s).defect / max(1.0, total_variation(a)))
    return worst <= 1e-10, f"max coarea/reconstruction defect {worst:.2e}"


def _check_cocorner(rng, fault):
    worst_lb = 0.0
    worst_eq = 0.0
    mono = 0
    for _ in range(30):
        a = _rand(rng, int(rng.integers(1, 5)))
        for s in rng.random(5) * a.max():
            worst_lb = max(worst_lb, -cocorner_check(a, s).defect)
        g = nested_rectangles_image(rng, int(rng.integers(2, 5)))
        ss = np.sort(rng.random(10) * g.max() * 1.1)
        res = [cocorner_check(g, s) for s in ss]
        worst_eq = max(worst_eq, max(abs(r.defect) for r in res))
        cm = np.array([r.c_minus for r in res])
        cp = np.array([r.c_plus for r in res])
        mono += int(np.any(np.diff(cm) < -1e-12) or np.any(np.diff(cp) > 1e-12))
    ok = worst_lb <= 1e-12 and worst_eq <= 1e-10 and mono == 0
    return ok, f"lower bound slack {worst_lb:.1e}, nested-rectangle defect {worst_eq:.1e}, {mono} monotonicity breaks"


def _check_adjoints(rng, fault):
    worst = 0.0
    for _ in range(10):
        shape = tuple(int(s) for s in rng.integers(1, 9, 2))
        H = StackedAnalysisOp.h_theta(shape, rng.random())
        a = rng.standard_normal(shape)
        v = tuple(rng.standard_normal(s) for s in H.dual_shapes())
        lhs = sum(float(np.vdot(p, q)) for p, q in zip(H.apply(a), v))
        worst = max(worst, abs(lhs - float(np.vdot(a, H.adjoint(v)))))
        op = MeasurementOp.block_average((8, 8), (2, 4))
        x = rng.standard_normal((8, 8))
        r = rng.standard_normal(8)
        worst = max(worst, abs(float(np.vdot(op.apply(x), r)) - float(np.vdot(x, op.adjoint(r)))))
    return worst <= 1e-12, f"max adjoint mismatch {worst:.2e}"


def _check_solvers(rng, fault):
    worst = 0.0
    for _ in range(3):
        y = rng.random((6, 6))
        lam, th = 0.05 + 0.1 * rng.random(), rng.random()
        prob = DenoiseProblem(y, lam, th)
        a1, r1 = denoise_dual_apg(prob, SolverConfig(tol=1e-12, max_iter=50000))
        op = MeasurementOp.block_average(y.shape, y.shape)
        a2, r2 = solve_ip_primal_dual(
            op, y, lam, th, cfg=SolverConfig(tol=1e-11, max_iter=200000), regularizer="h_theta"
        )
        worst = max(worst, abs(r1.final_objective - r2.final_objective))
    return worst <= 1e-6, f"max objective disagreement {worst:.2e}"


def _check_uniqueness(rng, fault):
    y = rng.random((8, 8))
    prob = DenoiseProblem(y, 0.1, 0.5)
    H = StackedAnalysisOp.for_problem(prob)
    sols = []
    for _ in range(4):
        v0 = tuple(prob.lam * (2 * rng.random(s) - 1) for s in H.dual_shapes())
        a, _ = denoise_dual_apg(prob, SolverConfig(tol=1e-14, max_iter=50000), v0=v0)
        sols.append(a.values)
    spread = max(float(np.abs(s - sols[0]).max()) for s in sols)
    return spread <= 1e-6, f"max pairwise spread {spread:.2e}"


def _check_lambda_monotone(rng, fault):
    y = rng.random((8, 8))
    th = 0.5
    vals = []
    for lam in np.geomspace(0.005, 0.5, 10):
        a, _ = denoise_dual_apg(DenoiseProblem(y, float(lam), th), SolverConfig(tol=1e-13, max_iter=50000))
        vals.append(discrete_theta_norm(a, th))
    inc = max(0.0, float(np.max(np.diff(vals))))
    return inc <= 1e-7, f"largest increase {inc:.2e}"


CHECKS: list[tuple[str, Callable]] = [
    ("theta-norm equals brute-force continuous norm", _check_exactness),
    ("homogeneity and triangle inequality", _check_norm_axioms),
    ("TV <= 2 * corner norm", _check_tv_vs_corner),
    ("refinement invariance", _check_refine_invariance),
    ("corner counts and indicator atoms", _check_corner_counts),
    ("downsampling never increases norms or loss", _check_downsampling),
    ("level-set reconstruction and coarea identity", _check_layers),
    ("cocorner bound; identity on nested rectangles", _check_cocorner),
    ("adjoint tests", _check_adjoints),
    ("dual APG vs primal-dual", _check_solvers),
    ("uniqueness under dual warm starts", _check_uniqueness),
    ("theta-norm of minimizer nonincreasing in lambda", _check_lambda_monotone),
]


def run_suite(seed: int = 0, inject_fault: bool = False) -> list[CheckResult]:
    """Run every check with its own generator derived from ``seed``."""
    out = []
    for k, (name, fn) in enumerate(CHECKS):
        rng = np.random.default_rng([seed, k])
        try:
            ok, detail = fn(rng, inject_fault)
        except Exception as exc:  # a crash is a failure, not an abort
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(ok), detail))
    return out
