"""Acceptance gate: one test per criterion, each at its stated tolerance.

A summary line per criterion is printed at the end of the pytest run.
"""

import os
import time

import numpy as np
import pytest

from mtv.experiments import bench_image, refinement_experiment, synthetic_corpus, synthetic_image
from mtv.grid import refine
from mtv.io import list_images, load_image
from mtv.norms import corner_measure, corner_norm, discrete_theta_norm, gradient_norms, total_variation
from mtv.operators import DenoiseProblem, MeasurementOp, add_gaussian_noise, downsample, objective
from mtv.solvers import (
    SolverConfig,
    StackedAnalysisOp,
    denoise_dual_apg,
    oracle_solve,
    solve_ip_primal_dual,
)
from mtv.verify import coarea_check, cocorner_check, continuous_norms, level_sets

from conftest import random_image

ORACLE_ITERS = 4_000_000


def _corpus(seed, count):
    rng = np.random.default_rng(seed)
    return [random_image(rng, int(rng.integers(1, 6))) for _ in range(count)]


def test_c01_exact_discretization(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    worst_split = worst_brute = 0.0
    for k in range(100):
        n = 1 + k % 6
        a = rng.random((2**n, 2**n)) * (rng.random((2**n, 2**n)) < 0.7)
        m = corner_measure(a).total_variation
        g = sum(gradient_norms(a))
        c, g1, g2 = continuous_norms(a)
        for th in (0.01, 0.33, 1.0):
            val = discrete_theta_norm(a, th)
            worst_split = max(worst_split, abs(val - (th * m + (1 - th) * g)))
            worst_brute = max(worst_brute, abs(val - (th * c + (1 - th) * (g1 + g2))) / max(1.0, val))
    dt = time.perf_counter() - t0
    ok = worst_split <= 1e-12 and worst_brute <= 1e-12 and dt < 5
    criterion(1, "exact discretization", ok,
              f"split dev {worst_split:.1e}, point-evaluation dev {worst_brute:.1e} (rel), {dt:.2f}s")
    assert ok


def test_c02_corner_counts(criterion):
    rect = np.zeros((8, 8))
    rect[2:5, 1:7] = 1
    bar_bump = np.zeros((4, 4))
    bar_bump[2, 0:3] = 1
    bar_bump[1, 1] = 1
    r, b = corner_norm(rect), corner_norm(bar_bump)
    ok = r == 4.0 and b == 8.0
    criterion(2, "corner counts", ok, f"rectangle {r}, bar+bump {b}")
    assert ok


def test_c03_cocorner_formula(criterion):
    t0 = time.perf_counter()
    images = _corpus(303, 200)
    rng = np.random.default_rng(304)
    worst = 0.0
    bad_images = mono_breaks = 0
    for a in images:
        ss = np.sort(rng.random(20) * max(a.max(), 1e-3) * 1.1)
        res = [cocorner_check(a, s) for s in ss]
        d = max(abs(r.defect) for r in res)
        worst = max(worst, d)
        bad_images += d > 1e-10
        cm = np.array([r.c_minus for r in res])
        cp = np.array([r.c_plus for r in res])
        mono_breaks += bool(np.any(np.diff(cm) < -1e-12) or np.any(np.diff(cp) > 1e-12))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-10 and mono_breaks == 0 and dt < 10
    criterion(3, "cocorner identity + monotonicity", ok,
              f"{bad_images}/200 images violate, worst |C- + C+ - total| {worst:.3g}, "
              f"{mono_breaks} monotonicity breaks, {dt:.2f}s")
    assert ok


def test_c04_coarea_formula(criterion):
    images = _corpus(303, 200)
    rng = np.random.default_rng(304)
    worst = 0.0
    for a in images:
        tv = total_variation(a)
        worst = max(worst, abs(level_sets(a).layer_tv_sum() - tv))
        for s in rng.random(20) * max(a.max(), 1e-3) * 1.1:
            worst = max(worst, coarea_check(a, s).defect)
    ok = worst <= 1e-10
    criterion(4, "coarea / layer-cake identity", ok, f"worst defect {worst:.1e}")
    assert ok


def test_c05_downsampling_monotonicity(criterion):
    rng = np.random.default_rng(505)
    violations = 0
    for _ in range(100):
        a = random_image(rng, int(rng.integers(1, 7)))
        b = downsample(a)
        violations += corner_norm(b) > corner_norm(a) + 1e-12
        violations += total_variation(b) > total_variation(a) + 1e-12
    for _ in range(100):
        n = int(rng.integers(1, 6))
        a = random_image(rng, n)
        N = int(rng.integers(0, n))
        y = rng.random((2**N, 2**N)) + 0.1 * rng.standard_normal((2**N, 2**N))
        prob = DenoiseProblem(y, float(rng.uniform(0.01, 1)), float(rng.random()), "theta_norm")
        violations += objective(refine(downsample(a)), prob) > objective(a, prob) + 1e-12
    ok = violations == 0
    criterion(5, "downsampling monotonicity", ok, f"{violations} violations in 300 checks")
    assert ok


def test_c06_solver_agreement(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(606)
    worst_obj = worst_sol = 0.0
    combos = [(lam, th) for lam in (0.05, 0.2) for th in (0.0, 0.5, 1.0)]
    for k in range(20):
        lam, th = combos[k % len(combos)]
        y = rng.random((4, 4)) + 0.1 * rng.standard_normal((4, 4))
        prob = DenoiseProblem(y, lam, th)
        a1, r1 = denoise_dual_apg(prob, SolverConfig(tol=1e-13, max_iter=100000))
        op = MeasurementOp.block_average(y.shape, y.shape)
        a2, r2 = solve_ip_primal_dual(op, y, lam, th, cfg=SolverConfig(tol=1e-12, max_iter=500000), regularizer="h_theta")
        a3 = oracle_solve(prob, iters=ORACLE_ITERS)
        objs = [r1.final_objective, r2.final_objective, objective(a3, prob)]
        sols = [a1.values, a2.values, a3.values]
        worst_obj = max(worst_obj, max(objs) - min(objs))
        worst_sol = max(worst_sol, max(np.abs(s - t).max() for s in sols for t in sols))
    dt = time.perf_counter() - t0
    ok = worst_obj <= 1e-6 and worst_sol <= 1e-4 and dt < 60
    criterion(6, "dual APG / primal-dual / oracle agreement", ok,
              f"objective spread {worst_obj:.1e}, solution spread {worst_sol:.1e}, {dt:.1f}s")
    assert ok


def test_c07_uniqueness(criterion):
    rng = np.random.default_rng(707)
    worst = 0.0
    for _ in range(3):
        y = rng.random((8, 8)) + 0.1 * rng.standard_normal((8, 8))
        prob = DenoiseProblem(y, float(rng.uniform(0.05, 0.2)), float(rng.random()))
        H = StackedAnalysisOp.for_problem(prob)
        sols = []
        for _ in range(10):
            v0 = tuple(prob.lam * rng.uniform(-1, 1, s) for s in H.dual_shapes())
            sols.append(denoise_dual_apg(prob, SolverConfig(tol=1e-14, max_iter=100000), v0=v0)[0].values)
        worst = max(worst, max(np.abs(s - t).max() for s in sols for t in sols))
    ok = worst <= 1e-6
    criterion(7, "uniqueness under 10 dual initializations", ok, f"max pairwise l_inf {worst:.1e}")
    assert ok


def test_c08_grid_sufficiency(criterion):
    t0 = time.perf_counter()
    crop = synthetic_image(808, 64)[16:48, 16:48]
    y = add_gaussian_noise(crop, 0.1, 808).values
    rows = refinement_experiment(y, 0.1, 0.5, [5, 6, 7])
    dt = time.perf_counter() - t0
    objs = [r.objective for r in rows]
    spread = max(objs) - min(objs)
    mdev = max(r.measurement_dev for r in rows)
    sdev = max(r.solution_dev for r in rows)
    ok = spread <= 1e-8 and mdev <= 1e-6 and sdev <= 1e-6 and dt < 120
    criterion(8, "finite-grid sufficiency (levels 5, 6, 7)", ok,
              f"objective spread {spread:.1e}, measurement spread {mdev:.1e}, "
              f"distance to refined level-5 solution {sdev:.1e}, {dt:.1f}s")
    assert ok


@pytest.fixture(scope="module")
def synthetic_bench():
    corpus = synthetic_corpus(10, 64, seed=0)
    return [bench_image(f"syn{k}", img, 25 / 255, seed=100 + k) for k, img in enumerate(corpus)]


def test_c09_mtv_beats_tv(criterion, synthetic_bench):
    tv = np.mean([r.tv.psnr for r in synthetic_bench])
    mtv = np.mean([r.mtv.psnr for r in synthetic_bench])
    ok = mtv - tv >= 0.1
    criterion(9, "tuned MTV vs tuned TV, synthetic corpus", ok,
              f"TV {tv:.3f} dB, MTV {mtv:.3f} dB, gain {mtv - tv:+.3f} dB")
    assert ok


def test_c10_theta_star_interior(criterion, synthetic_bench):
    thetas = np.array([r.mtv.theta for r in synthetic_bench])
    inside = int(np.sum((thetas > 0.05) & (thetas < 1.0)))
    ok = inside >= 8
    criterion(10, "theta* in (0.05, 1.0)", ok,
              f"{inside}/10 inside; theta* = {np.array2string(thetas, precision=4)}; "
              f"{int(np.sum(thetas > 0.99))}/10 within 0.01 of the theta=1 boundary "
              "(the search never evaluates endpoints)")
    assert ok


REFERENCE_GAPS_DB = {5: 0.42, 15: 0.29, 25: 0.24}


@pytest.mark.skipif(not os.environ.get("MTV_DATA_DIR"), reason="MTV_DATA_DIR not set")
def test_c09_dataset_ordering(criterion):
    files = list_images(os.environ["MTV_DATA_DIR"])
    assert files, "no images in MTV_DATA_DIR"
    images = [(p.stem, load_image(p).values) for p in files]
    lines, ok = [], True
    for s255, ref in REFERENCE_GAPS_DB.items():
        res = [bench_image(i, img, s255 / 255, seed=k) for k, (i, img) in enumerate(images)]
        gap = np.mean([r.mtv.psnr for r in res]) - np.mean([r.tv.psnr for r in res])
        ok &= gap >= 0 and abs(gap - ref) <= 0.3
        lines.append(f"sigma {s255}: {gap:+.3f} dB (reference {ref:+.2f})")
    criterion(9, "dataset ordering", ok, "; ".join(lines))
    assert ok
