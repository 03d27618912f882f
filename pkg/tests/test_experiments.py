import numpy as np
import pytest

from mtv.experiments import (
    bench_image,
    golden_section_max,
    refinement_experiment,
    synthetic_corpus,
    synthetic_image,
    tune_lambda,
)
from mtv.operators import add_gaussian_noise


def test_synthetic_image_is_piecewise_constant():
    img = synthetic_image(0)
    assert img.shape == (64, 64)
    assert 0 <= img.min() and img.max() <= 1
    assert len(np.unique(img)) <= 9
    np.testing.assert_array_equal(img, synthetic_image(0))
    assert len(synthetic_corpus(3, size=32)) == 3


def test_golden_section_evaluation_budget():
    calls = []

    def f(x):
        calls.append(x)
        return -(x - 0.3) ** 2

    x, v, hist = golden_section_max(f, 0.0, 1.0, 20)
    assert len(calls) == 20 == len(hist)
    assert abs(x - 0.3) < 1e-3
    assert all(0.0 < c < 1.0 for c in calls)
    with pytest.raises(ValueError):
        golden_section_max(f, 0, 1, 1)


def test_tune_lambda_beats_endpoints():
    clean = synthetic_image(1, 32)
    noisy = add_gaussian_noise(clean, 0.1, 0).values
    res = tune_lambda(noisy, clean, 0.5, evals=8)
    assert 0.01 < res.lam < 0.5
    assert res.psnr > max(e[2] for e in res.evaluations) - 1e-12


def test_bench_image_fixed_mode():
    clean = synthetic_image(2, 32)
    r = bench_image("x", clean, 0.1, 0, mode="fixed", fixed=(0.1, 0.5))
    assert r.mtv.theta == 0.5 and r.tv.theta == 0.0
    with pytest.raises(ValueError):
        bench_image("x", clean, 0.1, 0, mode="fixed")


def test_refinement_refined_data_small():
    y = add_gaussian_noise(synthetic_image(4, 8), 0.1, 0).values
    rows = refinement_experiment(y, 0.1, 0.5, [3, 4, 5])
    objs = [r.objective for r in rows]
    assert max(objs) - min(objs) <= 1e-8
    assert max(r.measurement_dev for r in rows) <= 1e-6
    assert max(r.solution_dev for r in rows) <= 1e-6


def test_refinement_measurement_embedding_small():
    y = add_gaussian_noise(synthetic_image(4, 8), 0.1, 0).values
    rows = refinement_experiment(y, 0.1, 0.5, [3, 4], embedding="measurement")
    assert abs(rows[0].objective - rows[1].objective) <= 1e-8
    assert rows[1].measurement_dev <= 1e-6


def test_refinement_rejects_coarser_levels():
    with pytest.raises(ValueError):
        refinement_experiment(np.zeros((8, 8)), 0.1, 0.5, [2])
    with pytest.raises(ValueError):
        refinement_experiment(np.zeros((8, 8)), 0.1, 0.5, [3], embedding="other")
