import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mtv.norms import corner_norm, total_variation
from mtv.verify import (
    coarea_check,
    cocorner_check,
    corner_sign_conflicts,
    level_sets,
    nested_rectangles_image,
    truncate_max,
    truncate_min,
)

from conftest import random_image


def cross():
    f = np.zeros((5, 5))
    f[1:4, 2] = 1
    f[2, 1:4] = 1
    f[2, 2] = 2
    return f


def test_truncations(rng):
    a = random_image(rng, 3)
    lo, hi = truncate_min(a, a.max() + 1), truncate_max(a, a.max() + 1)
    np.testing.assert_array_equal(lo.values, a)
    assert not hi.values.any()
    np.testing.assert_array_equal(truncate_min(a, 0).values, 0 * a)
    np.testing.assert_array_equal(truncate_max(a, 0).values, a)
    b = (rng.random((4, 4)) < 0.5).astype(float)
    np.testing.assert_array_equal(truncate_min(b, 0.5).values, 0.5 * b)
    np.testing.assert_array_equal(truncate_max(b, 0.5).values, 0.5 * b)
    with pytest.raises(ValueError):
        truncate_min(a, -1)
    with pytest.raises(ValueError):
        truncate_max(a, -1)


@given(st.integers(0, 4), st.floats(0, 1.2), st.integers(0, 2**32 - 1))
def test_truncations_reconstruct(n, s, seed):
    a = random_image(np.random.default_rng(seed), n)
    np.testing.assert_array_equal(truncate_min(a, s).values + truncate_max(a, s).values, a)


def test_cocorner_scaled_pixel():
    a = np.zeros((4, 4))
    a[1, 1] = 2
    assert tuple(cocorner_check(a, 1.0)) == (4.0, 4.0, 8.0)
    assert tuple(cocorner_check(a, 3.0)) == (8.0, 0.0, 8.0)


@given(st.integers(0, 4), st.floats(0, 1.2), st.integers(0, 2**32 - 1))
def test_cocorner_lower_bound(n, s, seed):
    a = random_image(np.random.default_rng(seed), n)
    assert cocorner_check(a, s).defect >= -1e-12


def test_cocorner_splitting_can_exceed_total():
    # layers {>=1} (a plus) and {>=2} (centre) meet at knots where a reflex
    # corner of one sits on a convex corner of the other
    f = cross()
    assert corner_norm(f) == 8.0
    res = {s: tuple(cocorner_check(f, s)) for s in (0.5, 1.0, 1.5, 2.0)}
    assert res == {0.5: (6.0, 6.0, 8.0), 1.0: (12.0, 4.0, 8.0), 1.5: (10.0, 2.0, 8.0), 2.0: (8.0, 0.0, 8.0)}
    assert corner_sign_conflicts(level_sets(f)) == 4


@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_cocorner_identity_for_nested_rectangles(n, seed):
    rng = np.random.default_rng(seed)
    g = nested_rectangles_image(rng, n)
    assert corner_sign_conflicts(level_sets(g)) == 0
    ss = np.sort(rng.random(20) * g.max() * 1.2)
    res = [cocorner_check(g, s) for s in ss]
    assert max(abs(r.defect) for r in res) <= 1e-10
    assert np.all(np.diff([r.c_minus for r in res]) >= -1e-12)
    assert np.all(np.diff([r.c_plus for r in res]) <= 1e-12)


def test_cocorner_piecewise_linear_between_values():
    rng = np.random.default_rng(3)
    g = nested_rectangles_image(rng, 4)
    vals = np.unique(g)
    lo, hi = vals[1], vals[2]
    s = np.linspace(lo, hi, 5)
    cm = np.array([cocorner_check(g, t).c_minus for t in s])
    np.testing.assert_allclose(np.diff(cm, 2), 0, atol=1e-12)


def test_coarea_indicator():
    b = np.zeros((4, 4))
    b[1:3, 0:3] = 1
    per = total_variation(b)
    for s in (0.25, 0.5, 0.9):
        r = coarea_check(b, s)
        assert r.p_minus == pytest.approx(s * per)
        assert r.p_minus + r.p_plus == pytest.approx(per)


def test_coarea_zero():
    assert tuple(coarea_check(np.zeros((4, 4)), 0.5)) == (0.0, 0.0, 0.0, 0.0)


@given(st.integers(0, 5), st.floats(0, 1.2), st.integers(0, 2**32 - 1))
def test_coarea_identity(n, s, seed):
    a = random_image(np.random.default_rng(seed), n)
    assert coarea_check(a, s).defect <= 1e-10 * max(1.0, total_variation(a))


def test_coarea_identity_on_cross():
    f = cross()
    for s in (0.5, 1.0, 1.5):
        assert coarea_check(f, s).defect <= 1e-12


def test_level_sets_binary():
    b = (np.random.default_rng(0).random((4, 4)) < 0.5).astype(float)
    d = level_sets(b)
    assert len(d.level_sets) == 1
    np.testing.assert_array_equal(d.thresholds, [0.0, 1.0])


def test_level_sets_two_layers():
    a = np.array([[0, 1], [2, 1.0]])
    d = level_sets(a)
    np.testing.assert_array_equal(d.thresholds, [0, 1, 2])
    np.testing.assert_array_equal(d.level_sets[0], a >= 1)
    np.testing.assert_array_equal(d.level_sets[1], a >= 2)
    assert not np.any(d.level_sets[1] & ~d.level_sets[0])


@given(st.integers(0, 5), st.integers(0, 2**32 - 1))
def test_level_sets_reconstruct(n, seed):
    a = np.random.default_rng(seed).random((2**n, 2**n))
    d = level_sets(a)
    assert np.abs(d.reconstruct() - a).max() <= 1e-14
    assert d.layer_tv_sum() == pytest.approx(total_variation(a), rel=1e-10, abs=1e-12)
    assert d.layer_corner_sum() >= corner_norm(a) - 1e-10


def test_level_sets_quantize():
    a = np.array([[0.5, 0.5 + 1e-13], [0.25, 0.0]])
    assert len(level_sets(a).level_sets) == 3
    assert len(level_sets(a, quantize_bits=8).level_sets) == 2


def test_rejects_negative_images():
    with pytest.raises(ValueError):
        cocorner_check(-np.ones((2, 2)), 0.5)
    with pytest.raises(ValueError):
        level_sets(-np.ones((2, 2)))
