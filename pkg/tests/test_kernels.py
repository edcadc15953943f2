import numpy as np
import pytest

from nimbus import _kernels as K

pytestmark = pytest.mark.skipif(not K.HAVE_NUMBA, reason="numba not installed")


def test_weighted_mean(rng):
    w = np.array([0.2126, 0.7152, 0.0722])
    for _ in range(20):
        px = rng.integers(0, 256, (int(rng.integers(1, 40)), int(rng.integers(1, 40)), 3), dtype=np.uint8)
        assert K.weighted_mean_numba(px, w) == K.weighted_mean_numpy(px, w)


def test_in_any_interval(rng):
    for _ in range(50):
        n = int(rng.integers(0, 8))
        starts = np.round(rng.uniform(0, 100, n))
        ends = starts + np.round(rng.uniform(0, 20, n))
        t = np.round(rng.uniform(-10, 130, 300))
        assert np.array_equal(K.in_any_interval_numba(t, starts, ends),
                              K.in_any_interval_numpy(t, starts, ends))


def test_nearest_within(rng):
    for _ in range(50):
        ref = np.unique(np.round(rng.uniform(0, 1000, 80)))
        q = np.sort(np.round(rng.uniform(-50, 1050, 300) * 2) / 2)
        tol = float(rng.integers(0, 30))
        assert np.array_equal(K.nearest_within_numba(q, ref, tol), K.nearest_within_numpy(q, ref, tol))


def test_nearest_within_empty_ref():
    q = np.array([1.0, 2.0])
    assert K.nearest_within_numba(q, np.empty(0), 5.0).tolist() == [-1, -1]
    assert K.nearest_within_numpy(q, np.empty(0), 5.0).tolist() == [-1, -1]


def test_count_below(rng):
    for _ in range(50):
        v = np.sort(np.round(rng.uniform(0, 0.3, 200), 2))
        th = np.round(np.arange(0.0, 0.32, 0.01), 2)
        assert np.array_equal(K.count_below_numba(v, th), K.count_below_numpy(v, th))


def test_signed_distance(rng):
    for _ in range(50):
        n = int(rng.integers(1, 6))
        starts = np.round(rng.uniform(0, 100, n))
        ends = starts + np.round(rng.uniform(0, 10, n))
        t = np.round(rng.uniform(-20, 130, 300))
        assert np.array_equal(K.signed_distance_numba(t, starts, ends),
                              K.signed_distance_numpy(t, starts, ends))


def test_dispatch_follows_flag(monkeypatch):
    px = np.full((2, 2, 3), 255, dtype=np.uint8)
    for flag in (True, False):
        monkeypatch.setattr(K, "USE_NUMBA", flag)
        assert K.weighted_mean(px, [0.2126, 0.7152, 0.0722]) == 1.0
