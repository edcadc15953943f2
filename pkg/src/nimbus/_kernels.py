"""Inner loops shared by the luminance, index, calibration and ingest modules.

Every kernel exists twice: a numba ``@njit`` version and a vectorised numpy
version with identical semantics. The numba path is used when numba imports
and ``NIMBUS_DISABLE_NUMBA`` is unset (or ``0``/``false``). Both variants are
exposed as ``<name>_numba`` / ``<name>_numpy`` so tests and benchmarks can
compare them directly.

Timestamps enter the kernels as float64 seconds since the epoch.
"""

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is an optional accelerator
    HAVE_NUMBA = False


def _numba_disabled() -> bool:
    return os.environ.get("NIMBUS_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")


USE_NUMBA = HAVE_NUMBA and not _numba_disabled()
BACKEND = "numba" if USE_NUMBA else "numpy"


# -- weighted mean of an 8-bit RGB image -------------------------------------

def weighted_mean_numpy(pixels, weights):
    flat = pixels.reshape(-1, 3)
    # integer channel sums keep the result independent of pixel order
    m = flat.sum(axis=0, dtype=np.int64) / (255.0 * flat.shape[0])
    w = np.asarray(weights, dtype=np.float64)
    return float((w[0] * m[0] + w[1] * m[1] + w[2] * m[2]) / (w[0] + w[1] + w[2]))


def _weighted_mean_loop(pixels, weights):
    flat = pixels.reshape(-1, 3)
    s0 = 0
    s1 = 0
    s2 = 0
    for i in range(flat.shape[0]):
        s0 += flat[i, 0]
        s1 += flat[i, 1]
        s2 += flat[i, 2]
    d = 255.0 * flat.shape[0]
    total = weights[0] * (s0 / d) + weights[1] * (s1 / d) + weights[2] * (s2 / d)
    return total / (weights[0] + weights[1] + weights[2])


# -- closed-interval membership ----------------------------------------------

def _merge_intervals(starts, ends):
    order = np.argsort(starts, kind="stable")
    s = starts[order]
    e = ends[order]
    ms = []
    me = []
    for a, b in zip(s, e):
        if ms and a <= me[-1]:
            me[-1] = max(me[-1], b)
        else:
            ms.append(a)
            me.append(b)
    return np.asarray(ms, dtype=np.float64), np.asarray(me, dtype=np.float64)


def in_any_interval_numpy(times, starts, ends):
    times = np.asarray(times, dtype=np.float64)
    if len(starts) == 0:
        return np.zeros(times.shape, dtype=bool)
    ms, me = _merge_intervals(np.asarray(starts, np.float64), np.asarray(ends, np.float64))
    idx = np.searchsorted(ms, times, side="right") - 1
    hit = idx >= 0
    out = np.zeros(times.shape, dtype=bool)
    out[hit] = times[hit] <= me[idx[hit]]
    return out


def _in_any_interval_loop(times, starts, ends):
    out = np.zeros(times.shape[0], dtype=np.bool_)
    m = starts.shape[0]
    if m == 0:
        return out
    order = np.argsort(starts, kind="mergesort")
    ms = np.empty(m, dtype=np.float64)
    me = np.empty(m, dtype=np.float64)
    k = -1
    for j in range(m):
        a = starts[order[j]]
        b = ends[order[j]]
        if k >= 0 and a <= me[k]:
            if b > me[k]:
                me[k] = b
        else:
            k += 1
            ms[k] = a
            me[k] = b
    k += 1
    for i in range(times.shape[0]):
        t = times[i]
        # last merged interval starting at or before t
        lo = 0
        hi = k
        while lo < hi:
            mid = (lo + hi) // 2
            if ms[mid] <= t:
                lo = mid + 1
            else:
                hi = mid
        if lo > 0 and t <= me[lo - 1]:
            out[i] = True
    return out


# -- nearest neighbour within a tolerance -------------------------------------

def nearest_within_numpy(query, ref, tolerance):
    """Index into sorted ``ref`` nearest each query, -1 if farther than tolerance.

    Equidistant candidates resolve to the earlier reference.
    """
    query = np.asarray(query, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    out = np.full(query.shape, -1, dtype=np.int64)
    if ref.size == 0:
        return out
    right = np.searchsorted(ref, query, side="left")
    left = right - 1
    right_c = np.minimum(right, ref.size - 1)
    left_c = np.maximum(left, 0)
    d_left = np.where(left >= 0, query - ref[left_c], np.inf)
    d_right = np.where(right < ref.size, ref[right_c] - query, np.inf)
    best = np.where(d_left <= d_right, left_c, right_c)
    dist = np.minimum(d_left, d_right)
    ok = dist <= tolerance
    out[ok] = best[ok]
    return out


def _nearest_within_loop(query, ref, tolerance):
    out = np.full(query.shape[0], -1, dtype=np.int64)
    n = ref.shape[0]
    if n == 0:
        return out
    j = 0
    for i in range(query.shape[0]):
        q = query[i]
        while j < n and ref[j] < q:
            j += 1
        best = -1
        best_d = np.inf
        if j > 0:
            best = j - 1
            best_d = q - ref[j - 1]
        if j < n and ref[j] - q < best_d:
            best = j
            best_d = ref[j] - q
        if best_d <= tolerance:
            out[i] = best
        # query may be unsorted only in the numpy path; keep the pointer valid
        if i + 1 < query.shape[0] and query[i + 1] < q:
            j = 0
    return out


# -- strict below-threshold counts over sorted values -------------------------

def count_below_numpy(sorted_values, thresholds):
    return np.searchsorted(np.asarray(sorted_values, np.float64),
                           np.asarray(thresholds, np.float64), side="left").astype(np.int64)


def _count_below_loop(sorted_values, thresholds):
    out = np.empty(thresholds.shape[0], dtype=np.int64)
    n = sorted_values.shape[0]
    for k in range(thresholds.shape[0]):
        lo = 0
        hi = n
        tau = thresholds[k]
        while lo < hi:
            mid = (lo + hi) // 2
            if sorted_values[mid] < tau:
                lo = mid + 1
            else:
                hi = mid
        out[k] = lo
    return out


# -- signed distance to the nearest interval ----------------------------------

def signed_distance_numpy(times, starts, ends):
    """Signed gap to the nearest interval: negative before, positive after, 0 inside.

    On exact ties the earlier interval wins (a positive, after-end reading).
    """
    times = np.asarray(times, dtype=np.float64)[:, None]
    starts = np.asarray(starts, dtype=np.float64)[None, :]
    ends = np.asarray(ends, dtype=np.float64)[None, :]
    signed = np.where(times < starts, times - starts, np.where(times > ends, times - ends, 0.0))
    order = np.argsort(starts[0], kind="stable")
    signed = signed[:, order]
    pick = np.argmin(np.abs(signed), axis=1)
    return signed[np.arange(signed.shape[0]), pick]


def _signed_distance_loop(times, starts, ends):
    order = np.argsort(starts, kind="mergesort")
    out = np.empty(times.shape[0], dtype=np.float64)
    for i in range(times.shape[0]):
        t = times[i]
        best = np.inf
        best_abs = np.inf
        for k in range(order.shape[0]):
            j = order[k]
            if t < starts[j]:
                d = t - starts[j]
            elif t > ends[j]:
                d = t - ends[j]
            else:
                d = 0.0
            if abs(d) < best_abs:
                best_abs = abs(d)
                best = d
        out[i] = best
    return out


if HAVE_NUMBA:
    weighted_mean_numba = njit(cache=True, nogil=True)(_weighted_mean_loop)
    in_any_interval_numba = njit(cache=True, nogil=True)(_in_any_interval_loop)
    nearest_within_numba = njit(cache=True, nogil=True)(_nearest_within_loop)
    count_below_numba = njit(cache=True, nogil=True)(_count_below_loop)
    signed_distance_numba = njit(cache=True, nogil=True)(_signed_distance_loop)
else:  # pragma: no cover
    weighted_mean_numba = _weighted_mean_loop
    in_any_interval_numba = _in_any_interval_loop
    nearest_within_numba = _nearest_within_loop
    count_below_numba = _count_below_loop
    signed_distance_numba = _signed_distance_loop


def weighted_mean(pixels, weights):
    if USE_NUMBA:
        return float(weighted_mean_numba(np.ascontiguousarray(pixels),
                                         np.asarray(weights, dtype=np.float64)))
    return weighted_mean_numpy(pixels, weights)


def in_any_interval(times, starts, ends):
    if USE_NUMBA:
        return in_any_interval_numba(np.asarray(times, np.float64),
                                     np.asarray(starts, np.float64), np.asarray(ends, np.float64))
    return in_any_interval_numpy(times, starts, ends)


def nearest_within(query, ref, tolerance):
    if USE_NUMBA:
        return nearest_within_numba(np.asarray(query, np.float64), np.asarray(ref, np.float64),
                                    float(tolerance))
    return nearest_within_numpy(query, ref, tolerance)


def count_below(sorted_values, thresholds):
    if USE_NUMBA:
        return count_below_numba(np.asarray(sorted_values, np.float64),
                                 np.asarray(thresholds, np.float64))
    return count_below_numpy(sorted_values, thresholds)


def signed_distance(times, starts, ends):
    if USE_NUMBA:
        return signed_distance_numba(np.asarray(times, np.float64),
                                     np.asarray(starts, np.float64), np.asarray(ends, np.float64))
    return signed_distance_numpy(times, starts, ends)
