"""numba kernels for angle generation and in-place Givens sweeps.

Every function here has a twin with the same signature in
``_kernels_numpy``.  Results agree to the last few ulps (transcendental
functions come from different libms).

All 64-bit integer arithmetic is done on ``np.uint64`` operands only;
mixing signed and unsigned integers makes numba promote to float64.
"""

import math

import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_ONE = np.uint64(1)
_SH30 = np.uint64(30)
_SH27 = np.uint64(27)
_SH31 = np.uint64(31)
_SH11 = np.uint64(11)
_SH63 = np.uint64(63)
_INV_2_53 = 1.0 / 9007199254740992.0
_TWO_PI = 2.0 * math.pi
_THIRD = 1.0 / 3.0


@njit(cache=True)
def _mix(z):
    z = (z ^ (z >> _SH30)) * _MIX1
    z = (z ^ (z >> _SH27)) * _MIX2
    return z ^ (z >> _SH31)


@njit(cache=True)
def _uniform(key, ctr):
    ctr = ctr + _ONE
    return float(_mix(key + ctr * _GOLDEN) >> _SH11) * _INV_2_53, ctr


@njit(cache=True)
def _normal(key, ctr):
    u1, ctr = _uniform(key, ctr)
    u2, ctr = _uniform(key, ctr)
    return math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(_TWO_PI * u2), ctr


@njit(cache=True)
def _gamma(key, ctr, a):
    # Marsaglia-Tsang; shapes below 1 are boosted through Gamma(a + 1).
    boost = a < 1.0
    aa = a + 1.0 if boost else a
    dd = aa - _THIRD
    c = 1.0 / math.sqrt(9.0 * dd)
    while True:
        while True:
            z, ctr = _normal(key, ctr)
            v = 1.0 + c * z
            if v > 0.0:
                break
        v = v * v * v
        u, ctr = _uniform(key, ctr)
        x = z * z
        if u < 1.0 - 0.0331 * (x * x):
            break
        if u <= 0.0 or math.log(u) < 0.5 * x + dd * (1.0 - v + math.log(v)):
            break
    g = dd * v
    if boost:
        u, ctr = _uniform(key, ctr)
        g = g * (1.0 - u) ** (1.0 / a)
    return g, ctr


@njit(cache=True)
def _angle(key, d):
    a = 0.5 * d
    ctr = np.uint64(0)
    while True:
        x, ctr = _gamma(key, ctr, a)
        y, ctr = _gamma(key, ctr, a)
        t = (x - y) / (x + y)
        if abs(t) < 1.0:
            return math.asin(t)


@njit(cache=True)
def mix64(z):
    return _mix(np.uint64(z))


@njit(cache=True)
def child_seeds(root, out):
    root = np.uint64(root)
    for k in range(out.shape[0]):
        out[k] = _mix(root + np.uint64(k + 1) * _GOLDEN)


@njit(cache=True)
def angles_for_spans(seed, t0, spans, out):
    seed = np.uint64(seed)
    for n in range(spans.shape[0]):
        key = _mix(seed + np.uint64(t0 + n + 1) * _GOLDEN)
        out[n] = _angle(key, spans[n])


@njit(cache=True)
def _offset(i, m):
    return i * (2 * m - 1 - i) // 2


@njit(cache=True)
def plane_of(g, m):
    b = 2 * m - 1
    i = int((b - math.sqrt(float(b * b - 8 * g))) / 2.0)
    if i < 0:
        i = 0
    while i > 0 and _offset(i, m) > g:
        i -= 1
    while _offset(i + 1, m) <= g:
        i += 1
    return i, i + 1 + (g - _offset(i, m))


@njit(cache=True)
def fill_angles(seed, t0, count, i0, j0, m, out):
    seed = np.uint64(seed)
    i = i0
    j = j0
    for n in range(count):
        key = _mix(seed + np.uint64(t0 + n + 1) * _GOLDEN)
        out[n] = _angle(key, j - i)
        j += 1
        if j == m:
            i += 1
            j = i + 1


@njit(cache=True)
def rotate_range(x, seeds, subset_size, g0, g1, m, buf):
    if g1 <= g0:
        return
    nb = x.shape[1]
    i, j = plane_of(g0, m)
    g = g0
    while g < g1:
        k = g // subset_size
        t0 = g - k * subset_size
        n = min(subset_size - t0, g1 - g)
        fill_angles(seeds[k], t0, n, i, j, m, buf)
        for q in range(n):
            c = math.cos(buf[q])
            s = math.sin(buf[q])
            for b in range(nb):
                xi = x[i, b]
                xj = x[j, b]
                x[i, b] = c * xi - s * xj
                x[j, b] = s * xi + c * xj
            j += 1
            if j == m:
                i += 1
                j = i + 1
        g += n


@njit(cache=True)
def unrotate_range(x, seeds, subset_size, g0, g1, m, buf):
    nb = x.shape[1]
    g = g1
    while g > g0:
        k = (g - 1) // subset_size
        start = max(k * subset_size, g0)
        n = g - start
        i, j = plane_of(start, m)
        fill_angles(seeds[k], start - k * subset_size, n, i, j, m, buf)
        i, j = plane_of(g - 1, m)
        for q in range(n - 1, -1, -1):
            c = math.cos(buf[q])
            s = math.sin(buf[q])
            for b in range(nb):
                xi = x[i, b]
                xj = x[j, b]
                x[i, b] = c * xi + s * xj
                x[j, b] = c * xj - s * xi
            j -= 1
            if j == i:
                i -= 1
                j = m - 1
        g = start


@njit(cache=True)
def apply_signs(x, sign_key, lo, hi):
    sign_key = np.uint64(sign_key)
    nb = x.shape[1]
    for i in range(lo, hi):
        if _mix(sign_key + np.uint64(i + 1) * _GOLDEN) >> _SH63:
            for b in range(nb):
                x[i, b] = -x[i, b]
