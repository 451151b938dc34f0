"""Pure-numpy twins of the numba kernels.

Angle generation is vectorized over a whole subset: each angle owns an
independent counter-based stream, so the rejection loops of the gamma
sampler can run as masked array rounds and still consume exactly the same
draws as the scalar code.  The Givens sweeps themselves are sequential;
here they loop over planes in Python and vectorize over the batch axis.
"""

import math

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_INV_2_53 = 1.0 / 9007199254740992.0
_TWO_PI = 2.0 * math.pi
_THIRD = 1.0 / 3.0


def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def mix64(z):
    return int(_mix(np.asarray([z], dtype=np.uint64))[0])


def _counter_keys(seed, t0, n):
    ctr = np.arange(t0 + 1, t0 + 1 + n, dtype=np.uint64)
    return _mix(np.uint64(seed) + ctr * _GOLDEN)


def child_seeds(root, out):
    out[:] = _counter_keys(root, 0, out.shape[0])


def _uniform(keys, ctr, idx):
    ctr[idx] += np.uint64(1)
    raw = _mix(keys[idx] + ctr[idx] * _GOLDEN) >> np.uint64(11)
    return raw.astype(np.float64) * _INV_2_53


def _normal(keys, ctr, idx):
    u1 = _uniform(keys, ctr, idx)
    u2 = _uniform(keys, ctr, idx)
    return np.sqrt(-2.0 * np.log(1.0 - u1)) * np.cos(_TWO_PI * u2)


def _gamma(keys, ctr, a):
    n = keys.shape[0]
    out = np.empty(n)
    boost = a < 1.0
    aa = np.where(boost, a + 1.0, a)
    dd = aa - _THIRD
    c = 1.0 / np.sqrt(9.0 * dd)
    pending = np.arange(n)
    while pending.size:
        z = _normal(keys, ctr, pending)
        v = 1.0 + c[pending] * z
        live = v > 0.0
        idx = pending[live]
        z = z[live]
        v = v[live]
        v = v * v * v
        u = _uniform(keys, ctr, idx)
        x = z * z
        with np.errstate(divide="ignore"):
            done = (u < 1.0 - 0.0331 * (x * x)) | (u <= 0.0) | (
                np.log(u) < 0.5 * x + dd[idx] * (1.0 - v + np.log(v))
            )
        out[idx[done]] = dd[idx[done]] * v[done]
        pending = np.concatenate([pending[~live], idx[~done]])
    if boost.any():
        idx = np.flatnonzero(boost)
        u = _uniform(keys, ctr, idx)
        out[idx] = out[idx] * (1.0 - u) ** (1.0 / a[idx])
    return out


def _angles(keys, spans):
    n = keys.shape[0]
    out = np.empty(n)
    ctr = np.zeros(n, dtype=np.uint64)
    a = 0.5 * np.asarray(spans, dtype=np.float64)
    pending = np.arange(n)
    while pending.size:
        sub_ctr = ctr[pending]
        x = _gamma(keys[pending], sub_ctr, a[pending])
        y = _gamma(keys[pending], sub_ctr, a[pending])
        ctr[pending] = sub_ctr
        t = (x - y) / (x + y)
        ok = np.abs(t) < 1.0
        out[pending[ok]] = np.arcsin(t[ok])
        pending = pending[~ok]
    return out


def angles_for_spans(seed, t0, spans, out):
    n = spans.shape[0]
    out[:n] = _angles(_counter_keys(seed, t0, n), spans)


def _offset(i, m):
    return i * (2 * m - 1 - i) // 2


def plane_of(g, m):
    b = 2 * m - 1
    i = max(int((b - math.sqrt(float(b * b - 8 * g))) / 2.0), 0)
    while i > 0 and _offset(i, m) > g:
        i -= 1
    while _offset(i + 1, m) <= g:
        i += 1
    return i, i + 1 + (g - _offset(i, m))


def _planes(g0, n, m):
    g = np.arange(g0, g0 + n, dtype=np.int64)
    b = 2 * m - 1
    i = np.maximum(((b - np.sqrt((b * b - 8 * g).astype(np.float64))) / 2.0).astype(np.int64), 0)
    i -= ((_offset(i, m) > g) & (i > 0)).astype(np.int64)
    i += (_offset(i + 1, m) <= g).astype(np.int64)
    return i, i + 1 + (g - _offset(i, m))


def fill_angles(seed, t0, count, i0, j0, m, out):
    g0 = _offset(i0, m) + (j0 - i0 - 1)
    i, j = _planes(g0, count, m)
    out[:count] = _angles(_counter_keys(seed, t0, count), j - i)


def rotate_range(x, seeds, subset_size, g0, g1, m, buf):
    g = g0
    while g < g1:
        k = g // subset_size
        t0 = g - k * subset_size
        n = min(subset_size - t0, g1 - g)
        i, j = plane_of(g, m)
        fill_angles(seeds[k], t0, n, i, j, m, buf)
        ii, jj = _planes(g, n, m)
        cs = np.cos(buf[:n])
        sn = np.sin(buf[:n])
        for q in range(n):
            xi = x[ii[q]].copy()
            xj = x[jj[q]]
            x[ii[q]] = cs[q] * xi - sn[q] * xj
            x[jj[q]] = sn[q] * xi + cs[q] * xj
        g += n


def unrotate_range(x, seeds, subset_size, g0, g1, m, buf):
    g = g1
    while g > g0:
        k = (g - 1) // subset_size
        start = max(k * subset_size, g0)
        n = g - start
        i, j = plane_of(start, m)
        fill_angles(seeds[k], start - k * subset_size, n, i, j, m, buf)
        ii, jj = _planes(start, n, m)
        cs = np.cos(buf[:n])
        sn = np.sin(buf[:n])
        for q in range(n - 1, -1, -1):
            xi = x[ii[q]].copy()
            xj = x[jj[q]]
            x[ii[q]] = cs[q] * xi + sn[q] * xj
            x[jj[q]] = cs[q] * xj - sn[q] * xi
        g = start


def apply_signs(x, sign_key, lo, hi):
    if hi <= lo:
        return
    bits = _counter_keys(sign_key, lo, hi - lo) >> np.uint64(63)
    x[lo:hi][bits.astype(bool)] *= -1.0
