"""Hot numeric kernels, each with a numba build and a numpy build.

The public names at the bottom of the module resolve to one of the two
according to :data:`ordalloc._accel.USE_NUMBA`, except the Monte Carlo
block kernel, which always uses the faster numpy build.  Both builds are
importable under their private names so tests and benchmarks can compare
them.
"""
import numpy as np

from ._accel import USE_NUMBA, njit

SERIES_RUN = 5
SERIES_MAX_TERMS = 100_000
_CHUNK = 4096


# --- joint-moment series -------------------------------------------------
#
# Normalised terms r_k of  sum_k (-1)^k C(nu, k) G(n+k+1-j) / G(nu+n+k+1),
# scaled so that r_0 = 1.  Consecutive ratio:
#   r_k / r_{k-1} = (k-1-nu)/k * (n-j+k)/(n+nu+k)
# so r_k ~ C k^(-(1 + 2 nu + j)).  Once the stop rule fires, the remainder
# is estimated by Euler-Maclaurin on that power law:
#   sum_{m>k} r_m ~= r_k * (k / (2 nu + j) - 1/2)


def _series_tail(r, k, nu, j):
    return r * (k / (2.0 * nu + j) - 0.5)


_series_tail_jit = njit(cache=True, nogil=True)(_series_tail)


@njit(cache=True, nogil=True)
def _series_numba(nu, n, j, tol, run, max_terms):
    s = 1.0
    r = 1.0
    small = 0
    for k in range(1, max_terms):
        r *= (k - 1.0 - nu) / k * (n - j + k) / (n + nu + k)
        s += r
        if r == 0.0:
            return s, k + 1, True
        if abs(r) < tol * abs(s):
            small += 1
            if small >= run:
                return s + _series_tail_jit(r, k, nu, j), k + 1, True
        else:
            small = 0
    return s, max_terms, False


def _series_numpy(nu, n, j, tol, run, max_terms):
    s = 1.0
    r = 1.0
    small = 0
    k0 = 1
    while k0 < max_terms:
        k = np.arange(k0, min(k0 + _CHUNK, max_terms), dtype=np.float64)
        terms = r * np.cumprod((k - 1.0 - nu) / k * (n - j + k) / (n + nu + k))
        partial = s + np.cumsum(terms)
        is_small = np.abs(terms) < tol * np.abs(partial)
        # run length of consecutive small terms ending at each position,
        # carrying the count over from the previous chunk
        idx = np.arange(is_small.size)
        last_big = np.maximum.accumulate(np.where(is_small, -1, idx))
        runs = idx - last_big
        runs[last_big == -1] += small
        stop = np.flatnonzero((terms == 0.0) | (runs >= run))
        if stop.size:
            m = stop[0]
            tail = float(_series_tail(terms[m], k[m], nu, j))
            return float(partial[m]) + tail, int(k0 + m + 1), True
        s = float(partial[-1])
        r = float(terms[-1])
        small = int(runs[-1])
        k0 += k.size
    return s, max_terms, False


# --- Monte Carlo block accumulation ----------------------------------------


@njit(cache=True, nogil=True)
def _block_moments_numba(u, nu, sort_rows):
    m, n = u.shape
    x = np.empty((m, n))
    for t in range(m):
        for i in range(n):
            x[t, i] = u[t, i]
        if sort_rows:
            # insertion sort: rows are short
            for i in range(1, n):
                v = x[t, i]
                k = i - 1
                while k >= 0 and x[t, k] > v:
                    x[t, k + 1] = x[t, k]
                    k -= 1
                x[t, k + 1] = v
    # cost is dominated by the power and the sort; the products go to BLAS
    y = x**nu
    y2 = y * y
    return y.sum(axis=0), y.T @ y, y2.T @ y, y2.T @ y2


def _block_moments_numpy(u, nu, sort_rows):
    x = np.sort(u, axis=1) if sort_rows else u
    y = x**nu
    y2 = y * y
    return y.sum(axis=0), y.T @ y, y2.T @ y, y2.T @ y2


# --- projection onto the floored simplex -----------------------------------


@njit(cache=True)
def _project_simplex_numba(v, floor):
    n = v.size
    mass = 1.0 - n * floor
    z = v - floor
    u = np.sort(z)[::-1]
    css = 0.0
    theta = 0.0
    for k in range(n):
        css += u[k]
        t = (css - mass) / (k + 1)
        if u[k] - t > 0.0:
            theta = t
    out = np.empty(n)
    for i in range(n):
        out[i] = max(z[i] - theta, 0.0) + floor
    return out


def _project_simplex_numpy(v, floor):
    n = v.size
    mass = 1.0 - n * floor
    z = v - floor
    u = np.sort(z)[::-1]
    t = (np.cumsum(u) - mass) / np.arange(1, n + 1)
    k = np.flatnonzero(u - t > 0.0)[-1]
    return np.maximum(z - t[k], 0.0) + floor


if USE_NUMBA:
    series_sum = _series_numba
    project_simplex = _project_simplex_numba
else:
    series_sum = _series_numpy
    project_simplex = _project_simplex_numpy
# numpy's vectorised power and BLAS products beat the compiled loop here
# (see benchmarks/bench_kernels.py), so the block kernel ignores the flag
block_moments = _block_moments_numpy

BACKEND = "numba" if USE_NUMBA else "numpy"
