"""Compiled ensemble kernels.

Particles are processed in fixed-size chunks; each chunk owns a slice of the
partial-sum array and the slices are reduced in chunk order afterwards, so
the result does not depend on how many threads ran the ``prange``.
"""

import os

import numba
import numpy as np
from numba import njit, prange

from . import formulas as F

if "NUMBA_THREADING_LAYER" not in os.environ:
    # the bundled TBB is often too old and numba warns on every first launch
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

_philox = njit(cache=True)(F.philox4x64)
_stable = njit(cache=True)(F.stable_transform)
_student = njit(cache=True)(F.student_transform)
_log_r0 = njit(cache=True)(F.log_r0_interp)

_INV53 = F.INV53
_SHIFT11 = F.SHIFT11


@njit(cache=True)
def _uniform(state, buf, key0, key1, stream, tag):
    k = state[0]
    j = k & 3
    if j == 0:
        b0, b1, b2, b3 = _philox(np.uint64(k >> 2), stream, tag, np.uint64(0), key0, key1)
        buf[0] = b0
        buf[1] = b1
        buf[2] = b2
        buf[3] = b3
    state[0] = k + 1
    return (float(buf[j] >> _SHIFT11) + 0.5) * _INV53


@njit(cache=True)
def _detuning(family, p1, p2, dcut, state, buf, key0, key1, stream, tag):
    while True:
        u1 = _uniform(state, buf, key0, key1, stream, tag)
        u2 = _uniform(state, buf, key0, key1, stream, tag)
        if family == F.FAMILY_STABLE:
            d = _stable(u1, u2, p1, p2)
        else:
            d = _student(u1, u2, p1, p2)
        if not abs(d) > dcut:
            return d


@njit(cache=True)
def _next_event(process, param, t_last, state, buf, key0, key1, stream, tag):
    if process == F.PROCESS_POISSON:
        return t_last - np.log(_uniform(state, buf, key0, key1, stream, tag)) / param
    if process == F.PROCESS_FIXED:
        return t_last + param
    return np.inf


@njit(cache=True)
def uniforms(key0, key1, stream, tag, start, n):
    out = np.empty(n)
    buf = np.empty(4, dtype=np.uint64)
    state = np.zeros(1, dtype=np.int64)
    state[0] = start - (start & 3)
    # prime the buffer for an unaligned start
    for _ in range(start & 3):
        _uniform(state, buf, key0, key1, stream, tag)
    for i in range(n):
        out[i] = _uniform(state, buf, key0, key1, stream, tag)
    return out


@njit(parallel=True, cache=True)
def phase_sums(family, p1, p2, dcut, process, param, times, key0, key1, tag, n, chunk):
    K = times.shape[0]
    nch = (n + chunk - 1) // chunk
    part = np.zeros((nch, 5, K))
    coll = np.zeros((nch, 2))
    for c in prange(nch):
        buf = np.empty(4, dtype=np.uint64)
        state = np.zeros(1, dtype=np.int64)
        lo = c * chunk
        hi = min(n, lo + chunk)
        for i in range(lo, hi):
            state[0] = 0
            stream = np.uint64(i)
            d = _detuning(family, p1, p2, dcut, state, buf, key0, key1, stream, tag)
            nxt = _next_event(process, param, 0.0, state, buf, key0, key1, stream, tag)
            t_last = 0.0
            phi = 0.0
            comp = 0.0
            m = 0
            for k in range(K):
                T = times[k]
                while nxt <= T * (1.0 + F.EVENT_SNAP):
                    if nxt >= T * (1.0 - F.EVENT_SNAP):
                        nxt = T
                    # Kahan-compensated phase accumulation
                    y = d * (nxt - t_last) - comp
                    s = phi + y
                    comp = (s - phi) - y
                    phi = s
                    t_last = nxt
                    d = _detuning(family, p1, p2, dcut, state, buf, key0, key1, stream, tag)
                    nxt = _next_event(process, param, t_last, state, buf, key0, key1, stream, tag)
                    m += 1
                ph = phi + (d * (T - t_last) - comp)
                cs = np.cos(ph)
                sn = np.sin(ph)
                part[c, 0, k] += cs
                part[c, 1, k] += sn
                part[c, 2, k] += cs * cs
                part[c, 3, k] += sn * sn
                part[c, 4, k] += cs * sn
            coll[c, 0] += m
            coll[c, 1] += m * m
    sums = np.zeros((5, K))
    csum = np.zeros(2)
    for c in range(nch):
        sums += part[c]
        csum += coll[c]
    return sums, csum


@njit(parallel=True, cache=True)
def conditional_sums(process, param, times, x0, dx, ytab, key0, key1, tag, n, chunk):
    K = times.shape[0]
    nch = (n + chunk - 1) // chunk
    part = np.zeros((nch, 2, K))
    coll = np.zeros((nch, 2))
    for c in prange(nch):
        buf = np.empty(4, dtype=np.uint64)
        state = np.zeros(1, dtype=np.int64)
        lo = c * chunk
        hi = min(n, lo + chunk)
        for i in range(lo, hi):
            state[0] = 0
            stream = np.uint64(i)
            nxt = _next_event(process, param, 0.0, state, buf, key0, key1, stream, tag)
            t_last = 0.0
            lp = 0.0
            m = 0
            for k in range(K):
                T = times[k]
                while nxt <= T * (1.0 + F.EVENT_SNAP):
                    if nxt >= T * (1.0 - F.EVENT_SNAP):
                        nxt = T
                    lp += _log_r0(nxt - t_last, x0, dx, ytab)
                    t_last = nxt
                    nxt = _next_event(process, param, t_last, state, buf, key0, key1, stream, tag)
                    m += 1
                v = np.exp(lp + _log_r0(T - t_last, x0, dx, ytab))
                part[c, 0, k] += v
                part[c, 1, k] += v * v
            coll[c, 0] += m
            coll[c, 1] += m * m
    sums = np.zeros((2, K))
    csum = np.zeros(2)
    for c in range(nch):
        sums += part[c]
        csum += coll[c]
    return sums, csum
