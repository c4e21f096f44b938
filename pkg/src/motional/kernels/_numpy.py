"""Pure-numpy kernels, vectorised over particles.

Each particle consumes its counter-based stream in exactly the same order as
the compiled path, so both backends see the same random words; results agree
to floating-point round-off (libm and summation order differ).
"""

import numpy as np

from . import formulas as F


def _blocks(block_index, streams, tag, key0, key1):
    c0 = np.asarray(block_index, dtype=np.uint64)
    c1 = np.broadcast_to(np.asarray(streams, dtype=np.uint64), c0.shape)
    c2 = np.full(c0.shape, tag, dtype=np.uint64)
    c3 = np.zeros(c0.shape, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return F.philox4x64(c0, c1, c2, c3, np.uint64(key0), np.uint64(key1))


def _to_unit(words):
    return ((words >> F.SHIFT11).astype(np.float64) + 0.5) * F.INV53


def uniforms_at(counters, streams, tag, key0, key1):
    """Uniform number ``counters[i]`` of stream ``streams[i]``."""
    counters = np.asarray(counters, dtype=np.int64)
    words = np.stack(_blocks(counters >> 2, streams, tag, key0, key1))
    pick = np.take_along_axis(words, (counters & 3)[None, :], axis=0)[0]
    return _to_unit(pick)


def uniforms(key0, key1, stream, tag, start, n):
    counters = np.arange(start, start + n, dtype=np.int64)
    return uniforms_at(counters, np.full(n, stream, dtype=np.uint64), tag, key0, key1)


class _Streams:
    """Per-particle stream cursors."""

    def __init__(self, n, key0, key1, tag):
        self.ids = np.arange(n, dtype=np.uint64)
        self.ctr = np.zeros(n, dtype=np.int64)
        self.key0, self.key1, self.tag = key0, key1, tag

    def draw(self, idx):
        u = uniforms_at(self.ctr[idx], self.ids[idx], self.tag, self.key0, self.key1)
        self.ctr[idx] += 1
        return u


def _detuning(streams, idx, family, p1, p2, dcut):
    out = np.empty(idx.size)
    pos = np.arange(idx.size)
    pending = idx
    while pending.size:
        u1 = streams.draw(pending)
        u2 = streams.draw(pending)
        if family == F.FAMILY_STABLE:
            d = F.stable_transform(u1, u2, p1, p2)
        else:
            d = F.student_transform(u1, u2, p1, p2)
        ok = ~(np.abs(d) > dcut)
        out[pos[ok]] = d[ok]
        pending = pending[~ok]
        pos = pos[~ok]
    return out


def _next_event(streams, idx, process, param, t_last):
    if process == F.PROCESS_POISSON:
        return t_last - np.log(streams.draw(idx)) / param
    if process == F.PROCESS_FIXED:
        return t_last + param
    return np.full(idx.size, np.inf)


def phase_sums(family, p1, p2, dcut, process, param, times, key0, key1, tag, n, chunk=None):
    streams = _Streams(n, key0, key1, tag)
    everyone = np.arange(n)
    d = _detuning(streams, everyone, family, p1, p2, dcut)
    nxt = _next_event(streams, everyone, process, param, np.zeros(n))
    t_last = np.zeros(n)
    phi = np.zeros(n)
    comp = np.zeros(n)
    m = np.zeros(n, dtype=np.int64)
    sums = np.zeros((5, times.size))
    for k, T in enumerate(times):
        while True:
            idx = np.flatnonzero(nxt <= T * (1.0 + F.EVENT_SNAP))
            if idx.size == 0:
                break
            nxt[idx] = np.where(nxt[idx] >= T * (1.0 - F.EVENT_SNAP), T, nxt[idx])
            y = d[idx] * (nxt[idx] - t_last[idx]) - comp[idx]
            s = phi[idx] + y
            comp[idx] = (s - phi[idx]) - y
            phi[idx] = s
            t_last[idx] = nxt[idx]
            d[idx] = _detuning(streams, idx, family, p1, p2, dcut)
            nxt[idx] = _next_event(streams, idx, process, param, t_last[idx])
            m[idx] += 1
        ph = phi + (d * (T - t_last) - comp)
        cs = np.cos(ph)
        sn = np.sin(ph)
        sums[:, k] = (cs.sum(), sn.sum(), (cs * cs).sum(), (sn * sn).sum(), (cs * sn).sum())
    mf = m.astype(np.float64)
    return sums, np.array([mf.sum(), (mf * mf).sum()])


def log_r0_interp(t, x0, dx, ytab):
    t = np.asarray(t, dtype=np.float64)
    out = np.zeros(t.shape)
    pos = t > 0
    f = (np.log(t[pos]) - x0) / dx
    i = np.clip(np.floor(f).astype(np.int64), 0, ytab.size - 2)
    w = f - i
    out[pos] = -np.exp(ytab[i] * (1.0 - w) + ytab[i + 1] * w)
    return out


def conditional_sums(process, param, times, x0, dx, ytab, key0, key1, tag, n, chunk=None):
    streams = _Streams(n, key0, key1, tag)
    everyone = np.arange(n)
    nxt = _next_event(streams, everyone, process, param, np.zeros(n))
    t_last = np.zeros(n)
    lp = np.zeros(n)
    m = np.zeros(n, dtype=np.int64)
    sums = np.zeros((2, times.size))
    for k, T in enumerate(times):
        while True:
            idx = np.flatnonzero(nxt <= T * (1.0 + F.EVENT_SNAP))
            if idx.size == 0:
                break
            nxt[idx] = np.where(nxt[idx] >= T * (1.0 - F.EVENT_SNAP), T, nxt[idx])
            lp[idx] += log_r0_interp(nxt[idx] - t_last[idx], x0, dx, ytab)
            t_last[idx] = nxt[idx]
            nxt[idx] = _next_event(streams, idx, process, param, t_last[idx])
            m[idx] += 1
        v = np.exp(lp + log_r0_interp(T - t_last, x0, dx, ytab))
        sums[:, k] = (v.sum(), (v * v).sum())
    mf = m.astype(np.float64)
    return sums, np.array([mf.sum(), (mf * mf).sum()])
