"""Backend-neutral formulas.

Every function here is written so that it runs unchanged on numpy arrays and,
after ``numba.njit``, on scalars inside compiled loops.  Keep them free of
calls to other Python-level helpers for that reason.
"""

import numpy as np

# Philox4x64-10 constants (Salmon et al., Random123).
PHILOX_M0 = np.uint64(0xD2E7470EE14C6C93)
PHILOX_M1 = np.uint64(0xCA5A826395121157)
PHILOX_W0 = np.uint64(0x9E3779B97F4A7C15)
PHILOX_W1 = np.uint64(0xBB67AE8584CAA73B)
M0_LO = np.uint64(0xE14C6C93)
M0_HI = np.uint64(0xD2E7470E)
M1_LO = np.uint64(0x95121157)
M1_HI = np.uint64(0xCA5A8263)
MASK32 = np.uint64(0xFFFFFFFF)
SHIFT32 = np.uint64(32)
SHIFT11 = np.uint64(11)
INV53 = 1.0 / 9007199254740992.0

FAMILY_STABLE = 0
FAMILY_STUDENT = 1

PROCESS_NONE = 0
PROCESS_POISSON = 1
PROCESS_FIXED = 2

# resets within this relative distance of an output time are moved onto it, so
# fixed schedules commensurate with the grid leave no round-off sliver intervals
EVENT_SNAP = 1e-12


def philox4x64(c0, c1, c2, c3, k0, k1):
    """Philox4x64 with 10 rounds; returns the four output words.

    64x64 -> 128 bit products are assembled from 32-bit halves so the same
    code runs in numpy (wrapping uint64 arithmetic) and numba.
    """
    for _ in range(10):
        alo = c0 & MASK32
        ahi = c0 >> SHIFT32
        ll = alo * M0_LO
        hl = ahi * M0_LO
        lh = alo * M0_HI
        cross = (ll >> SHIFT32) + (hl & MASK32) + lh
        hi0 = ahi * M0_HI + (hl >> SHIFT32) + (cross >> SHIFT32)
        lo0 = c0 * PHILOX_M0

        alo = c2 & MASK32
        ahi = c2 >> SHIFT32
        ll = alo * M1_LO
        hl = ahi * M1_LO
        lh = alo * M1_HI
        cross = (ll >> SHIFT32) + (hl & MASK32) + lh
        hi1 = ahi * M1_HI + (hl >> SHIFT32) + (cross >> SHIFT32)
        lo1 = c2 * PHILOX_M1

        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
        k0 = k0 + PHILOX_W0
        k1 = k1 + PHILOX_W1
    return c0, c1, c2, c3


def stable_transform(u1, u2, alpha, scale):
    """Chambers-Mallows-Stuck map for a symmetric alpha-stable variate.

    ``u1, u2`` are uniforms on (0, 1).  The unit-scale output has
    characteristic function ``exp(-|t|**alpha)``.
    """
    v = np.pi * (u1 - 0.5)
    w = -np.log(u2)
    if alpha == 1.0:
        x = np.tan(v)
    elif alpha == 2.0:
        x = 2.0 * np.sin(v) * np.sqrt(w)
    else:
        x = (np.sin(alpha * v) / np.cos(v) ** (1.0 / alpha)
             * (np.cos((1.0 - alpha) * v) / w) ** ((1.0 - alpha) / alpha))
    return scale * x


def student_transform(u1, u2, r, scale):
    """Bailey's trigonometric map for Student's t with ``r`` degrees of freedom."""
    return scale * np.sqrt(r * np.expm1(-2.0 / r * np.log(u1))) * np.cos(2.0 * np.pi * u2)


def log_r0_interp(t, x0, dx, ytab):
    """log R0(t) from a table of y = log(-log R0) on a uniform log-t grid.

    Outside the table the end segments are extended linearly, which is the
    power-law continuation of -log R0.
    """
    if t <= 0.0:
        return 0.0
    f = (np.log(t) - x0) / dx
    n = ytab.shape[0]
    i = int(np.floor(f))
    if i < 0:
        i = 0
    elif i > n - 2:
        i = n - 2
    w = f - i
    return -np.exp(ytab[i] * (1.0 - w) + ytab[i + 1] * w)
