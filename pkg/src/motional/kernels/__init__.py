"""Hot ensemble kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import from ``MOTIONAL_BACKEND``
(``numba`` or ``numpy``; default ``numba`` when it imports).  Every entry
point also takes an explicit ``backend=`` so tests and benchmarks can pin
one.
"""

import os

import numpy as np

from . import _numpy
from .formulas import (
    EVENT_SNAP,
    FAMILY_STABLE,
    FAMILY_STUDENT,
    PROCESS_FIXED,
    PROCESS_NONE,
    PROCESS_POISSON,
)

try:
    from . import _numba
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None
    HAVE_NUMBA = False

CHUNK = 2048

_requested = os.environ.get("MOTIONAL_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ImportError(f"MOTIONAL_BACKEND must be 'numba' or 'numpy', got {_requested!r}")
DEFAULT_BACKEND = "numba" if (_requested == "numba" and HAVE_NUMBA) else "numpy"

__all__ = [
    "CHUNK", "DEFAULT_BACKEND", "EVENT_SNAP", "HAVE_NUMBA", "available_backends",
    "uniforms", "phase_sums", "conditional_sums", "set_threads",
    "FAMILY_STABLE", "FAMILY_STUDENT", "PROCESS_NONE", "PROCESS_POISSON", "PROCESS_FIXED",
]


def available_backends():
    return ("numba", "numpy") if HAVE_NUMBA else ("numpy",)


def _impl(backend):
    backend = backend or DEFAULT_BACKEND
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is not importable")
        return _numba
    if backend == "numpy":
        return _numpy
    raise ValueError(f"unknown backend {backend!r}")


def set_threads(n):
    """Set the numba worker count (no-op for the numpy backend).

    Requests above the pool size (``NUMBA_NUM_THREADS``, normally the core
    count) are clamped; results do not depend on the count anyway.
    Returns the count in effect.
    """
    if not HAVE_NUMBA:
        return 1
    import numba
    if n:
        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))
    return numba.get_num_threads()


def uniforms(key0, key1, stream, tag, start, n, backend=None):
    return _impl(backend).uniforms(np.uint64(key0), np.uint64(key1), np.uint64(stream),
                                   np.uint64(tag), int(start), int(n))


def phase_sums(family, p1, p2, dcut, process, param, times, key0, key1, tag, n,
               chunk=CHUNK, backend=None):
    """Ensemble sums of cos/sin of the accumulated phase on ``times``.

    Returns ``(sums, coll)`` with ``sums`` of shape (5, K) holding
    sum cos, sum sin, sum cos^2, sum sin^2, sum cos*sin, and ``coll`` the sum
    and sum of squares of per-particle reset counts.
    """
    return _impl(backend).phase_sums(
        int(family), float(p1), float(p2), float(dcut), int(process), float(param),
        np.ascontiguousarray(times, dtype=np.float64), np.uint64(key0), np.uint64(key1),
        np.uint64(tag), int(n), int(chunk))


def conditional_sums(process, param, times, x0, dx, ytab, key0, key1, tag, n,
                     chunk=CHUNK, backend=None):
    """Ensemble sums of the schedule-conditional coherence prod_j R0(dt_j).

    Returns ``(sums, coll)`` with ``sums`` of shape (2, K): sum and sum of
    squares of the per-particle products.
    """
    return _impl(backend).conditional_sums(
        int(process), float(param), np.ascontiguousarray(times, dtype=np.float64),
        float(x0), float(dx), np.ascontiguousarray(ytab, dtype=np.float64),
        np.uint64(key0), np.uint64(key1), np.uint64(tag), int(n), int(chunk))
