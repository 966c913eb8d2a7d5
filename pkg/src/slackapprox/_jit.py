"""Optional numba acceleration.

Kernels are written once in numba-compatible numpy. When numba is present
and ``SLACKAPPROX_NUMBA`` is not set to ``0``, they are compiled with
``@njit``; otherwise the very same functions run as plain numpy code.
"""
import os

_flag = os.environ.get("SLACKAPPROX_NUMBA", "1").strip().lower()
_wanted = _flag not in ("0", "false", "no", "off")

try:
    if not _wanted:
        raise ImportError
    from numba import njit as _njit

    NUMBA_ENABLED = True
except ImportError:
    _njit = None
    NUMBA_ENABLED = False


def maybe_njit(fn):
    if NUMBA_ENABLED:
        return _njit(cache=True, nogil=True)(fn)
    return fn
