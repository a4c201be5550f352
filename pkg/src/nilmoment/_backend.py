"""Numba switch.

Set ``NILMOMENT_DISABLE_NUMBA=1`` to run the pure-numpy kernels instead of the
compiled ones. The flag is read once, at import time.
"""
import os

try:
    import numba
    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover
    numba = None
    NUMBA_AVAILABLE = False

_disabled = os.environ.get("NILMOMENT_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

USE_NUMBA = NUMBA_AVAILABLE and not _disabled


def njit(func):
    """Compile ``func`` in nopython mode when numba is usable, else return it unchanged."""
    if NUMBA_AVAILABLE:
        return numba.njit(cache=True)(func)
    return func  # pragma: no cover
