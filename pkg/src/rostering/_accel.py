"""JIT switch for the hot kernels.

Kernels are written twice: a loop form compiled with numba and a vectorised
numpy form. ``ROSTERING_DISABLE_NUMBA=1`` (or a missing numba install) routes
every call to the numpy form.
"""
import os

_FLAG = os.environ.get("ROSTERING_DISABLE_NUMBA", "").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = numba is not None and _FLAG not in ("1", "true", "yes", "on")


def njit(func):
    """Compile ``func`` in nopython/nogil mode when numba is active."""
    if numba is None:
        return func
    return numba.njit(nogil=True, cache=True)(func)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
