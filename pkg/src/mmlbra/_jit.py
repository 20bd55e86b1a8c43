"""Backend selection for the hot kernels.

Set ``MMLBRA_BACKEND=numpy`` to force the pure-numpy path (useful for
debugging or on platforms without numba). Any other value, or leaving it
unset, uses numba when it can be imported.
"""
import os

try:
    import numba
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

BACKEND = os.environ.get("MMLBRA_BACKEND", "numba").strip().lower()
USE_NUMBA = HAVE_NUMBA and BACKEND != "numpy"


def njit(func):
    """``numba.njit(cache=True)`` when numba is usable, identity otherwise."""
    if HAVE_NUMBA:
        return numba.njit(cache=True, nogil=True)(func)
    return func


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
