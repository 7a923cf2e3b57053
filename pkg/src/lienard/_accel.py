"""Optional numba acceleration.

Set ``LIENARD_NO_NUMBA=1`` to run every kernel as plain Python/numpy.
"""

import os

DISABLED = os.environ.get("LIENARD_NO_NUMBA", "").strip().lower() not in ("", "0", "false", "no")

try:
    if DISABLED:
        raise ImportError
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    numba = None
    HAVE_NUMBA = False


def njit(fn):
    if HAVE_NUMBA:
        return numba.njit(cache=True)(fn)
    return fn


def pure(fn):
    """The uncompiled Python function behind a kernel."""
    return getattr(fn, "py_func", fn)


def backend() -> str:
    return "numba" if HAVE_NUMBA else "python"
