"""Kernel backend selection.

Hot quadrature loops ship in two flavours: numba-compiled scalar loops and
vectorised pure-numpy equivalents.  Numba is used when it imports cleanly and
``PRIORCUBE_DISABLE_NUMBA`` is unset (or ``0``/``false``).
"""
import os

_FLAG = os.environ.get("PRIORCUBE_DISABLE_NUMBA", "0").strip().lower()

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and _FLAG in ("", "0", "false", "no")


def njit(fn):
    """Compile ``fn`` with numba when available, otherwise return it unchanged."""
    if HAS_NUMBA:
        return numba.njit(cache=True, fastmath=False)(fn)
    return fn


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
