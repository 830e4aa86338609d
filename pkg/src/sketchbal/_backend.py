"""Kernel backend selection.

Hot loops live in :mod:`sketchbal.kernels` in two flavours: numba ``@njit``
kernels and pure-numpy equivalents. The numba path is used when numba imports
cleanly and ``SKETCHBAL_NO_NUMBA`` is unset (or ``0``). Set
``SKETCHBAL_NO_NUMBA=1`` to force the numpy path, e.g. for debugging or on
platforms without a numba wheel.

The flag is read once, at import time.
"""

import os

_FLAG = os.environ.get("SKETCHBAL_NO_NUMBA", "").strip().lower()
_DISABLED = _FLAG not in ("", "0", "false", "no")

try:
    if _DISABLED:
        raise ImportError("numba disabled by SKETCHBAL_NO_NUMBA")
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        # bare decorator or decorator factory, both as no-ops
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f


BACKEND = "numba" if HAS_NUMBA else "numpy"
