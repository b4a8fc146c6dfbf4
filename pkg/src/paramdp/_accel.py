"""Numba acceleration switch.

Hot numeric kernels (the backward DP sweep and the simplex pivot loop) exist
in two flavours: a numba-compiled one and a pure-numpy one.  The environment
variable ``PARAMDP_NUMBA`` selects the path: set it to ``0``/``off`` to force
the numpy fallback.  When numba is not importable the fallback is used
silently.
"""

import os

_flag = os.environ.get("PARAMDP_NUMBA", "1").strip().lower()
NUMBA_REQUESTED = _flag not in ("0", "false", "off", "no")

try:
    if not NUMBA_REQUESTED:
        raise ImportError
    from numba import njit

    NUMBA_ENABLED = True
except ImportError:  # pragma: no cover - depends on environment
    NUMBA_ENABLED = False

    def njit(*args, **kwargs):
        """Identity decorator used when numba is disabled or missing."""
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


def jit_or_python(func):
    """Compile ``func`` with numba when enabled, else return it unchanged."""
    if NUMBA_ENABLED:
        return njit(cache=True)(func)
    return func
