"""numba dispatch helpers.

Hot kernels are written twice: an @njit version and a pure-numpy fallback.
The active path is chosen once at import time. Set ROSENLAB_DISABLE_NUMBA=1
to force the numpy path (useful for debugging and for the benchmark baseline);
the fallback also engages automatically when numba is unavailable.
"""

import os

_DISABLED = os.environ.get("ROSENLAB_DISABLE_NUMBA", "").strip() not in ("", "0")

if not _DISABLED:
    try:
        from numba import njit, prange

        HAS_NUMBA = True
    except ImportError:  # pragma: no cover - exercised only without numba
        HAS_NUMBA = False
else:
    HAS_NUMBA = False

if not HAS_NUMBA:

    def njit(*args, **kwargs):
        # signature-compatible no-op decorator
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(fn):
            return fn

        return wrap

    prange = range


def using_numba():
    """True when the accelerated path is active."""
    return HAS_NUMBA
