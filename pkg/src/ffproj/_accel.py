"""Optional numba acceleration.

Set ``FFPROJ_DISABLE_NUMBA=1`` to force the pure-numpy code paths, e.g. for
debugging or for benchmarking the two backends against each other.
"""
import os

_FLAG = os.environ.get("FFPROJ_DISABLE_NUMBA", "").strip().lower()
DISABLED = _FLAG not in ("", "0", "false", "no")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None and not DISABLED


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise an identity decorator."""
    if numba is not None:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f
