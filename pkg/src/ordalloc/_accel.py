"""Optional numba acceleration.

Set ``ORDALLOC_DISABLE_NUMBA=1`` to force the pure-numpy kernels, e.g. when
debugging or on platforms without numba.
"""
import os

_FLAG = os.environ.get("ORDALLOC_DISABLE_NUMBA", "").strip().lower()
DISABLED = _FLAG in {"1", "true", "yes", "on"}

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and not DISABLED


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity decorator otherwise.

    The compiled kernels are always built when numba exists so that both
    paths stay testable; ``USE_NUMBA`` only picks which one the package calls.
    """
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f
