"""Optional numba acceleration.

Set ``LEVYREC_DISABLE_NUMBA=1`` before import to run every kernel through
its pure-numpy path.  ``LEVYREC_THREADS`` caps the numba thread pool.
"""
import os
import warnings

# an old system TBB only disables that threading layer; numba falls back to another
warnings.filterwarnings("ignore", message="The TBB threading layer")

_DISABLED = os.environ.get("LEVYREC_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if _DISABLED:
        raise ImportError
    import numba
    from numba import njit, prange

    NUMBA_ENABLED = True
except ImportError:
    numba = None
    NUMBA_ENABLED = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f

    prange = range


def optional_njit(*args, **kwargs):
    """njit when numba is usable, identity otherwise.  Usable bare or with options."""
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return optional_njit()(args[0])
    kwargs.setdefault("cache", True)

    def decorator(func):
        if NUMBA_ENABLED:
            return njit(*args, **kwargs)(func)
        return func

    return decorator


def configure_threads(n=None):
    """Apply a thread count from ``n`` or ``LEVYREC_THREADS``; returns the count in effect."""
    if n is None:
        raw = os.environ.get("LEVYREC_THREADS")
        n = int(raw) if raw else None
    if not NUMBA_ENABLED:
        return 1
    if n is not None:
        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))
    return numba.get_num_threads()


def backend_name():
    return "numba" if NUMBA_ENABLED else "numpy"
