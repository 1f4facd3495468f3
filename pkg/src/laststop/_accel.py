"""Switch between numba-compiled kernels and their pure-numpy twins.

Set ``LASTSTOP_DISABLE_NUMBA=1`` to force the numpy path (useful for
debugging and for the kernel benchmark). If numba cannot be imported the
numpy path is used automatically.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency
    numba = None

_disabled = os.environ.get("LASTSTOP_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

USE_NUMBA = numba is not None and not _disabled


def njit(*args, **kwargs):
    """``numba.njit`` with caching on; a no-op decorator when numba is absent."""
    kwargs.setdefault("cache", True)
    if numba is None:
        if len(args) == 1 and callable(args[0]):
            return args[0]
        return lambda f: f
    return numba.njit(*args, **kwargs)


def select(numba_impl, numpy_impl):
    """Pick the implementation the current process should run."""
    return numba_impl if USE_NUMBA else numpy_impl


def thread_cap():
    """Worker count for replicate-parallel loops (``LASTSTOP_THREADS``)."""
    raw = os.environ.get("LASTSTOP_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = os.cpu_count() or 1
    return max(1, n)
