"""Backend selection for the hot profile kernels.

``PRESCRIBED_AREA_BACKEND=numpy`` forces the pure-numpy path; the default
``numba`` compiles the kernels with ``numba.njit`` when numba is importable.
"""
import os

_requested = os.environ.get("PRESCRIBED_AREA_BACKEND", "numba").strip().lower()

try:
    if _requested == "numpy":
        raise ImportError
    import numba
except ImportError:
    numba = None

BACKEND = "numba" if numba is not None else "numpy"


def jit(fn):
    """Compile ``fn`` with numba when enabled, otherwise return it unchanged."""
    if numba is None:
        return fn
    return numba.njit(cache=True, error_model="numpy")(fn)


def vectorize(signatures):
    """Compile a scalar function into a cached numpy ufunc (numba backend only)."""
    def deco(fn):
        return numba.vectorize(signatures, cache=True)(getattr(fn, "py_func", fn))
    return deco
