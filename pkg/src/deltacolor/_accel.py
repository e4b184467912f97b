"""Backend selection for the per-round kernels.

``DELTACOLOR_BACKEND=numpy`` forces the vectorized numpy kernels; the default
uses numba when it imports cleanly.
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAS_NUMBA = numba is not None


def default_backend() -> str:
    name = os.environ.get("DELTACOLOR_BACKEND", "numba").strip().lower()
    if name not in ("numba", "numpy"):
        raise ValueError(f"DELTACOLOR_BACKEND must be 'numba' or 'numpy', got {name!r}")
    if name == "numba" and not HAS_NUMBA:
        return "numpy"
    return name


def njit(fn):
    if numba is None:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)
