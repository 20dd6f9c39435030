"""Backend selection for the hot numeric kernels.

Every loop-heavy kernel in the package exists twice: a plain-loop version
that numba compiles with ``@njit`` and a pure-numpy path.  The active path is
chosen by the ``EQA_KERNEL_BACKEND`` environment variable (``numba`` or
``numpy``) at import time and can be switched at runtime with
:func:`set_backend`.  Both paths consume identical inputs, including any
pre-drawn random numbers, so they produce the same results.
"""

import os
import warnings

try:
    from numba import njit as _njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

_VALID = ("numba", "numpy")
_backend = os.environ.get("EQA_KERNEL_BACKEND", "numba").strip().lower()
if _backend not in _VALID:
    warnings.warn(f"unknown EQA_KERNEL_BACKEND={_backend!r}; using numpy", stacklevel=1)
    _backend = "numpy"
if _backend == "numba" and not HAVE_NUMBA:  # pragma: no cover
    _backend = "numpy"


def jit(fn):
    """Compile ``fn`` with numba when available, else return it unchanged."""
    if not HAVE_NUMBA:  # pragma: no cover
        return fn
    return _njit(cache=True, nogil=True)(fn)


def backend() -> str:
    return _backend


def use_numba() -> bool:
    return _backend == "numba"


def set_backend(name: str) -> str:
    """Switch the active backend; returns the previous one."""
    global _backend
    name = name.strip().lower()
    if name not in _VALID:
        raise ValueError(f"backend must be one of {_VALID}, got {name!r}")
    if name == "numba" and not HAVE_NUMBA:  # pragma: no cover
        raise RuntimeError("numba is not installed")
    prev, _backend = _backend, name
    return prev
