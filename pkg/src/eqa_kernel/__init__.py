"""Empirical quantum-advantage analysis of quantum kernels on expression data.

Set ``EQA_KERNEL_BACKEND=numpy`` to bypass the numba-compiled kernels.
"""

__version__ = "0.1.0"

from ._accel import backend, set_backend  # noqa: E402

__all__ = ["__version__", "backend", "set_backend"]
