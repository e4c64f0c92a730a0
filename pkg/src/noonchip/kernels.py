"""Hot numeric kernels with backend selection at import time.

The compiled Cython extension is preferred; the pure numpy fallback is used
when the extension has not been built or NOONCHIP_PURE_PYTHON is set.  Both
implement the same Gray-code Ryser recursion, so results agree to rounding.
"""

from __future__ import annotations

import os

import numpy as np

if os.environ.get("NOONCHIP_PURE_PYTHON"):
    from . import _ryser_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _ryser as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        from . import _ryser_py as _impl

        BACKEND = "python"


def permanent(matrix: np.ndarray) -> complex:
    """Permanent of a square complex matrix via the selected backend."""
    a = np.ascontiguousarray(matrix, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return complex(_impl.permanent(a))
