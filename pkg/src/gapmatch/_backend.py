"""Pick the choice kernel at import time.

The compiled extension is preferred; set ``GAPMATCH_PURE_PYTHON=1`` to force
the pure-Python kernel.
"""
import os

from . import _pykernel

kernel = _pykernel
if not os.environ.get("GAPMATCH_PURE_PYTHON"):
    try:
        from . import _ckernel as kernel  # type: ignore[no-redef]
    except ImportError:  # extension not built
        kernel = _pykernel

BACKEND = kernel.BACKEND


def available_kernels() -> dict:
    out = {"python": _pykernel}
    try:
        from . import _ckernel

        out["cython"] = _ckernel
    except ImportError:
        pass
    return out
