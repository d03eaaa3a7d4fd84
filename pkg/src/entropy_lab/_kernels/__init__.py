"""Kernel backend selection.

The compiled extension is used when available; otherwise the numpy
implementations take over. Set ENTROPY_LAB_KERNELS=numpy to force the
fallback (e.g. for the backend-comparison benchmark) or =compiled to fail
loudly when the extension is missing.
"""
import importlib
import os

from . import _numpy

_forced = os.environ.get("ENTROPY_LAB_KERNELS", "").lower()

compiled_backend = None
if _forced != "numpy":
    try:
        compiled_backend = importlib.import_module(__name__ + "._core")
    except ImportError:
        if _forced == "compiled":
            raise ImportError(
                "ENTROPY_LAB_KERNELS=compiled but the extension is not built"
            )

numpy_backend = _numpy
_impl = compiled_backend if compiled_backend is not None else _numpy

HAVE_COMPILED = compiled_backend is not None
BACKEND = "compiled" if compiled_backend is not None else "numpy"

viscous_step = _impl.viscous_step
eo_step = _impl.eo_step
euler_step = _impl.euler_step
