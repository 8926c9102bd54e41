"""Backend selection for the hot kernels.

The compiled extension is used when it imports; set ``SHAPEMINE_PURE_PYTHON=1``
to force the numpy fallback.  Both expose the same functions.
"""
import os

from shapemine import _pykernels

python = _pykernels
compiled = None

if not os.environ.get("SHAPEMINE_PURE_PYTHON"):
    try:
        from shapemine import _ckernels as compiled
    except ImportError:  # extension not built
        compiled = None

active = compiled if compiled is not None else python
BACKEND = "cython" if active is compiled else "python"


def get(name=None):
    """Return the kernel module named ``"cython"`` or ``"python"`` (default: active)."""
    if name is None:
        return active
    if name == "python":
        return python
    if name == "cython":
        if compiled is None:
            raise RuntimeError("compiled kernels are not available")
        return compiled
    raise ValueError(f"unknown backend {name!r}")
