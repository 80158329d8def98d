"""Kernel selection: compiled extension when importable, numpy otherwise.

Set ``MQSENSE_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
chi_block = _kernels_py.chi_block

if not os.environ.get("MQSENSE_PURE_PYTHON"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None
    if _compiled is not None:
        chi_block = _compiled.chi_block
        BACKEND = "cython"

python_chi_block = _kernels_py.chi_block

__all__ = ["BACKEND", "chi_block", "python_chi_block"]
