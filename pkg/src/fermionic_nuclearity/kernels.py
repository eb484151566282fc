"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy versions.
Set ``FERMIONIC_NUCLEARITY_PURE=1`` to force the fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"

if os.environ.get("FERMIONIC_NUCLEARITY_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
else:
    _impl = _kernels_py

creation_matrix = _impl.creation_matrix
apply_creation = _impl.apply_creation
sector_minors = _impl.sector_minors
subset_product_sum = _impl.subset_product_sum

__all__ = [
    "BACKEND",
    "creation_matrix",
    "apply_creation",
    "sector_minors",
    "subset_product_sum",
]
