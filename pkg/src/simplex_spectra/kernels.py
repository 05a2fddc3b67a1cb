"""Backend selection for the hot loops.

The compiled extension ``_kernels`` is used when importable; setting
``SIMPLEX_SPECTRA_PURE=1`` forces the pure-Python reference implementation.
"""
import os

from . import _pykernels

if os.environ.get("SIMPLEX_SPECTRA_PURE", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl

        BACKEND = "compiled"
    except ImportError:  # extension not built
        _impl = _pykernels
        BACKEND = "python"

euler_block = _impl.euler_block
gem_matrices = _impl.gem_matrices
