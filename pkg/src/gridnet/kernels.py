"""Backend selection for the label-space kernels.

The compiled extension is used when it imports cleanly; set
``GRIDNET_PURE_PYTHON=1`` to force the NumPy fallback.
"""
import os

from . import _pykernels

BACKEND = "python"

if os.environ.get("GRIDNET_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels
    else:
        BACKEND = "cython"
else:
    _impl = _pykernels

measure_x = _impl.measure_x
fuse = _impl.fuse
fuse_images = _impl.fuse_images
drop_images = _impl.drop_images
bell_from_images = _impl.bell_from_images
swap_round = _impl.swap_round

__all__ = ["BACKEND", "measure_x", "fuse", "fuse_images", "drop_images", "bell_from_images", "swap_round"]
