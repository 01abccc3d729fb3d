"""Kernel backend selection.

The compiled Cython kernels are preferred when importable; the numpy
fallback produces bit-identical results. Set STAGEAUDIT_BACKEND=py (or =c)
to force a backend; forcing `c` raises if the extension is unavailable.
"""

import os

_forced = os.environ.get("STAGEAUDIT_BACKEND")

if _forced == "py":
    from . import kernels_py as _impl
    BACKEND = "py"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "c"
    except ImportError:
        if _forced == "c":
            raise
        from . import kernels_py as _impl
        BACKEND = "py"

split_scan = _impl.split_scan
pairwise_sq_dists = _impl.pairwise_sq_dists

__all__ = ["BACKEND", "split_scan", "pairwise_sq_dists"]
