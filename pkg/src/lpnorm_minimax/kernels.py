"""Backend selection for the hot kernel loops.

The compiled extension is used when it was built; otherwise the NumPy
implementation is imported. Setting ``LPNORM_MINIMAX_PURE_PYTHON=1`` forces
the NumPy path.
"""
from __future__ import annotations

import os

from . import _pykernels

try:
    if os.environ.get("LPNORM_MINIMAX_PURE_PYTHON") == "1":
        raise ImportError("pure python requested")
    from . import _ckernels as _impl
    BACKEND = "cython"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"

kde_grid_1d = _impl.kde_grid_1d
kde_grid_2d = _impl.kde_grid_2d
pair_kernel_sum = _impl.pair_kernel_sum
bump = _pykernels.bump
BUMP_NORM = _pykernels.BUMP_NORM


def backends() -> dict:
    """Every importable backend by name."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
