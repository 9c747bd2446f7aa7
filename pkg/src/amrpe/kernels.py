"""Kernel dispatch: compiled extension when importable, numpy otherwise.

Set ``AMRPE_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _fallback

BACKEND = "python"
if os.environ.get("AMRPE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from ._ext import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None
    else:
        BACKEND = "cython"
else:
    _compiled = None

_impl = _compiled if _compiled is not None else _fallback

magnetic_laplacian = _impl.magnetic_laplacian
gauge_fix = _impl.gauge_fix


def compiled_available() -> bool:
    return _compiled is not None
