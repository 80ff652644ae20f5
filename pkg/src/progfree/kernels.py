"""Kernel backend selection.

The compiled extension is used when importable; set ``PROGFREE_PURE=1`` to
force the pure-Python fallback.
"""

from __future__ import annotations

import os

from . import _pykernels

if os.environ.get("PROGFREE_PURE") == "1":
    _impl = _pykernels
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND: str = _impl.BACKEND
mis3_search = _impl.mis3_search
gf2_reduce_rows = _impl.gf2_reduce_rows

__all__ = ["BACKEND", "mis3_search", "gf2_reduce_rows", "_pykernels"]
