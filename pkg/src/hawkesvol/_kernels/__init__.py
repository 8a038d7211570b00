"""Kernel backend selection.

The compiled Cython extension is preferred; the pure-Python module is the
fallback and the reference implementation. Set HAWKESVOL_PURE=1 to force the
fallback (used by the parity tests and the benchmark).
"""

import os

from hawkesvol._kernels import _pure

if os.environ.get("HAWKESVOL_PURE", "").strip() not in ("", "0"):
    backend = _pure
    BACKEND_NAME = "pure"
else:
    try:
        from hawkesvol._kernels import _compiled as backend
        BACKEND_NAME = "compiled"
    except ImportError:
        backend = _pure
        BACKEND_NAME = "pure"

MARK_CONSTANT = _pure.MARK_CONSTANT
MARK_EMPIRICAL = _pure.MARK_EMPIRICAL
MARK_GEOMETRIC = _pure.MARK_GEOMETRIC

__all__ = ["backend", "BACKEND_NAME", "MARK_CONSTANT", "MARK_EMPIRICAL", "MARK_GEOMETRIC", "_pure"]
