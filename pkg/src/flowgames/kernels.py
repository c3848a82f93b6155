"""Kernel backend selection: compiled extension when available, pure Python otherwise.

Set ``FLOWGAMES_PURE_PYTHON=1`` to force the fallback (used by the benchmark
and the backend-parity tests). The compiled kernels pack subjects into a
64-bit word, so games with more than 64 producers always use the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

MAX_COMPILED_SUBJECTS = 64

_force_pure = os.environ.get("FLOWGAMES_PURE_PYTHON", "") not in ("", "0")

_speedups = None
if not _force_pure:
    try:
        from . import _speedups  # type: ignore[attr-defined]
    except ImportError:
        _speedups = None

BACKEND = "cython" if _speedups is not None else "python"


def impl_for(p: int):
    """Return the kernel module to use for a game with p producers."""
    if _speedups is not None and p <= MAX_COMPILED_SUBJECTS:
        return _speedups
    return _kernels_py
