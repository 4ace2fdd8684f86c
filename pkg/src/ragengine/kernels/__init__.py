"""Scoring kernels with backend selection at import time.

The compiled Cython extension is used when present; otherwise (or when
``RAGENGINE_PURE_PYTHON=1`` is set) the NumPy fallback takes over. Both
expose the same two functions; ``benchmarks/bench_kernels.py`` compares
them head to head.
"""

from __future__ import annotations

import os

from . import fallback

if os.environ.get("RAGENGINE_PURE_PYTHON") == "1":
    _native = None
else:
    try:
        from . import _native  # type: ignore[no-redef]
    except ImportError:
        _native = None

_impl = _native if _native is not None else fallback

BACKEND: str = "native" if _native is not None else "python"

cosine_scores = _impl.cosine_scores
bm25_accumulate = _impl.bm25_accumulate


def get_backend() -> str:
    """Name of the active backend: 'native' or 'python'."""
    return BACKEND


def available_backends() -> dict:
    """Importable backends, keyed by name."""
    found = {"python": fallback}
    if _native is not None:
        found["native"] = _native
    return found
