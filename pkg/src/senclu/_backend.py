"""Kernel backend selection: compiled extension when available, numpy otherwise.

The active backend can be forced with the SENCLU_BACKEND environment variable
("cython" or "python") or per call via the ``backend=`` keyword on fit().
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels as _kernels_ext
except ImportError:
    _kernels_ext = None


def available_backends() -> list[str]:
    names = []
    if _kernels_ext is not None:
        names.append("cython")
    names.append("python")
    return names


def get_backend(name: str | None = None):
    """Resolve a backend module by name; None defers to SENCLU_BACKEND, then auto."""
    if name is None:
        name = os.environ.get("SENCLU_BACKEND", "auto")
    if name == "auto":
        return _kernels_ext if _kernels_ext is not None else _kernels_py
    if name == "cython":
        if _kernels_ext is None:
            raise RuntimeError("compiled kernels are not available; rebuild the extension")
        return _kernels_ext
    if name == "python":
        return _kernels_py
    raise ValueError(f"unknown backend {name!r}; expected 'auto', 'cython', or 'python'")
