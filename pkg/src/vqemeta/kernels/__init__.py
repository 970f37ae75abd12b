"""Kernel backend registry.

Two interchangeable backends provide the hot numeric kernels: a jitted
numba backend (default) and a vectorized pure-numpy fallback. Selection:

* ``VQEMETA_BACKEND=numba`` / ``numpy`` pins a backend at import time
  (``numba`` raises if numba cannot be imported);
* unset or ``auto`` prefers numba and silently falls back to numpy;
* :func:`use_backend` switches at runtime (used by tests and benchmarks).
"""

from __future__ import annotations

import os

from . import numpy_backend

BACKEND_ENV = "VQEMETA_BACKEND"

OP_RY = numpy_backend.OP_RY
OP_RZ = numpy_backend.OP_RZ
OP_CNOT = numpy_backend.OP_CNOT
OP_PROT = numpy_backend.OP_PROT
OP_X = numpy_backend.OP_X

try:
    from . import numba_backend

    _HAVE_NUMBA = True
except ImportError:
    numba_backend = None
    _HAVE_NUMBA = False

_active = None
_active_name = ""


def available_backends() -> list[str]:
    return ["numba", "numpy"] if _HAVE_NUMBA else ["numpy"]


def use_backend(name: str):
    """Select the kernel backend by name ('numba', 'numpy', or 'auto')."""
    global _active, _active_name
    if name == "auto":
        name = "numba" if _HAVE_NUMBA else "numpy"
    if name == "numba":
        if not _HAVE_NUMBA:
            raise ValueError("numba backend requested but numba is not importable")
        _active = numba_backend
    elif name == "numpy":
        _active = numpy_backend
    else:
        raise ValueError(f"unknown backend {name!r}; expected 'numba', 'numpy', or 'auto'")
    _active_name = name
    return _active


def active_backend_name() -> str:
    return _active_name


def get():
    """The currently active backend module."""
    return _active


use_backend(os.environ.get(BACKEND_ENV, "auto"))
