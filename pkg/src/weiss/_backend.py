"""Selects the program evaluator: compiled extension if importable, else Python.

Set ``WEISS_PURE_PYTHON=1`` to force the fallback.
"""

import os
from contextlib import contextmanager

from . import _kernel_py

try:
    from . import _kernel as _native
except ImportError:  # extension not built
    _native = None

_KERNELS = {"python": _kernel_py.run_program}
if _native is not None:
    _KERNELS["cython"] = _native.run_program

_active = "python" if os.environ.get("WEISS_PURE_PYTHON") or _native is None else "cython"


def available() -> list:
    return sorted(_KERNELS)


def name() -> str:
    return _active


def run_program(*args):
    return _KERNELS[_active](*args)


def set_backend(backend: str) -> None:
    global _active
    if backend not in _KERNELS:
        raise ValueError(f"backend {backend!r} not available (have {available()})")
    _active = backend


@contextmanager
def using(backend: str):
    previous = _active
    set_backend(backend)
    try:
        yield
    finally:
        set_backend(previous)
