"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
numpy implementation in ``_pykernels`` takes over.  ``SPD_BACKEND=python``
forces the fallback, ``SPD_BACKEND=cython`` makes a missing extension an error.
"""

from __future__ import annotations

import contextlib
import importlib
import logging
import os
from types import ModuleType

log = logging.getLogger(__name__)

_NAMES = {"cython": "spd._ckernels", "python": "spd._pykernels"}


def load(name: str) -> ModuleType:
    try:
        return importlib.import_module(_NAMES[name])
    except KeyError:
        raise ValueError(f"unknown backend {name!r}; choose from {sorted(_NAMES)}") from None


def available() -> list[str]:
    out = []
    for name in _NAMES:
        try:
            load(name)
        except ImportError:
            continue
        out.append(name)
    return out


def _initial() -> ModuleType:
    choice = os.environ.get("SPD_BACKEND", "auto").lower()
    if choice == "auto":
        try:
            return load("cython")
        except ImportError:
            log.warning("compiled kernels unavailable; using the numpy fallback")
            return load("python")
    return load(choice)


_active = _initial()


def active() -> ModuleType:
    return _active


def backend_name() -> str:
    return _active.BACKEND


def set_backend(name: str) -> None:
    global _active
    _active = load(name)


@contextlib.contextmanager
def use(name: str):
    """Temporarily switch backend (tests and benchmarks)."""
    global _active
    prev = _active
    _active = load(name)
    try:
        yield _active
    finally:
        _active = prev
