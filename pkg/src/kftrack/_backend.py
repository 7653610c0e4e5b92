"""Kernel backend selection.

The compiled ``_kernels`` extension is used when it imports; otherwise the
numpy fallback in ``_pykernels`` is active. Set ``KFTRACK_BACKEND=python`` to
force the fallback, or call :func:`use` at runtime (tests and benchmarks).
"""
from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS: dict[str, ModuleType] = {"python": _pykernels}
if _compiled is not None:
    BACKENDS["cython"] = _compiled

kernels: ModuleType = _pykernels


def use(name: str) -> ModuleType:
    """Activate backend ``name`` ("cython" or "python") and return it."""
    global kernels
    try:
        kernels = BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} not available; have {sorted(BACKENDS)}") from None
    return kernels


def active() -> str:
    return kernels.NAME


_requested = os.environ.get("KFTRACK_BACKEND", "").strip().lower()
if _requested:
    use(_requested)
elif _compiled is not None:
    use("cython")
