"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise the pure-Python
twins in :mod:`stepsize_lab._fallback` take over. Set
``STEPSIZE_LAB_PURE=1`` to force the fallback.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _fallback


def _load() -> tuple[ModuleType, str]:
    if os.environ.get("STEPSIZE_LAB_PURE", "") not in ("", "0"):
        return _fallback, "python"
    try:
        from . import _kernels
    except ImportError:
        return _fallback, "python"
    return _kernels, "compiled"


_impl, BACKEND = _load()

optimal_plan = _impl.optimal_plan
affine_recurrence = _impl.affine_recurrence
rational_decay = _impl.rational_decay
quadratic_block = _impl.quadratic_block
logreg_block = _impl.logreg_block


def backends() -> dict[str, ModuleType]:
    """All importable backends keyed by name, for cross-checks and benchmarks."""
    found: dict[str, ModuleType] = {"python": _fallback}
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        found["compiled"] = _kernels
    return found
