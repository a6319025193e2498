"""Selects the evolution kernel at import time.

The compiled Cython kernel is preferred when importable; the pure-Python
kernel is the fallback.  Both are draw-for-draw equivalent, so the choice
never changes simulation output, only speed.  Set ECOSIM_BACKEND=pure or
ECOSIM_BACKEND=compiled to force one (forcing `compiled` raises if the
extension is missing).
"""

from __future__ import annotations

import os

_requested = os.environ.get("ECOSIM_BACKEND", "auto").strip().lower()

if _requested in ("auto", ""):
    try:
        from . import _evolve_c as _impl
        BACKEND_NAME = "compiled"
    except ImportError:
        from . import _evolve_py as _impl
        BACKEND_NAME = "pure"
elif _requested in ("compiled", "c"):
    from . import _evolve_c as _impl
    BACKEND_NAME = "compiled"
elif _requested in ("pure", "python", "py"):
    from . import _evolve_py as _impl
    BACKEND_NAME = "pure"
else:
    raise ImportError(
        f"ECOSIM_BACKEND={_requested!r} not recognised "
        "(use 'auto', 'compiled' or 'pure')")

kernel_ga_run = _impl.ga_run
