"""Selects the compiled Numerov kernel when available.

``BACKEND`` is ``"cython"`` or ``"python"``.  Setting the environment
variable ``STOKES_WKB_PURE_PYTHON=1`` forces the fallback.
"""

from __future__ import annotations

import os

import numpy as np

from . import _numerov_py

if os.environ.get("STOKES_WKB_PURE_PYTHON") == "1":
    _compiled = None
else:
    try:
        from . import _numerov as _compiled
    except ImportError:
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"


def numerov_shoot(f, h, start, stop, p0, p1, backend: str | None = None):
    """Dispatch to the selected kernel; see ``_numerov_py.numerov_shoot``."""
    use = backend or BACKEND
    if use == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernel not built")
        return _compiled.numerov_shoot(np.ascontiguousarray(f, dtype=float), float(h), int(start), int(stop),
                                       float(p0), float(p1))
    return _numerov_py.numerov_shoot(f, float(h), int(start), int(stop), float(p0), float(p1))
