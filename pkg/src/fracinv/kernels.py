"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy fallback
in :mod:`fracinv._kernels_py` is used. :func:`set_backend` switches at runtime
(tests and the benchmark exercise both).
"""

from __future__ import annotations

import logging
from types import ModuleType

import numpy as np

from fracinv import _kernels_py

log = logging.getLogger(__name__)

try:
    from fracinv import _kernels as _compiled  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - depends on the build
    _compiled = None

_active: ModuleType = _compiled if _compiled is not None else _kernels_py


def compiled_available() -> bool:
    return _compiled is not None


def backend() -> str:
    return "compiled" if _active is _compiled else "python"


def set_backend(name: str) -> None:
    global _active
    if name == "python":
        _active = _kernels_py
    elif name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built")
        _active = _compiled
    else:
        raise ValueError(f"unknown backend {name!r}")
    log.debug("kernel backend set to %s", name)


def ml_cut_integral(alpha, beta, x):
    return _active.ml_cut_integral(alpha, beta, x)


def _owned(a):
    # the compiled kernels need writable contiguous buffers
    return None if a is None else np.array(a, dtype=np.float64, order="C", copy=True)


def l1_solve_uniform(c, lam, u0, f=None):
    return _active.l1_solve_uniform(_owned(c), _owned(lam), _owned(u0), _owned(f))


def l1_solve_dense(b, lam, u0, f=None):
    b = np.ascontiguousarray(b, dtype=np.float64)
    if not b.flags.writeable:
        b = b.copy()
    return _active.l1_solve_dense(b, _owned(lam), _owned(u0), _owned(f))
