"""Dual-implementation numeric core.

The compiled extension (_core, Cython) and the pure Python fallback
(_corepy, math.fsum) implement the same four reductions. Selection
happens once at import:

* DEPSERIES_BACKEND=python forces the fallback,
* DEPSERIES_BACKEND=compiled requires the extension (ImportError if absent),
* unset: compiled if available, else fallback.

BACKEND names the implementation in use. The public wrappers normalize
dtypes and layout so both backends see identical inputs.
"""

import os

import numpy as np

from . import _corepy

_requested = os.environ.get("DEPSERIES_BACKEND")
if _requested not in (None, "", "compiled", "python"):
    raise ImportError(f"unknown DEPSERIES_BACKEND value {_requested!r}")

if _requested == "python":
    _impl = _corepy
    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        _impl = _corepy
        BACKEND = "python"


def backend_module(name=None):
    """Return a backend module by name ("compiled" | "python"), default the active one."""
    if name in (None, BACKEND):
        return _impl
    if name == "python":
        return _corepy
    if name == "compiled":
        from . import _core  # raises ImportError when not built

        return _core
    raise ValueError(f"unknown backend {name!r}")


def _f64(x):
    return np.ascontiguousarray(x, dtype=np.float64)


def _c128(x):
    return np.ascontiguousarray(x, dtype=np.complex128)


def _i64(x):
    return np.ascontiguousarray(x, dtype=np.int64)


def comp_sum(x):
    """Compensated sum of a float64 vector."""
    return _impl.comp_sum(_f64(x))


def bilinear_dense(u, g):
    """Full-grid bilinear form sum_{i,j} u[i] u[j] g[i, j]."""
    return _impl.bilinear_dense(_f64(u), _f64(g))


def bilinear_lagged(u, glag, idx):
    """Bilinear form with stationary weights g[i, j] = glag[|idx[i] - idx[j]|]."""
    return _impl.bilinear_lagged(_f64(u), _f64(glag), _i64(idx))


def trig_partial_sums(a0, apos, aneg, ts, ms):
    """Two-sided trigonometric partial sums at points ts and marks ms."""
    return _impl.trig_partial_sums(complex(a0), _c128(apos), _c128(aneg), _f64(ts), _i64(ms))
