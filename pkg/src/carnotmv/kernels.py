"""Backend selection for the bisection kernels.

Prefers the compiled extension, falls back to numpy.  CARNOTMV_FORCE_PY=1
forces the fallback (used by the benchmark and the backend-parity tests).
Both backends expose: ``mu_p_bisect``, ``mu_p_bisect_rows``, ``f_residual``.
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels  # type: ignore[attr-defined]
except ImportError:  # pragma: no cover - depends on build environment
    _kernels = None

if _kernels is not None and os.environ.get("CARNOTMV_FORCE_PY") != "1":
    _impl = _kernels
else:
    _impl = _kernels_py

BACKEND: str = _impl.BACKEND

mu_p_bisect = _impl.mu_p_bisect
mu_p_bisect_rows = _impl.mu_p_bisect_rows
f_residual = _impl.f_residual


def available_backends() -> dict:
    """Map backend name -> module, for benchmarks and parity tests."""
    out = {"python": _kernels_py}
    if _kernels is not None:
        out["cython"] = _kernels
    return out
