"""Pure-numpy fallback for the bisection kernels.

Mirrors the semantics of the compiled ``_kernels`` extension; selected at
import time by ``carnotmv.kernels`` when the extension is unavailable or
CARNOTMV_FORCE_PY=1.  Sums rely on numpy's pairwise reduction, which keeps
the rounding error at O(eps * log n) — adequate for the 1e-10 residual
contract the callers enforce.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def f_residual(values, weights, p, lam):
    """F(lam) = sum_i w_i * sign(u_i - lam) * |u_i - lam|^(p-1); decreasing in lam."""
    d = np.asarray(values, dtype=float) - lam
    pm1 = p - 1.0
    return float(np.sum(np.asarray(weights, dtype=float) * np.sign(d) * np.abs(d) ** pm1))


def mu_p_bisect(values, weights, p, tol=1e-12, max_iter=200):
    """Root of F on [min(values), max(values)] by bisection."""
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    lo = float(values.min())
    hi = float(values.max())
    if lo == hi:
        return lo
    pm1 = p - 1.0
    for _ in range(int(max_iter)):
        mid = 0.5 * (lo + hi)
        d = values - mid
        f = float(np.sum(weights * np.sign(d) * np.abs(d) ** pm1))
        if f > 0.0:
            lo = mid
        elif f < 0.0:
            hi = mid
        else:
            return mid
        if hi - lo <= tol * max(1.0, abs(lo), abs(hi)):
            break
    return 0.5 * (lo + hi)


def mu_p_bisect_rows(values, weights, p, tol=1e-12, max_iter=200):
    """Row-wise bisection over a (rows, n) value matrix; returns (rows,)."""
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    lo = values.min(axis=1)
    hi = values.max(axis=1)
    pm1 = p - 1.0
    for _ in range(int(max_iter)):
        scale = np.maximum(1.0, np.maximum(np.abs(lo), np.abs(hi)))
        if np.all(hi - lo <= tol * scale):
            break
        mid = 0.5 * (lo + hi)
        d = values - mid[:, None]
        f = np.sum(weights * np.sign(d) * np.abs(d) ** pm1, axis=1)
        pos = f > 0.0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
    return 0.5 * (lo + hi)
