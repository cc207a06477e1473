"""Generalized L^p medians of weighted samples.

mu_p of a weighted sample is the unique minimizer of the weighted p-norm
||u - lam||_p over scalars lam:

* p = 2       -> weighted mean,
* p = inf     -> midrange (min+max)/2, weights immaterial,
* p = 1       -> weighted median, smallest-minimizer convention,
* 1 < p < inf -> unique root of the strictly decreasing
                 F(lam) = sum_i w_i |u_i - lam|^(p-2) (u_i - lam),
                 found by bisection on [min u, max u].

Bisection rather than Newton: F has unbounded slope at data points for
p < 2 and vanishing slope for large p, while bisection converges
unconditionally.  The terms are evaluated as sign(d)|d|^(p-1), which is
continuous at d = 0 for every p > 1 and encodes the zero-integrand
convention at coincident values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .ballquad import QuadratureSpec, sample_unit_ball
from .errors import DomainError
from .groups import GroupModel, GroupPoint

__all__ = ["MedianConfig", "mu_p_samples", "mu_p_ball", "characterization_residual"]


@dataclass(frozen=True)
class MedianConfig:
    """Order p plus bisection controls."""

    p: float = 2.0
    tol_lambda: float = 1e-12
    max_bisect: int = 200

    def __post_init__(self):
        if not (self.p >= 1.0):
            raise DomainError(f"p must lie in [1, inf], got {self.p}")
        if not self.tol_lambda > 0:
            raise DomainError("tol_lambda must be positive")
        if self.max_bisect < 1:
            raise DomainError("max_bisect must be at least 1")


def _clean_samples(values, weights):
    values = np.ascontiguousarray(values, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise DomainError("values must be a nonempty 1-D sample")
    if not np.all(np.isfinite(values)):
        raise DomainError("values must be finite")
    if weights is None:
        weights = np.ones_like(values)
    else:
        weights = np.ascontiguousarray(weights, dtype=float)
        if weights.shape != values.shape:
            raise DomainError("weights must match values in shape")
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
            raise DomainError("weights must be positive and finite")
    return values, weights


def _weighted_median_low(values, weights):
    """Smallest minimizer of sum w|u - lam|: first order statistic with
    cumulative weight >= half the total."""
    order = np.argsort(values, kind="stable")
    cum = np.cumsum(weights[order])
    idx = int(np.searchsorted(cum, 0.5 * cum[-1]))
    return float(values[order[idx]])


def mu_p_samples(values, weights=None, cfg: MedianConfig | None = None) -> float:
    """Generalized median of a weighted sample; always lies in [min u, max u]."""
    cfg = cfg or MedianConfig()
    values, weights = _clean_samples(values, weights)
    if math.isinf(cfg.p):
        return 0.5 * (float(values.min()) + float(values.max()))
    if cfg.p == 2.0:
        return float(np.average(values, weights=weights))
    if cfg.p == 1.0:
        return _weighted_median_low(values, weights)
    return float(kernels.mu_p_bisect(values, weights, cfg.p, cfg.tol_lambda, cfg.max_bisect))


def characterization_residual(values, weights, mu: float, p: float) -> float:
    """F(mu) for 1 < p < inf; |F(mu)| <= ~1e-10 of the term scale at the root."""
    if not 1.0 < p < math.inf:
        raise DomainError("the characterization applies for 1 < p < inf")
    values, weights = _clean_samples(values, weights)
    return float(kernels.f_residual(values, weights, p, mu))


def mu_p_ball(
    g: GroupModel,
    u,
    x,
    eps: float,
    p: float,
    spec: QuadratureSpec,
    cfg: MedianConfig | None = None,
) -> float:
    """mu_p(eps, u)(x) over the pseudoball B(x, eps), by unit-ball reduction.

    One unit-ball cloud is drawn, pushed forward through y = x . delta_eps(z)
    (which preserves uniformity up to the constant eps^Q Jacobian), and u is
    evaluated on it; ``u`` must accept (..., m) coordinate arrays.
    """
    if not eps > 0:
        raise DomainError(f"ball radius must be positive, got {eps}")
    if cfg is None:
        cfg = MedianConfig(p=p)
    elif cfg.p != p:
        cfg = MedianConfig(p=p, tol_lambda=cfg.tol_lambda, max_bisect=cfg.max_bisect)
    coords = x.coords if isinstance(x, GroupPoint) else g.strat.check_coords(x)
    cloud = sample_unit_ball(g.strat, spec)
    if cloud.points.shape[0] == 0:
        raise DomainError("sample cloud is empty; increase n_samples")
    points = g.multiply(coords, g.dilate(eps, cloud.points))
    return mu_p_samples(np.asarray(u(points), dtype=float), cloud.weights, cfg)
