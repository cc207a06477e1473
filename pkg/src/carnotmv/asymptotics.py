"""Quadratic models, the normalized p-Laplacian, and expansion sweeps.

The second-order behaviour of the generalized median over shrinking
pseudoballs is governed by the group-adapted quadratic

    q(y) = q(x) + <xi, (x^-1 y)^(1)> + <eta, (x^-1 y)^(2)>
                + (1/2) <A (x^-1 y)^(1), (x^-1 y)^(1)>,

for which  mu_p(eps, q)(x) - q(x) = coeff * eps^2 + o(eps^2)  with

    coeff = c(p, layers) * ( tr A + (p-2) <A xi, xi>/|xi|^2 ),   p finite,
    coeff = (1/2) <A xi, xi>/|xi|^2,                             p = inf.

``expansion_sweep`` measures that coefficient numerically: one unit-ball
cloud is reused across all radii eps_i = eps0 / 2^i (common random
numbers — the eps -> 0 limit of the sampled median is then exactly zero
thanks to the antithetic pairing, so the fit sees no spurious constant
or linear term), and (mu - q0)/eps^2 is regressed on [1, eps].  That is
a least-squares fit of the model a*eps^2 + b*eps^3 with 1/eps^4 weights;
the weighting equalizes the per-level noise and keeps the next-order
bias out of the reported a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ballquad import QuadratureSpec, sample_unit_ball
from .errors import DegenerateGradientError, DomainError
from .groups import GroupModel, GroupPoint, Stratification
from .median import MedianConfig, mu_p_samples
from .special import expansion_coefficient

__all__ = [
    "QuadraticModel",
    "SweepReport",
    "eval_quadratic",
    "quadratic_from_function",
    "normalized_p_laplacian",
    "expansion_sweep",
    "check_amvp",
]


@dataclass(frozen=True)
class QuadraticModel:
    """(q0, xi, eta, A) about a base point x."""

    strat: Stratification
    q0: float
    xi: np.ndarray
    A: np.ndarray
    eta: np.ndarray | None = None
    x: np.ndarray | None = None

    def __post_init__(self):
        v1 = self.strat.layer_dims[0]
        xi = np.asarray(self.xi, dtype=float)
        if xi.shape != (v1,):
            raise DomainError(f"xi must have length {v1}, got shape {xi.shape}")
        A = np.asarray(self.A, dtype=float)
        if A.shape != (v1, v1):
            raise DomainError(f"A must be {v1}x{v1}, got shape {A.shape}")
        if np.max(np.abs(A - A.T)) > 1e-14 * max(1.0, float(np.max(np.abs(A)))):
            raise DomainError("A must be symmetric")
        eta = self.eta
        if self.strat.step >= 2:
            v2 = self.strat.layer_dims[1]
            eta = np.zeros(v2) if eta is None else np.asarray(eta, dtype=float)
            if eta.shape != (v2,):
                raise DomainError(f"eta must have length {v2}, got shape {eta.shape}")
        elif eta is not None and np.size(eta):
            raise DomainError("eta must be absent for step-1 models")
        x = np.zeros(self.strat.total_dim) if self.x is None else self.strat.check_coords(self.x)
        if x.ndim != 1:
            raise DomainError("base point must be a single point")
        object.__setattr__(self, "xi", xi.copy())
        object.__setattr__(self, "A", 0.5 * (A + A.T))
        object.__setattr__(self, "eta", None if eta is None else eta.copy())
        object.__setattr__(self, "x", x.copy())


@dataclass
class SweepReport:
    """Fitted vs predicted eps^2 coefficient across a radius sweep."""

    p: float
    eps_list: np.ndarray
    mu_values: np.ndarray
    fitted_coeff: float
    predicted_coeff: float
    rel_error: float
    fit_residual: float

    def to_json_dict(self) -> dict:
        return {
            "p": "inf" if math.isinf(self.p) else self.p,
            "eps": list(map(float, self.eps_list)),
            "mu": list(map(float, self.mu_values)),
            "fitted": self.fitted_coeff,
            "predicted": self.predicted_coeff,
            "rel_error": None if math.isnan(self.rel_error) else self.rel_error,
            "fit_residual": self.fit_residual,
        }


def eval_quadratic(model: QuadraticModel, g: GroupModel, y):
    """Evaluate the quadratic at y (batched) using the group's own arithmetic."""
    if g.strat != model.strat:
        raise DomainError("model and group stratifications disagree")
    z = g.multiply(g.inverse(model.x), g.strat.check_coords(y))
    z1 = z[..., g.strat.layer_slice(1)]
    out = model.q0 + z1 @ model.xi + 0.5 * np.einsum("...i,ij,...j->...", z1, model.A, z1)
    if model.eta is not None:
        out = out + z[..., g.strat.layer_slice(2)] @ model.eta
    return out


def _fd_step(x: np.ndarray) -> float:
    return float(np.finfo(float).eps ** (1.0 / 3.0) * max(1.0, np.linalg.norm(x)))


def _layer_point(strat: Stratification, layer: int, index: int, t: float) -> np.ndarray:
    out = np.zeros(strat.total_dim)
    out[strat.layer_slice(layer).start + index] = t
    return out


def quadratic_from_function(g: GroupModel, u, x, h: float | None = None) -> QuadraticModel:
    """Fit the group-adapted quadratic to a smooth u at x by finite differences.

    xi and A come from central differences along the first-layer frame
    curves t -> x . (t e_i); eta is twice the vertical derivative, matching
    the convention under which the quadratic reproduces u to second order.
    ``u`` must accept (..., m) coordinate arrays.  Derivatives are O(h^2)
    accurate.
    """
    strat = g.strat
    coords = x.coords if isinstance(x, GroupPoint) else strat.check_coords(x)
    if coords.ndim != 1:
        raise DomainError("x must be a single base point")
    if h is None:
        h = _fd_step(coords)
    if not (h > 0 and math.isfinite(h)):
        raise DomainError(f"finite-difference step must be positive and finite, got {h}")

    v1 = strat.layer_dims[0]
    q0 = float(u(coords[None, :])[0])

    # first-layer shifts x . (+-h e_i)
    plus = np.stack([g.multiply(coords, _layer_point(strat, 1, i, h)) for i in range(v1)])
    minus = np.stack([g.multiply(coords, _layer_point(strat, 1, i, -h)) for i in range(v1)])
    xi = (np.asarray(u(plus), dtype=float) - np.asarray(u(minus), dtype=float)) / (2.0 * h)

    # symmetrized second differences along pairs of frame curves
    raw = np.zeros((v1, v1))
    for i in range(v1):
        for j in range(v1):
            pts = np.stack(
                [
                    g.multiply(g.multiply(coords, _layer_point(strat, 1, i, si * h)),
                               _layer_point(strat, 1, j, sj * h))
                    for si, sj in ((1, 1), (1, -1), (-1, 1), (-1, -1))
                ]
            )
            vals = np.asarray(u(pts), dtype=float)
            raw[i, j] = (vals[0] - vals[1] - vals[2] + vals[3]) / (4.0 * h * h)
    A = 0.5 * (raw + raw.T)

    eta = None
    if strat.step >= 2:
        v2 = strat.layer_dims[1]
        plus2 = np.stack([g.multiply(coords, _layer_point(strat, 2, s, h)) for s in range(v2)])
        minus2 = np.stack([g.multiply(coords, _layer_point(strat, 2, s, -h)) for s in range(v2)])
        vertical = (np.asarray(u(plus2), dtype=float) - np.asarray(u(minus2), dtype=float)) / (2.0 * h)
        eta = 2.0 * vertical

    return QuadraticModel(strat=strat, q0=q0, xi=xi, A=A, eta=eta, x=coords)


def normalized_p_laplacian(model: QuadraticModel, p: float) -> float:
    """tr A + (p-2) <A xi, xi>/|xi|^2; the Rayleigh quotient alone for p = inf."""
    xi = model.xi
    norm2 = float(xi @ xi)
    if norm2 == 0.0:
        raise DegenerateGradientError("horizontal gradient must be nonzero")
    rayleigh = float(xi @ model.A @ xi) / norm2
    if math.isinf(p):
        return rayleigh
    if not p >= 1.0:
        raise DomainError(f"p must lie in [1, inf], got {p}")
    return float(np.trace(model.A)) + (p - 2.0) * rayleigh


def _run_sweep(
    g: GroupModel,
    u,
    base: np.ndarray,
    u_at_base: float,
    predicted: float,
    p: float,
    eps0: float,
    levels: int,
    spec: QuadratureSpec,
    cfg: MedianConfig | None,
) -> SweepReport:
    if not eps0 > 0:
        raise DomainError(f"eps0 must be positive, got {eps0}")
    if levels < 2:
        raise DomainError("need at least two levels to fit the coefficient")
    if cfg is None:
        cfg = MedianConfig(p=p)
    elif cfg.p != p:
        cfg = MedianConfig(p=p, tol_lambda=cfg.tol_lambda, max_bisect=cfg.max_bisect)

    cloud = sample_unit_ball(g.strat, spec)
    if cloud.n_points == 0:
        raise DomainError("sample cloud is empty; increase n_samples")
    eps_list = eps0 / 2.0 ** np.arange(levels)
    mu_values = np.empty(levels)
    for i, eps in enumerate(eps_list):
        pts = g.multiply(base, g.dilate(float(eps), cloud.points))
        mu_values[i] = mu_p_samples(np.asarray(u(pts), dtype=float), cloud.weights, cfg)

    curv = (mu_values - u_at_base) / eps_list**2
    design = np.column_stack([np.ones(levels), eps_list])
    coef, *_ = np.linalg.lstsq(design, curv, rcond=None)
    fitted = float(coef[0])
    resid = curv - design @ coef
    fit_residual = float(np.sqrt(np.mean(resid**2)))
    rel_error = abs(fitted - predicted) / abs(predicted) if predicted != 0.0 else math.nan
    return SweepReport(
        p=p,
        eps_list=eps_list,
        mu_values=mu_values,
        fitted_coeff=fitted,
        predicted_coeff=predicted,
        rel_error=rel_error,
        fit_residual=fit_residual,
    )


def expansion_sweep(
    g: GroupModel,
    model: QuadraticModel,
    p: float,
    eps0: float,
    levels: int,
    spec: QuadratureSpec,
    cfg: MedianConfig | None = None,
) -> SweepReport:
    """Measure the eps^2 coefficient of mu_p(eps, q)(x) - q(x) for a quadratic."""
    predicted = expansion_coefficient(p, model.A, model.xi, g.strat)
    return _run_sweep(
        g,
        lambda pts: eval_quadratic(model, g, pts),
        model.x,
        model.q0,
        predicted,
        p,
        eps0,
        levels,
        spec,
        cfg,
    )


def check_amvp(
    g: GroupModel,
    u,
    x,
    p: float,
    eps0: float,
    levels: int,
    spec: QuadratureSpec,
    cfg: MedianConfig | None = None,
    h: float | None = None,
) -> SweepReport:
    """Expansion sweep for an arbitrary C^2 function.

    The prediction comes from the quadratic extracted at x by finite
    differences; the sweep itself evaluates u directly.
    """
    model = quadratic_from_function(g, u, x, h=h)
    if float(model.xi @ model.xi) == 0.0:
        raise DegenerateGradientError("horizontal gradient of u vanishes at x")
    predicted = expansion_coefficient(p, model.A, model.xi, g.strat)
    return _run_sweep(g, u, model.x, model.q0, predicted, p, eps0, levels, spec, cfg)
