"""Seeded Monte-Carlo quadrature over pseudoballs.

Sampling is rejection from the anisotropic box |x_i| <= r^(sigma_i): each
layer term of the gauge is <= r^(2k!/j) on the ball, so the ball is
contained in that box exactly.  Proposals are split into ``batch``
independent substreams keyed by (seed, batch index), which makes clouds
bit-reproducible regardless of how the batches are executed.

Every accepted point is emitted together with its antithetic mirror -z
(the gauge is even layerwise, so -z is in the ball and remains uniform).
The pairing cancels odd-in-z integrands exactly — in particular the
first-order term of the median expansion — which is what lets the sweep
experiments fit an eps^2 coefficient at a desk-scale sample budget.
Standard errors are computed on per-proposal units (zero when rejected,
pair mean when accepted), so the binomial variance of the acceptance
ratio is included.

Two proposal streams are available: ``pseudorandom_rejection`` (PCG64)
and ``low_discrepancy_rejection`` (scrambled Sobol, one independent
scramble per batch, standard error from the batch spread).
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from .errors import DomainError, FeasibilityError
from .groups import GroupModel, GroupPoint, Stratification, as_stratification

__all__ = [
    "QuadratureSpec",
    "SampleCloud",
    "Estimate",
    "sample_unit_ball",
    "sample_ball",
    "integrate",
    "gamma0_numeric",
    "dirichlet_oracle",
]

METHOD_PSEUDO = "pseudorandom_rejection"
METHOD_LOWDISC = "low_discrepancy_rejection"

# Rejection is declared infeasible once at least this many proposals have
# been consumed at an acceptance ratio below the floor.
FEASIBILITY_MIN_PROPOSALS = 10_000_000
FEASIBILITY_MIN_RATIO = 1e-6

# Hard zero for the singular weight |y_1|^(p-2) when p < 2.
SINGULARITY_FLOOR = 1e-12


@dataclass(frozen=True)
class QuadratureSpec:
    """Size, seed, proposal stream, and chunking of one Monte-Carlo run."""

    n_samples: int
    seed: int = 0
    method: str = METHOD_PSEUDO
    batch: int = 16

    def __post_init__(self):
        if self.n_samples < 1:
            raise DomainError("n_samples must be at least 1")
        if self.batch < 1:
            raise DomainError("batch must be at least 1")
        if self.method not in (METHOD_PSEUDO, METHOD_LOWDISC):
            raise DomainError(f"unknown sampling method {self.method!r}")


@dataclass
class Estimate:
    """A Monte-Carlo value with its standard error and proposal count."""

    value: float
    std_error: float
    n: int

    def z_score(self, reference: float) -> float:
        if self.std_error == 0.0:
            return 0.0 if self.value == reference else math.inf
        return (self.value - reference) / self.std_error


@dataclass
class SampleCloud:
    """Quadrature nodes over one pseudoball.

    Points are stored in adjacent antithetic pairs (z at even rows, -z at
    odd rows); ``values`` is left to callers.  Weights are uniform and sum
    to the Monte-Carlo volume estimate of the ball.
    """

    strat: Stratification
    points: np.ndarray
    weights: np.ndarray
    center: np.ndarray
    radius: float
    n_proposals: int
    method: str
    box_volume: float
    batch_pairs: np.ndarray
    batch_proposals: np.ndarray
    values: np.ndarray | None = None

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def n_pairs(self) -> int:
        return self.points.shape[0] // 2

    @property
    def volume_estimate(self) -> float:
        return float(self.weights.sum())

    def pair_means(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        if values.shape != (self.n_points,):
            raise DomainError("values must align with the cloud's points")
        return 0.5 * (values[0::2] + values[1::2])


def _batch_sizes(total: int, batches: int) -> np.ndarray:
    base, extra = divmod(total, batches)
    return np.array([base + (1 if b < extra else 0) for b in range(batches)], dtype=np.int64)


def _propose(strat: Stratification, spec: QuadratureSpec, n_b: int, b: int, halfwidth):
    m = strat.total_dim
    if spec.method == METHOD_PSEUDO:
        rng = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(b,)))
        u = rng.uniform(-1.0, 1.0, size=(n_b, m))
    else:
        child = np.random.SeedSequence(spec.seed, spawn_key=(b,))
        with warnings.catch_warnings():
            # balance is recovered statistically by the batch spread
            warnings.simplefilter("ignore", UserWarning)
            sob = qmc.Sobol(d=m, scramble=True, seed=np.random.default_rng(child))
            u = 2.0 * sob.random(n_b) - 1.0
    return u * halfwidth


def sample_unit_ball(
    strat,
    spec: QuadratureSpec,
    radius: float = 1.0,
    threads: int = 1,
) -> SampleCloud:
    """Rejection-sample the centered pseudoball of the given radius.

    Reproducible given (seed, n_samples, method, batch) — the thread count
    only schedules the batches, it never changes the merged cloud.
    """
    strat = as_stratification(strat)
    if not radius > 0:
        raise DomainError(f"radius must be positive, got {radius}")
    sigma = strat.homogeneity.astype(float)
    halfwidth = radius**sigma
    box_volume = float(np.prod(2.0 * halfwidth))
    sizes = _batch_sizes(spec.n_samples, min(spec.batch, spec.n_samples))

    def run_batch(b: int) -> np.ndarray:
        props = _propose(strat, spec, int(sizes[b]), b, halfwidth)
        return props[strat.pseudonorm(props) <= radius]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            accepted = list(pool.map(run_batch, range(len(sizes))))
    else:
        accepted = [run_batch(b) for b in range(len(sizes))]

    batch_pairs = np.array([a.shape[0] for a in accepted], dtype=np.int64)
    n_acc = int(batch_pairs.sum())
    n_prop = int(sizes.sum())
    if n_prop >= FEASIBILITY_MIN_PROPOSALS and n_acc < FEASIBILITY_MIN_RATIO * n_prop:
        raise FeasibilityError(
            f"acceptance ratio {n_acc / n_prop:.2e} below {FEASIBILITY_MIN_RATIO:.0e} "
            f"after {n_prop} proposals"
        )

    points = np.empty((2 * n_acc, strat.total_dim))
    if n_acc:
        merged = np.concatenate(accepted, axis=0)
        points[0::2] = merged
        points[1::2] = -merged
    weights = np.full(2 * n_acc, box_volume / (2.0 * n_prop))
    return SampleCloud(
        strat=strat,
        points=points,
        weights=weights,
        center=np.zeros(strat.total_dim),
        radius=float(radius),
        n_proposals=n_prop,
        method=spec.method,
        box_volume=box_volume,
        batch_pairs=batch_pairs,
        batch_proposals=sizes,
    )


def sample_ball(g: GroupModel, x, eps: float, spec: QuadratureSpec, threads: int = 1) -> SampleCloud:
    """Cloud over B(x, eps): the unit cloud pushed through y = x . delta_eps(z).

    Left translation preserves Lebesgue measure and the dilation scales it
    by eps^Q, so weights pick up exactly that factor.
    """
    if not eps > 0:
        raise DomainError(f"ball radius must be positive, got {eps}")
    coords = x.coords if isinstance(x, GroupPoint) else g.strat.check_coords(x)
    unit = sample_unit_ball(g.strat, spec, threads=threads)
    scale = float(eps) ** g.strat.hom_dim
    points = unit.points
    if points.shape[0]:
        points = g.multiply(coords, g.dilate(eps, points))
    return SampleCloud(
        strat=g.strat,
        points=points,
        weights=unit.weights * scale,
        center=coords.copy(),
        radius=float(eps),
        n_proposals=unit.n_proposals,
        method=unit.method,
        box_volume=unit.box_volume * scale,
        batch_pairs=unit.batch_pairs,
        batch_proposals=unit.batch_proposals,
    )


def _pair_batch_slices(cloud: SampleCloud):
    ends = np.cumsum(cloud.batch_pairs)
    starts = ends - cloud.batch_pairs
    return starts, ends


def integrate(cloud: SampleCloud, values=None) -> Estimate:
    """Weighted Monte-Carlo integral of ``values`` over the cloud's ball.

    Pseudorandom clouds get the per-proposal plug-in variance (acceptance
    binomial included); low-discrepancy clouds get the spread of the
    per-scramble estimates.
    """
    if values is None:
        values = cloud.values
    if values is None:
        raise DomainError("no values supplied and the cloud carries none")
    pm = cloud.pair_means(values)
    scale = cloud.box_volume
    n_prop = cloud.n_proposals
    estimate = scale * float(pm.sum()) / n_prop
    if cloud.method == METHOD_LOWDISC and len(cloud.batch_pairs) > 1:
        starts, ends = _pair_batch_slices(cloud)
        per_batch = np.array(
            [
                scale * float(pm[s:e].sum()) / bp
                for s, e, bp in zip(starts, ends, cloud.batch_proposals)
            ]
        )
        std_error = float(per_batch.std(ddof=1) / math.sqrt(len(per_batch)))
    else:
        second = scale**2 * float((pm * pm).sum()) / n_prop
        var = max(second - estimate**2, 0.0)
        std_error = math.sqrt(var / n_prop)
    return Estimate(value=estimate, std_error=std_error, n=n_prop)


def singular_weight(y1, p: float) -> np.ndarray:
    """|y_1|^(p-2), hard-zeroed below the singularity floor when p < 2."""
    a = np.abs(np.asarray(y1, dtype=float))
    if p >= 2.0:
        return a ** (p - 2.0)
    out = np.zeros_like(a)
    mask = a >= SINGULARITY_FLOOR
    out[mask] = a[mask] ** (p - 2.0)
    return out


def gamma0_numeric(strat, p: float, C, eta, spec: QuadratureSpec) -> Estimate:
    """Ratio estimator of the limiting curvature average

        gamma_0 = int_B |y_1|^(p-2) ( <C y^(1), y^(1)>/2 + <eta, y^(2)> ) dy
                  / int_B |y_1|^(p-2) dy,

    which equals c(p, layers) * (tr C + (p-2) C_11).  The eta term pairs to
    zero under the antithetic mirror; the standard error comes from the
    delta method on the (numerator, denominator) proposal units.
    """
    strat = as_stratification(strat)
    if not (p > 1) or math.isinf(p):
        raise DomainError(f"gamma0 requires finite p > 1, got {p}")
    v1 = strat.layer_dims[0]
    C = np.asarray(C, dtype=float)
    if C.shape != (v1, v1):
        raise DomainError(f"expected a {v1}x{v1} curvature matrix, got {C.shape}")
    if np.max(np.abs(C - C.T)) > 1e-12 * max(1.0, float(np.max(np.abs(C)))):
        raise DomainError("curvature matrix must be symmetric")
    if strat.step >= 2:
        v2 = strat.layer_dims[1]
        eta = np.zeros(v2) if eta is None else np.asarray(eta, dtype=float)
        if eta.shape != (v2,):
            raise DomainError(f"expected a second-layer vector of length {v2}, got {eta.shape}")
    elif eta is not None and np.size(eta):
        raise DomainError("eta must be empty for step-1 stratifications")

    cloud = sample_unit_ball(strat, spec)
    if cloud.n_points == 0:
        raise FeasibilityError("no accepted samples; increase n_samples")
    z = cloud.points
    w = singular_weight(z[:, 0], p)
    z1 = z[:, strat.layer_slice(1)]
    g = 0.5 * np.einsum("ni,ij,nj->n", z1, C, z1)
    if strat.step >= 2:
        g = g + z[:, strat.layer_slice(2)] @ eta

    num = cloud.pair_means(w * g)
    den = cloud.pair_means(w)
    n_prop = cloud.n_proposals
    scale = cloud.box_volume
    mean_num = scale * float(num.sum()) / n_prop
    mean_den = scale * float(den.sum()) / n_prop
    if mean_den == 0.0:
        raise FeasibilityError("denominator integral vanished; increase n_samples")
    ratio = mean_num / mean_den

    # delta method: Var(N/D) ~ (Var N - 2 R Cov(N,D) + R^2 Var D) / D^2
    m2_num = scale**2 * float((num * num).sum()) / n_prop
    m2_den = scale**2 * float((den * den).sum()) / n_prop
    m2_cross = scale**2 * float((num * den).sum()) / n_prop
    var_num = max(m2_num - mean_num**2, 0.0)
    var_den = max(m2_den - mean_den**2, 0.0)
    cov = m2_cross - mean_num * mean_den
    var_ratio = max(var_num - 2.0 * ratio * cov + ratio**2 * var_den, 0.0) / (n_prop * mean_den**2)
    return Estimate(value=ratio, std_error=math.sqrt(var_ratio), n=n_prop)


def dirichlet_oracle(alphas, spec: QuadratureSpec) -> Estimate:
    """Monte-Carlo value of the monomial integral over the positive-orthant
    unit ball T_n; the closed-form counterpart is
    ``special.dirichlet_integral``."""
    alphas = np.atleast_1d(np.asarray(alphas, dtype=float))
    if alphas.size == 0:
        raise DomainError("need at least one exponent")
    if np.any(alphas <= -1):
        raise DomainError("all exponents must exceed -1")
    n_dim = alphas.size
    sizes = _batch_sizes(spec.n_samples, min(spec.batch, spec.n_samples))

    def run_batch(b: int) -> np.ndarray:
        if spec.method == METHOD_PSEUDO:
            rng = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(b,)))
            x = rng.uniform(0.0, 1.0, size=(int(sizes[b]), n_dim))
        else:
            child = np.random.SeedSequence(spec.seed, spawn_key=(b,))
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", UserWarning)
                sob = qmc.Sobol(d=n_dim, scramble=True, seed=np.random.default_rng(child))
                x = sob.random(int(sizes[b]))
        # exclude the measure-zero coordinate planes where negative powers blow up
        ok = (np.einsum("ni,ni->n", x, x) < 1.0) & np.all(x > 0.0, axis=1)
        vals = np.zeros(x.shape[0])
        vals[ok] = np.prod(x[ok] ** alphas, axis=1)
        return vals

    per_prop = np.concatenate([run_batch(b) for b in range(len(sizes))])
    n_prop = per_prop.size
    estimate = float(per_prop.mean())
    if spec.method == METHOD_LOWDISC and len(sizes) > 1:
        ends = np.cumsum(sizes)
        starts = ends - sizes
        per_batch = np.array([per_prop[s:e].mean() for s, e in zip(starts, ends)])
        std_error = float(per_batch.std(ddof=1) / math.sqrt(len(per_batch)))
    else:
        std_error = float(per_prop.std() / math.sqrt(n_prop))
    return Estimate(value=estimate, std_error=std_error, n=n_prop)
