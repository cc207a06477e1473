"""Closed-form constants for mean-value expansions on stratified groups.

Everything here is exact special-function arithmetic, no sampling.  The
central object is the expansion constant c(p, v_1, ..., v_k) entering

    mu_p(eps, q)(x) = q(x) + eps^2 * c * ( tr A + (p-2) <A xi, xi>/|xi|^2 ) + o(eps^2)

for quadratic q with horizontal gradient xi and Hessian A.  Writing
S_j = sum_{i<j} i*v_i, the constant is the Beta-ratio product

    c = 1/(2(p+v_1)) * prod_{j=2..k}  B(j v_j/(2k!), (p + S_j)/(2k!) + 1)
                                    / B(j v_j/(2k!), (p - 2 + S_j)/(2k!) + 1),

an empty product for step 1, which recovers the Euclidean value
1/(2(p+N)).  The same layer-by-layer reduction yields the moment

    I(p) = integral over the unit pseudoball of |y_1|^(p-2),

whose closed form is cross-checked against Monte-Carlo oracles in
``ballquad``.  Every Gamma/Beta evaluation happens in log space; the
2k! exponents grow quickly with the step and would overflow otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGradientError, DomainError
from .groups import as_stratification

__all__ = [
    "ConstantReport",
    "log_gamma",
    "beta",
    "log_beta",
    "dirichlet_integral",
    "theta_sequence",
    "theta_sequence_by_recursion",
    "theta_prime_sequence",
    "c_constant",
    "c_heisenberg1",
    "c_step2",
    "moment_I_closed",
    "expansion_coefficient",
]

BRANCH_EUCLIDEAN = "euclidean_closed_form"
BRANCH_GENERAL = "general_beta_product"
BRANCH_INFINITY = "p_infinity"


def log_gamma(t: float) -> float:
    """ln Gamma(t) for t > 0."""
    if not t > 0:
        raise DomainError(f"log_gamma requires a positive argument, got {t}")
    return math.lgamma(t)


def log_beta(a: float, b: float) -> float:
    if not (a > 0 and b > 0):
        raise DomainError(f"beta requires positive arguments, got ({a}, {b})")
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def beta(a: float, b: float) -> float:
    """Euler Beta B(a, b) = Gamma(a) Gamma(b) / Gamma(a+b)."""
    return math.exp(log_beta(a, b))


def dirichlet_integral(alphas) -> float:
    """Monomial integral over the positive-orthant unit ball T_n.

    integral_{T_n} x_1^a_1 ... x_n^a_n dx
        = 2^-n * prod Gamma((a_i+1)/2) / Gamma((n + 2 + sum a_i)/2),
    valid for every a_i > -1.
    """
    alphas = [float(a) for a in np.atleast_1d(alphas)]
    if len(alphas) == 0:
        raise DomainError("dirichlet_integral needs at least one exponent")
    if any(a <= -1 for a in alphas):
        raise DomainError(f"all exponents must exceed -1, got {alphas}")
    n = len(alphas)
    log_val = -n * math.log(2.0)
    log_val += sum(math.lgamma((a + 1.0) / 2.0) for a in alphas)
    log_val -= math.lgamma((n + 2.0 + sum(alphas)) / 2.0)
    return math.exp(log_val)


def _check_p_finite(p: float):
    if math.isinf(p):
        raise DomainError("p must be finite here; the p=infinity branch is separate")
    if not p > 1:
        raise DomainError(f"p must exceed 1, got {p}")


def _weighted_partial(layers, j):
    """S_j = sum_{i=1..j-1} i*v_i."""
    return sum(i * v for i, v in enumerate(layers[: j - 1], start=1))


def theta_sequence(p: float, strat) -> list[float]:
    """Exponents theta_2..theta_k of the layer-by-layer ball reduction.

    Closed form theta_j = (p - 2 + S_j)/(j - 1); empty for step 1.
    """
    _check_p_finite(p)
    layers = as_stratification(strat).layer_dims
    return [(p - 2.0 + _weighted_partial(layers, j)) / (j - 1.0) for j in range(2, len(layers) + 1)]


def theta_sequence_by_recursion(p: float, strat) -> list[float]:
    """Same sequence via theta_2 = v_1 + p - 2, theta_{j+1} = v_j + theta_j (j-1)/j."""
    _check_p_finite(p)
    layers = as_stratification(strat).layer_dims
    if len(layers) < 2:
        return []
    out = [layers[0] + p - 2.0]
    for j in range(2, len(layers)):
        out.append(layers[j - 1] + (j - 1.0) / j * out[-1])
    return out


def theta_prime_sequence(p: float, strat) -> list[float]:
    """The shifted exponents theta'_j = (p + S_j)/(j-1), i.e. theta_j at p + 2."""
    _check_p_finite(p)
    return theta_sequence(p + 2.0, strat)


def _log_c_general(p: float, layers) -> float:
    k = len(layers)
    two_k_fact = 2.0 * math.factorial(k)
    log_c = -math.log(2.0 * (p + layers[0]))
    for j in range(2, k + 1):
        a = j * layers[j - 1] / two_k_fact
        s = _weighted_partial(layers, j)
        log_c += log_beta(a, (p + s) / two_k_fact + 1.0)
        log_c -= log_beta(a, (p - 2.0 + s) / two_k_fact + 1.0)
    return log_c


@dataclass(frozen=True)
class ConstantReport:
    """Expansion constant for one (p, stratification) pair, with its exponents."""

    p: float
    layers: tuple[int, ...]
    c_value: float
    theta: tuple[float, ...]
    theta_prime: tuple[float, ...]
    branch: str

    def to_json_dict(self) -> dict:
        return {
            "p": "inf" if math.isinf(self.p) else self.p,
            "layers": list(self.layers),
            "c": self.c_value,
            "theta": list(self.theta),
            "theta_prime": list(self.theta_prime),
            "branch": self.branch,
        }


def c_constant(p: float, strat) -> ConstantReport:
    """Expansion constant c(p, v_1, ..., v_k).

    Step 1 short-circuits to the closed Euclidean value 1/(2(p+N)); for
    p = infinity the report carries the 1/2 that multiplies
    <A xi, xi>/|xi|^2 in the midrange expansion (no trace term).
    """
    strat = as_stratification(strat)
    layers = strat.layer_dims
    if math.isinf(p):
        return ConstantReport(math.inf, layers, 0.5, (), (), BRANCH_INFINITY)
    if not p > 1:
        raise DomainError(f"p must exceed 1, got {p}")
    if strat.step == 1:
        return ConstantReport(p, layers, 1.0 / (2.0 * (p + layers[0])), (), (), BRANCH_EUCLIDEAN)
    value = math.exp(_log_c_general(p, layers))
    return ConstantReport(
        p,
        layers,
        value,
        tuple(theta_sequence(p, strat)),
        tuple(theta_prime_sequence(p, strat)),
        BRANCH_GENERAL,
    )


def c_heisenberg1(p: float) -> float:
    """c(p) on the first Heisenberg group: 2/((p+2)(p+4)) * (Gamma((p+6)/4)/Gamma((p+4)/4))^2."""
    _check_p_finite(p)
    log_ratio = math.lgamma((p + 6.0) / 4.0) - math.lgamma((p + 4.0) / 4.0)
    return 2.0 / ((p + 2.0) * (p + 4.0)) * math.exp(2.0 * log_ratio)


def c_step2(p: float, n: int, k_vert: int) -> float:
    """Step-2 constant for layers (n, k): 1/(2(n+p)) * B(k/2,(n+p+4)/4)/B(k/2,(n+p+2)/4)."""
    _check_p_finite(p)
    if n < 1 or k_vert < 1:
        raise DomainError("layer dimensions must be positive")
    log_val = -math.log(2.0 * (n + p))
    log_val += log_beta(k_vert / 2.0, (n + p + 4.0) / 4.0)
    log_val -= log_beta(k_vert / 2.0, (n + p + 2.0) / 4.0)
    return math.exp(log_val)


def moment_I_closed(p: float, strat) -> float:
    """Closed form of I(p) = integral_{|y| < 1} |y_1|^(p-2) dy.

    For p = 2 this is the pseudoball volume.  The prefactor collects the
    first-layer Dirichlet integral and the Gamma factors of the radial
    reductions; each outer layer then contributes one Beta factor.
    """
    _check_p_finite(p)
    strat = as_stratification(strat)
    layers = strat.layer_dims
    k = strat.step
    two_k_fact = 2.0 * math.factorial(k)
    log_val = (
        math.lgamma((p - 1.0) / 2.0)
        + (strat.total_dim - 1.0) / 2.0 * math.log(math.pi)
        - (k - 2.0) * math.lgamma(k + 1.0)
        - math.lgamma((layers[0] + p) / 2.0)
    )
    for i in range(2, k + 1):
        log_val -= math.lgamma(layers[i - 1] / 2.0)
    for j in range(2, k + 1):
        s = _weighted_partial(layers, j)
        log_val += log_beta(j * layers[j - 1] / two_k_fact, (p - 2.0 + s) / two_k_fact + 1.0)
    return math.exp(log_val)


def _check_symmetric(A, v1):
    A = np.asarray(A, dtype=float)
    if A.shape != (v1, v1):
        raise DomainError(f"expected a {v1}x{v1} matrix, got shape {A.shape}")
    if np.max(np.abs(A - A.T)) > 1e-14 * max(1.0, float(np.max(np.abs(A)))):
        raise DomainError("matrix must be symmetric")
    return A


def expansion_coefficient(p: float, A, xi, strat) -> float:
    """Second-order coefficient of the generalized-median expansion.

    Finite p:  c(p, layers) * ( tr A + (p-2) <A xi, xi>/|xi|^2 ).
    p = inf :  (1/2) <A xi, xi>/|xi|^2.
    Degree-0 homogeneous in xi; xi = 0 is rejected.
    """
    strat = as_stratification(strat)
    v1 = strat.layer_dims[0]
    A = _check_symmetric(A, v1)
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (v1,):
        raise DomainError(f"expected a gradient of length {v1}, got shape {xi.shape}")
    norm2 = float(xi @ xi)
    if norm2 == 0.0:
        raise DegenerateGradientError("horizontal gradient must be nonzero")
    rayleigh = float(xi @ A @ xi) / norm2
    if math.isinf(p):
        return 0.5 * rayleigh
    report = c_constant(p, strat)
    return report.c_value * (float(np.trace(A)) + (p - 2.0) * rayleigh)
