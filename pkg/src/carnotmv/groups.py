"""Stratified (Carnot) group arithmetic in exponential coordinates.

A group element lives in R^m with coordinates split into layers
x = (x^(1), ..., x^(k)); layer j has dimension v_j and scales like lambda^j
under the anisotropic dilation delta_lambda.  The homogeneous gauge

    |x| = ( sum_j ||x^(j)||^(2k!/j) )^(1/(2k!))

is 1-homogeneous under dilations and defines the pseudoballs every other
module integrates over.

Supported multiplication laws:

* ``Euclidean(n)``   -- abelian, step 1.
* ``Heisenberg(n)``  -- step 2, layers (2n, 1), the classical law
  ``(z1,t1)(z2,t2) = (z1+z2, t1+t2+2 Im(z1 conj(z2)))`` for n = 1.
* ``Step2(n, tensors)`` -- generic step 2: first layer adds, and the
  second layer picks up the bilinear correction <B_s x^(1), y^(1)>.
  The B tensors are required to be skew-symmetric so that the origin is
  the identity and inversion is coordinate negation.

All coordinate-level operations are pure, accept batched arrays of shape
(..., m) and broadcast; nothing here mutates its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, DomainError, UnsupportedModelError

__all__ = [
    "Stratification",
    "GroupPoint",
    "GroupModel",
    "Euclidean",
    "Heisenberg",
    "Step2",
    "as_stratification",
    "multiply",
    "inverse",
    "dilate",
    "pseudonorm",
    "distance",
    "horizontal_frame",
    "parse_group_spec",
]


@dataclass(frozen=True)
class Stratification:
    """Layer dimensions (v_1, ..., v_k) and everything derived from them."""

    layer_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(v) for v in self.layer_dims)
        if len(dims) < 1 or any(v < 1 for v in dims):
            raise DomainError(f"layer dimensions must be positive integers, got {self.layer_dims}")
        object.__setattr__(self, "layer_dims", dims)

    @property
    def step(self) -> int:
        return len(self.layer_dims)

    @property
    def total_dim(self) -> int:
        return sum(self.layer_dims)

    @property
    def hom_dim(self) -> int:
        """Homogeneous dimension Q = sum_j j*v_j; governs |B(x, lam)| = lam^Q |B(x, 1)|."""
        return sum(j * v for j, v in enumerate(self.layer_dims, start=1))

    @property
    def homogeneity(self) -> np.ndarray:
        """Per-coordinate dilation exponent sigma (sigma_i = j on layer j)."""
        return np.repeat(np.arange(1, self.step + 1), self.layer_dims)

    def layer_slice(self, j: int) -> slice:
        """Coordinate slice of layer j (1-based)."""
        if not 1 <= j <= self.step:
            raise DomainError(f"layer index {j} outside 1..{self.step}")
        lo = sum(self.layer_dims[: j - 1])
        return slice(lo, lo + self.layer_dims[j - 1])

    def check_coords(self, coords) -> np.ndarray:
        coords = np.asarray(coords, dtype=float)
        if coords.shape[-1:] != (self.total_dim,):
            raise DimensionMismatchError(
                f"expected coordinates of length {self.total_dim}, got shape {coords.shape}"
            )
        return coords

    def pseudonorm(self, coords) -> np.ndarray | float:
        """Homogeneous gauge |x|; batched over leading axes."""
        coords = self.check_coords(coords)
        exponent = 2.0 * math.factorial(self.step)
        acc = np.zeros(coords.shape[:-1])
        for j in range(1, self.step + 1):
            nrm = np.linalg.norm(coords[..., self.layer_slice(j)], axis=-1)
            acc = acc + nrm ** (exponent / j)
        out = acc ** (1.0 / exponent)
        return float(out) if out.ndim == 0 else out


def as_stratification(strat) -> Stratification:
    """Coerce a Stratification, GroupModel, or layer-dimension sequence."""
    if isinstance(strat, Stratification):
        return strat
    if isinstance(strat, GroupModel):
        return strat.strat
    return Stratification(tuple(strat))


@dataclass(frozen=True)
class GroupPoint:
    """A single group element: coordinates plus the stratification splitting them."""

    strat: Stratification
    coords: np.ndarray

    def __post_init__(self):
        coords = self.strat.check_coords(self.coords)
        if coords.ndim != 1:
            raise DimensionMismatchError("GroupPoint holds a single point; use raw arrays for batches")
        if not np.all(np.isfinite(coords)):
            raise DomainError("GroupPoint coordinates must be finite")
        object.__setattr__(self, "coords", coords.copy())

    def layer(self, j: int) -> np.ndarray:
        return self.coords[self.strat.layer_slice(j)]


class GroupModel:
    """A concrete group: stratification plus multiplication law."""

    strat: Stratification

    # -- law -----------------------------------------------------------------
    def multiply(self, x, y):
        raise NotImplementedError

    def inverse(self, x):
        raise NotImplementedError

    def horizontal_frame_coeffs(self, x) -> np.ndarray:
        """Frame fields X_1..X_{v1} at x, as rows of an (..., v1, m) coefficient array."""
        raise NotImplementedError

    def spec_string(self) -> str:
        raise NotImplementedError

    # -- stratification-only pieces -------------------------------------------
    def dilate(self, lam: float, x):
        if not (lam > 0):
            raise DomainError(f"dilation factor must be positive, got {lam}")
        x = self.strat.check_coords(x)
        return x * lam ** self.strat.homogeneity.astype(float)

    def pseudonorm(self, x):
        return self.strat.pseudonorm(x)

    def distance(self, x, y):
        return self.pseudonorm(self.multiply(self.inverse(y), x))

    def origin(self) -> GroupPoint:
        return GroupPoint(self.strat, np.zeros(self.strat.total_dim))

    def __repr__(self):
        return f"<{type(self).__name__} layers={self.strat.layer_dims}>"


class Euclidean(GroupModel):
    """R^n with vector addition (step 1)."""

    def __init__(self, n: int):
        self.strat = Stratification((int(n),))

    def multiply(self, x, y):
        x = self.strat.check_coords(x)
        y = self.strat.check_coords(y)
        return x + y

    def inverse(self, x):
        return -self.strat.check_coords(x)

    def horizontal_frame_coeffs(self, x):
        x = self.strat.check_coords(x)
        n = self.strat.total_dim
        frame = np.broadcast_to(np.eye(n), x.shape[:-1] + (n, n))
        return frame.copy()

    def spec_string(self):
        return f"group=euclidean n={self.strat.total_dim}"


class Step2(GroupModel):
    """Generic step-2 model: layers (n, k_vert) and skew bilinear tensors B_s."""

    def __init__(self, n: int, tensors):
        tensors = np.asarray(tensors, dtype=float)
        if tensors.ndim != 3 or tensors.shape[1:] != (n, n):
            raise DimensionMismatchError(
                f"expected B tensors of shape (k, {n}, {n}), got {tensors.shape}"
            )
        skew_defect = np.max(np.abs(tensors + np.swapaxes(tensors, 1, 2)))
        if skew_defect > 1e-12 * (1.0 + np.max(np.abs(tensors))):
            raise DomainError("second-layer B tensors must be skew-symmetric")
        self.tensors = tensors.copy()
        self.strat = Stratification((int(n), tensors.shape[0]))

    def multiply(self, x, y):
        x = self.strat.check_coords(x)
        y = self.strat.check_coords(y)
        x, y = np.broadcast_arrays(x, y)
        s1 = self.strat.layer_slice(1)
        s2 = self.strat.layer_slice(2)
        out = x + y
        # <B_s x^(1), y^(1)> per vertical coordinate s
        out[..., s2] += np.einsum("sij,...j,...i->...s", self.tensors, x[..., s1], y[..., s1])
        return out

    def inverse(self, x):
        # skew tensors make coordinate negation the group inverse
        return -self.strat.check_coords(x)

    def horizontal_frame_coeffs(self, x):
        x = self.strat.check_coords(x)
        n = self.strat.layer_dims[0]
        m = self.strat.total_dim
        s1 = self.strat.layer_slice(1)
        frame = np.zeros(x.shape[:-1] + (n, m))
        frame[..., :, :n] = np.eye(n)
        # d/dt of the second layer of x . (t e_i) at t = 0 is (B_s x^(1))_i
        frame[..., :, n:] = np.einsum("sij,...j->...is", self.tensors, x[..., s1])
        return frame

    def spec_string(self):
        n = self.strat.layer_dims[0]
        parts = [f"group=step2 n={n} k={self.strat.layer_dims[1]}"]
        for s, B in enumerate(self.tensors, start=1):
            rows = ";".join(",".join(repr(float(b)) for b in row) for row in B)
            parts.append(f"B{s}={rows}")
        return " ".join(parts)


class Heisenberg(Step2):
    """The Heisenberg group H_n: layers (2n, 1), one skew tensor.

    For n = 1 this is the law (z1,t1)(z2,t2) = (z1+z2, t1+t2+2 Im(z1 conj(z2))).
    """

    def __init__(self, n: int):
        n = int(n)
        if n < 1:
            raise DomainError(f"Heisenberg index must be >= 1, got {n}")
        B = np.zeros((1, 2 * n, 2 * n))
        for i in range(n):
            B[0, i, n + i] = 2.0
            B[0, n + i, i] = -2.0
        super().__init__(2 * n, B)
        self.n = n

    def spec_string(self):
        return f"group=heisenberg n={self.n}"


# ---------------------------------------------------------------------------
# Functional front end: accepts GroupPoint or raw coordinate arrays.
# ---------------------------------------------------------------------------


def _coords(g: GroupModel, x):
    if isinstance(x, GroupPoint):
        if x.strat != g.strat:
            raise DimensionMismatchError("point stratification does not match the model")
        return x.coords
    return g.strat.check_coords(x)


def _wrap(g: GroupModel, out, *inputs):
    if any(isinstance(p, GroupPoint) for p in inputs) and out.ndim == 1:
        return GroupPoint(g.strat, out)
    return out


def multiply(g: GroupModel, x, y):
    """Group product x . y."""
    out = g.multiply(_coords(g, x), _coords(g, y))
    return _wrap(g, out, x, y)


def inverse(g: GroupModel, x):
    """Group inverse; exact coordinate negation for the supported models."""
    out = g.inverse(_coords(g, x))
    return _wrap(g, out, x)


def dilate(g: GroupModel, lam: float, x):
    """Anisotropic dilation delta_lam (layer j scales by lam^j)."""
    out = g.dilate(lam, _coords(g, x))
    return _wrap(g, out, x)


def pseudonorm(g: GroupModel, x):
    return g.pseudonorm(_coords(g, x))


def distance(g: GroupModel, x, y):
    """Left-invariant pseudodistance d(x, y) = |y^-1 . x|."""
    return g.distance(_coords(g, x), _coords(g, y))


def horizontal_frame(g: GroupModel, x) -> list[np.ndarray]:
    """First-layer frame fields at x, each as an m-vector of d/dx_i coefficients."""
    if g.strat.step > 2:
        raise UnsupportedModelError("horizontal frame is implemented for step <= 2 models only")
    coeffs = g.horizontal_frame_coeffs(_coords(g, x))
    return [coeffs[..., i, :] for i in range(g.strat.layer_dims[0])]


# ---------------------------------------------------------------------------
# Text format: "group=heisenberg n=1", "group=step2 n=2 k=1 B1=0,1;-1,0"
# ---------------------------------------------------------------------------


def parse_group_spec(text: str) -> GroupModel:
    """Parse the whitespace-separated key=value group description."""
    fields = {}
    for token in text.split():
        if "=" not in token:
            raise DomainError(f"malformed group token {token!r} (expected key=value)")
        key, _, value = token.partition("=")
        fields[key.lower()] = value
    kind = fields.pop("group", None)
    if kind is None:
        raise DomainError("group specification must contain group=<name>")
    kind = kind.lower()
    try:
        if kind == "euclidean":
            return Euclidean(int(fields.pop("n")))
        if kind == "heisenberg":
            return Heisenberg(int(fields.pop("n")))
        if kind == "step2":
            n = int(fields.pop("n"))
            k = int(fields.pop("k"))
            tensors = []
            for s in range(1, k + 1):
                raw = fields.pop(f"b{s}", None)
                if raw is None:
                    raise DomainError(f"step2 specification is missing B{s}")
                rows = [[float(v) for v in row.split(",")] for row in raw.split(";")]
                tensors.append(rows)
            return Step2(n, np.asarray(tensors))
    except KeyError as exc:
        raise DomainError(f"group specification is missing field {exc}") from None
    raise DomainError(f"unknown group kind {kind!r}")
