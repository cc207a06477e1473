"""Dirichlet problems for the normalized p-Laplacian by median iteration.

The mean-value characterization suggests the dynamic-programming scheme

    u <- (1 - theta) u + theta * mu_p(stencil values)

on a rectangular grid, where each interior node's stencil is the set of
grid nodes within pseudodistance eps, weighted equally (counting measure
as a midpoint-rule surrogate for the ball measure).  The update inherits
translation, homogeneity, and monotonicity from the median, which is what
drives the comparison principle observed in tests; convergence itself is
empirical and a non-converged run is a reported outcome, not an error.

Interior nodes are those whose eps-pseudoball provably fits inside the
box (via conservative per-coordinate extent bounds — exact for Euclidean
grids); all remaining nodes form the boundary collar and hold Dirichlet
data.  Updates are Jacobi-style with double buffering, so the result is
independent of traversal order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError, UnderResolvedBallError
from .groups import Euclidean, GroupModel, Step2

__all__ = [
    "SolverConfig",
    "GridDomain",
    "StencilTable",
    "SolveReport",
    "build_stencils",
    "relax_once",
    "solve",
    "builtin_boundary",
]


@dataclass(frozen=True)
class SolverConfig:
    """Order p, ball radius, and iteration controls."""

    p: float
    eps: float
    tol_sup: float = 1e-8
    max_iters: int = 100_000
    damping: float = 1.0
    tol_lambda: float = 1e-12
    max_bisect: int = 200

    def __post_init__(self):
        if not self.p >= 1.0:
            raise DomainError(f"p must lie in [1, inf], got {self.p}")
        if not self.eps > 0:
            raise DomainError("eps must be positive")
        if not self.tol_sup > 0:
            raise DomainError("tol_sup must be positive")
        if not 0.0 < self.damping <= 1.0:
            raise DomainError("damping must lie in (0, 1]")


class GridDomain:
    """Rectangular grid over a box, with interior/collar classification."""

    def __init__(self, model: GroupModel, mins, maxs, spacing, eps: float):
        self.model = model
        m = model.strat.total_dim
        mins = np.broadcast_to(np.asarray(mins, dtype=float), (m,)).copy()
        maxs = np.broadcast_to(np.asarray(maxs, dtype=float), (m,)).copy()
        spacing = np.broadcast_to(np.asarray(spacing, dtype=float), (m,)).copy()
        if np.any(spacing <= 0) or np.any(maxs <= mins):
            raise DomainError("box must be nondegenerate and spacing positive")
        if not eps > 0:
            raise DomainError("eps must be positive")
        counts = np.round((maxs - mins) / spacing).astype(int) + 1
        if np.any(np.abs(mins + (counts - 1) * spacing - maxs) > 1e-9 * np.maximum(1.0, np.abs(maxs))):
            raise DomainError("spacing must tile the box exactly")
        self.mins, self.maxs, self.h, self.eps = mins, maxs, spacing, float(eps)
        self.shape = tuple(int(c) for c in counts)
        axes = [mins[i] + spacing[i] * np.arange(self.shape[i]) for i in range(m)]
        mesh = np.meshgrid(*axes, indexing="ij")
        self.coords = np.stack([g.ravel() for g in mesh], axis=-1)
        self.n_nodes = self.coords.shape[0]

        extents = self._ball_extents(self.coords)
        inside = np.all(
            (self.coords - extents >= mins - 1e-12) & (self.coords + extents <= maxs + 1e-12),
            axis=1,
        )
        self.interior_idx = np.nonzero(inside)[0]
        self.collar_idx = np.nonzero(~inside)[0]
        if self.collar_idx.size == 0:
            raise DomainError("boundary collar is empty; enlarge the box or eps")

    def _ball_extents(self, coords: np.ndarray) -> np.ndarray:
        """Per-coordinate half-width bound of B(x, eps); exact for Euclidean."""
        eps = self.eps
        strat = self.model.strat
        out = np.empty_like(coords)
        out[:, strat.layer_slice(1)] = eps
        if strat.step >= 2:
            if not isinstance(self.model, Step2):
                raise DomainError("grid domains support Euclidean and step-2 models")
            x1 = coords[:, strat.layer_slice(1)]
            shear = np.linalg.norm(np.einsum("sij,nj->nsi", self.model.tensors, x1), axis=2)
            out[:, strat.layer_slice(2)] = eps**2 + eps * shear
        return out

    def node_multi_index(self, flat_idx):
        return np.unravel_index(flat_idx, self.shape)


@dataclass
class StencilTable:
    """CSR-style stencils plus per-size row groups for vectorized updates."""

    interior_idx: np.ndarray
    indices: np.ndarray
    indptr: np.ndarray
    eps: float
    # rows grouped by stencil size: size -> (row positions, (rows, size) node ids)
    size_groups: dict

    @property
    def sizes(self) -> np.ndarray:
        return np.diff(self.indptr)


def _euclidean_offsets(dom: GridDomain) -> np.ndarray:
    reach = np.floor(dom.eps / dom.h + 1e-12).astype(int)
    ranges = [np.arange(-r, r + 1) for r in reach]
    mesh = np.meshgrid(*ranges, indexing="ij")
    offsets = np.stack([g.ravel() for g in mesh], axis=-1)
    dist = np.linalg.norm(offsets * dom.h, axis=1)
    return offsets[dist <= dom.eps * (1 + 1e-12)]


def build_stencils(dom: GridDomain, cfg: SolverConfig) -> StencilTable:
    """Stencil of each interior node: all grid nodes within pseudodistance eps."""
    if abs(cfg.eps - dom.eps) > 1e-12 * max(1.0, dom.eps):
        raise DomainError("config eps disagrees with the domain's eps")
    if dom.eps < 2.0 * float(np.max(dom.h)):
        raise UnderResolvedBallError(
            f"eps={dom.eps} under-resolves the grid (need eps >= 2h, h={np.max(dom.h)})"
        )
    interior = dom.interior_idx
    model = dom.model

    if isinstance(model, Euclidean):
        offsets = _euclidean_offsets(dom)
        base = np.stack(dom.node_multi_index(interior), axis=-1)
        neigh = base[:, None, :] + offsets[None, :, :]
        flat = np.ravel_multi_index(tuple(np.moveaxis(neigh, -1, 0)), dom.shape)
        rows = [flat[i] for i in range(flat.shape[0])]
    else:
        extents = dom._ball_extents(dom.coords[interior])
        reach = np.ceil(extents / dom.h - 1e-12).astype(int)
        base = np.stack(dom.node_multi_index(interior), axis=-1)
        rows = []
        for r in range(interior.size):
            ranges = [
                np.arange(max(0, base[r, d] - reach[r, d]), min(dom.shape[d], base[r, d] + reach[r, d] + 1))
                for d in range(len(dom.shape))
            ]
            mesh = np.meshgrid(*ranges, indexing="ij")
            cand = np.ravel_multi_index(tuple(g.ravel() for g in mesh), dom.shape)
            d = model.distance(dom.coords[interior[r]], dom.coords[cand])
            rows.append(cand[d <= dom.eps * (1 + 1e-12)])

    sizes = np.array([len(r) for r in rows], dtype=np.int64)
    if np.any(sizes < 3):
        raise UnderResolvedBallError("degenerate stencil with fewer than 3 nodes")
    indptr = np.concatenate([[0], np.cumsum(sizes)])
    indices = np.concatenate(rows) if rows else np.empty(0, dtype=np.int64)

    size_groups = {}
    for size in np.unique(sizes):
        row_pos = np.nonzero(sizes == size)[0]
        mat = np.stack([rows[i] for i in row_pos])
        size_groups[int(size)] = (row_pos, mat)
    return StencilTable(
        interior_idx=interior,
        indices=indices,
        indptr=indptr,
        eps=dom.eps,
        size_groups=size_groups,
    )


def _stencil_medians(field: np.ndarray, stencils: StencilTable, cfg: SolverConfig) -> np.ndarray:
    out = np.empty(stencils.interior_idx.size)
    for size, (row_pos, mat) in stencils.size_groups.items():
        vals = field[mat]
        if math.isinf(cfg.p):
            out[row_pos] = 0.5 * (vals.min(axis=1) + vals.max(axis=1))
        elif cfg.p == 2.0:
            out[row_pos] = vals.mean(axis=1)
        elif cfg.p == 1.0:
            # smallest minimizer: lower median order statistic
            out[row_pos] = np.sort(vals, axis=1)[:, (size - 1) // 2]
        else:
            vals = np.ascontiguousarray(vals)
            ones = np.ones_like(vals)
            out[row_pos] = kernels.mu_p_bisect_rows(vals, ones, cfg.p, cfg.tol_lambda, cfg.max_bisect)
    return out


def relax_once(field: np.ndarray, stencils: StencilTable, cfg: SolverConfig):
    """One damped Jacobi sweep; returns (new field, sup change over interior)."""
    field = np.asarray(field, dtype=float)
    medians = _stencil_medians(field, stencils, cfg)
    new_field = field.copy()
    updated = (1.0 - cfg.damping) * field[stencils.interior_idx] + cfg.damping * medians
    new_field[stencils.interior_idx] = updated
    sup_change = float(np.max(np.abs(updated - field[stencils.interior_idx]), initial=0.0))
    return new_field, sup_change


@dataclass
class SolveReport:
    """Converged (or flagged) field with iteration and residual statistics."""

    field: np.ndarray
    iterations: int
    final_change: float
    residual_max: float
    converged: bool
    data_range: float

    def to_json_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "final_change": self.final_change,
            "residual_max": self.residual_max,
            "converged": self.converged,
            "data_range": self.data_range,
            "nodes": int(self.field.size),
        }


def solve(dom: GridDomain, boundary_data, initial, cfg: SolverConfig) -> SolveReport:
    """Iterate the median update to a discrete fixed point.

    ``boundary_data`` is evaluated on the collar (callable on (n, m) coords,
    or a constant); ``initial`` seeds the interior the same way.  Stops when
    the sup-change drops below tol_sup * min(1, boundary data range); hitting
    max_iters flags the report instead of raising.
    """
    field = np.empty(dom.n_nodes)
    if callable(initial):
        field[:] = np.asarray(initial(dom.coords), dtype=float)
    else:
        field[:] = float(initial)
    collar_vals = (
        np.asarray(boundary_data(dom.coords[dom.collar_idx]), dtype=float)
        if callable(boundary_data)
        else np.full(dom.collar_idx.size, float(boundary_data))
    )
    if not np.all(np.isfinite(collar_vals)):
        raise DomainError("boundary data must be finite on the collar")
    field[dom.collar_idx] = collar_vals

    data_range = float(collar_vals.max() - collar_vals.min())
    threshold = cfg.tol_sup * min(1.0, data_range if data_range > 0 else 1.0)

    stencils = build_stencils(dom, cfg)
    change = math.inf
    iterations = 0
    converged = False
    for iterations in range(1, cfg.max_iters + 1):
        field, change = relax_once(field, stencils, cfg)
        if change <= threshold:
            converged = True
            break

    residual = np.abs(_stencil_medians(field, stencils, cfg) - field[stencils.interior_idx])
    residual_max = float(residual.max(initial=0.0))
    return SolveReport(
        field=field,
        iterations=iterations,
        final_change=change,
        residual_max=residual_max,
        converged=converged,
        data_range=data_range,
    )


def builtin_boundary(name: str):
    """Named boundary data for the CLI: saddle, linear, constant:<c>."""
    if name == "saddle":
        return lambda c: c[..., 0] ** 2 - c[..., 1] ** 2
    if name == "linear":
        return lambda c: c[..., 0]
    if name.startswith("constant:"):
        value = float(name.split(":", 1)[1])
        return lambda c: np.full(c.shape[:-1], value)
    raise DomainError(f"unknown boundary data {name!r} (use saddle, linear, constant:<c>)")
