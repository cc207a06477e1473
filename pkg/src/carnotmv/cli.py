"""Command-line front end.

Subcommands: info, constants, median, oracle, sweep, solve.  Results go to
stdout (JSON for scalars, CSV for tables; the solver emits a JSON header
line followed by CSV).  Every run also writes a single-line JSON run
manifest to stderr — subcommand, resolved flags, seed, version, wall
clock, and a sha256 digest of the stdout payload — so any output can be
reproduced from its manifest.  ``--manifest PATH`` additionally saves it
to a file.

Exit codes: 0 success, 2 usage error, 3 domain error, 4 non-convergence
or sampling infeasibility.  With CI_STRICT=1 the randomized subcommands
(oracle, sweep) refuse to run without an explicit --seed.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import os
import secrets
import sys
import time

import numpy as np

from . import __version__
from .ballquad import (
    METHOD_LOWDISC,
    METHOD_PSEUDO,
    QuadratureSpec,
    dirichlet_oracle,
    gamma0_numeric,
    integrate,
    sample_unit_ball,
    singular_weight,
)
from .asymptotics import QuadraticModel, expansion_sweep
from .errors import CarnotError, DomainError, FeasibilityError
from .groups import Euclidean, Heisenberg, Step2, as_stratification, parse_group_spec
from .kernels import BACKEND
from .median import MedianConfig, mu_p_samples
from .solver import GridDomain, SolverConfig, builtin_boundary, solve
from .special import c_constant, dirichlet_integral, moment_I_closed

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_NOT_CONVERGED = 4


def _parse_p(text: str, allow_one=False) -> float:
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    p = float(text)
    lo = 1.0 if allow_one else 1.0 + 1e-15
    if p < lo - 1e-15 or (not allow_one and p <= 1.0):
        raise DomainError(f"p must be {'>= 1' if allow_one else '> 1'} (or 'inf'), got {text}")
    return p


def _parse_vector(text: str) -> np.ndarray:
    return np.array([float(v) for v in text.split(",")])


def _parse_matrix(text: str) -> np.ndarray:
    return np.array([[float(v) for v in row.split(",")] for row in text.split(";")])


def _build_group(args):
    spec = getattr(args, "group", None)
    if spec is None:
        raise DomainError("a --group is required")
    if "=" in spec:
        return parse_group_spec(spec)
    kind = spec.lower()
    if kind == "euclidean":
        return Euclidean(_require(args, "n"))
    if kind == "heisenberg":
        return Heisenberg(_require(args, "n"))
    if kind == "step2":
        n = _require(args, "n")
        tensors = [_parse_matrix(b) for b in (args.B or [])]
        if not tensors:
            raise DomainError("step2 needs at least one --B tensor")
        return Step2(n, np.asarray(tensors))
    raise DomainError(f"unknown group {spec!r}")


def _require(args, name):
    value = getattr(args, name, None)
    if value is None:
        raise DomainError(f"--{name} is required for this group")
    return value


def _stratification(args):
    if getattr(args, "layers", None):
        return as_stratification(tuple(int(v) for v in args.layers.split(",")))
    return _build_group(args).strat


def _resolve_seed(args, parser):
    if getattr(args, "seed", None) is None:
        if os.environ.get("CI_STRICT") == "1":
            parser.error("CI_STRICT=1 requires an explicit --seed for randomized subcommands")
        args.seed = secrets.randbits(32)
    return args.seed


def _quad_spec(args) -> QuadratureSpec:
    return QuadratureSpec(
        n_samples=args.samples, seed=args.seed, method=args.method, batch=args.batch
    )


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_info(args, out):
    payload = {
        "name": "carnotmv",
        "version": __version__,
        "kernel_backend": BACKEND,
        "groups": ["euclidean", "heisenberg", "step2"],
        "subcommands": ["info", "constants", "median", "oracle", "sweep", "solve"],
        "schemas": sorted(os.listdir(os.path.join(os.path.dirname(__file__), "schemas"))),
    }
    json.dump(payload, out, indent=2)
    out.write("\n")
    return EXIT_OK


def _cmd_constants(args, out):
    strat = _stratification(args)
    report = c_constant(args.p, strat)
    json.dump(report.to_json_dict(), out)
    out.write("\n")
    return EXIT_OK


def _cmd_median(args, out):
    if args.input:
        with open(args.input, "r", encoding="utf-8") as fh:
            raw = fh.read()
    else:
        raw = sys.stdin.read()
    values, weights = [], []
    for line in raw.replace("−", "-").splitlines():
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        values.append(float(parts[0]))
        weights.append(float(parts[1]) if len(parts) > 1 else 1.0)
    mu = mu_p_samples(
        np.array(values),
        np.array(weights),
        MedianConfig(p=args.p, tol_lambda=args.tol),
    )
    out.write(f"{mu:.15g}\n")
    return EXIT_OK


def _cmd_oracle(args, out):
    spec = _quad_spec(args)
    target = args.target
    if target == "dirichlet":
        if not args.alphas:
            raise DomainError("--alphas is required for the dirichlet target")
        alphas = _parse_vector(args.alphas)
        est = dirichlet_oracle(alphas, spec)
        closed = dirichlet_integral(alphas)
    elif target == "momentI":
        strat = _stratification(args)
        p = args.p if args.p is not None else 2.0
        cloud = sample_unit_ball(strat, spec, threads=args.threads)
        est = integrate(cloud, singular_weight(cloud.points[:, 0], p))
        closed = moment_I_closed(p, strat)
    elif target == "gamma0":
        strat = _stratification(args)
        if args.p is None or args.C is None:
            raise DomainError("--p and --C are required for the gamma0 target")
        C = _parse_matrix(args.C)
        eta = _parse_vector(args.eta) if args.eta else None
        est = gamma0_numeric(strat, args.p, C, eta, spec)
        closed = c_constant(args.p, strat).c_value * (
            float(np.trace(C)) + (args.p - 2.0) * float(C[0, 0])
        )
    elif target == "volume":
        strat = _stratification(args)
        cloud = sample_unit_ball(strat, spec, radius=args.radius, threads=args.threads)
        est = integrate(cloud, np.ones(cloud.n_points))
        closed = moment_I_closed(2.0, strat) * args.radius**strat.hom_dim
    else:  # pragma: no cover - argparse choices guard this
        raise DomainError(f"unknown target {target}")
    payload = {
        "target": target,
        "value": est.value,
        "std_error": est.std_error,
        "closed_form": closed,
        "z_score": est.z_score(closed),
        "n": est.n,
    }
    json.dump(payload, out)
    out.write("\n")
    return EXIT_OK


def _cmd_sweep(args, out):
    g = _build_group(args)
    strat = g.strat
    v1 = strat.layer_dims[0]
    xi = _parse_vector(args.xi)
    A = _parse_matrix(args.A) if args.A else np.zeros((v1, v1))
    eta = _parse_vector(args.eta) if args.eta else None
    x = _parse_vector(args.x) if args.x else np.zeros(strat.total_dim)
    model = QuadraticModel(strat=strat, q0=args.q0, xi=xi, A=A, eta=eta, x=x)
    report = expansion_sweep(g, model, args.p, args.eps0, args.levels, _quad_spec(args))
    if args.out == "json":
        json.dump(report.to_json_dict(), out)
        out.write("\n")
    else:
        out.write("eps,mu,mu_minus_q0,predicted,fitted,rel_error\n")
        for eps, mu in zip(report.eps_list, report.mu_values):
            out.write(
                f"{eps:.12g},{mu:.12g},{mu - args.q0:.12g},"
                f"{report.predicted_coeff:.12g},{report.fitted_coeff:.12g},"
                f"{report.rel_error:.6g}\n"
            )
    return EXIT_OK


def _cmd_solve(args, out):
    g = _build_group(args)
    box = _parse_matrix(args.box)
    if box.shape != (g.strat.total_dim, 2):
        raise DomainError(
            f"--box must give min,max per coordinate ({g.strat.total_dim} rows), got {box.shape}"
        )
    dom = GridDomain(g, box[:, 0], box[:, 1], args.h, args.eps)
    cfg = SolverConfig(
        p=args.p,
        eps=args.eps,
        tol_sup=args.tol,
        max_iters=args.max_iters,
        damping=args.damping,
    )
    report = solve(dom, builtin_boundary(args.bc), args.initial, cfg)
    json.dump(report.to_json_dict(), out)
    out.write("\n")
    header = ",".join(f"x{i + 1}" for i in range(g.strat.total_dim)) + ",value\n"
    out.write(header)
    for row, val in zip(dom.coords, report.field):
        out.write(",".join(f"{v:.12g}" for v in row) + f",{val:.12g}\n")
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


# ---------------------------------------------------------------------------
# parser / dispatch
# ---------------------------------------------------------------------------


def _add_group_flags(sp):
    sp.add_argument("--group", help="group name or full 'group=... n=...' specification")
    sp.add_argument("--n", type=int, help="first-layer dimension (euclidean/heisenberg/step2)")
    sp.add_argument("--k", type=int, help="second-layer dimension (step2)")
    sp.add_argument("--B", action="append", help="step2 skew tensor rows 'a,b;c,d' (repeatable)")


def _add_sampling_flags(sp):
    sp.add_argument("--samples", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--method", choices=[METHOD_PSEUDO, METHOD_LOWDISC], default=METHOD_PSEUDO)
    sp.add_argument("--batch", type=int, default=16)
    sp.add_argument("--threads", type=int, default=os.cpu_count() or 1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="carnotmv",
        description="Generalized medians, mean-value expansions and p-harmonic "
        "iteration on Carnot-group pseudoballs.",
    )
    parser.add_argument("--manifest", help="also write the run manifest JSON to this path")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    sub.add_parser("info", help="version, kernel backend, available schemas")

    sp = sub.add_parser("constants", help="expansion constant report as JSON")
    _add_group_flags(sp)
    sp.add_argument("--layers", help="stratification as comma list, e.g. 3,2,1")
    sp.add_argument("--p", type=lambda s: _parse_p(s), required=True)

    sp = sub.add_parser("median", help="generalized median of CSV values (stdin or --input)")
    sp.add_argument("--p", type=lambda s: _parse_p(s, allow_one=True), required=True)
    sp.add_argument("--tol", type=float, default=1e-12)
    sp.add_argument("--input", help="CSV file, one 'value' or 'value,weight' per line")

    sp = sub.add_parser("oracle", help="Monte-Carlo estimate vs closed form, as JSON")
    sp.add_argument("--target", choices=["dirichlet", "momentI", "gamma0", "volume"], required=True)
    sp.add_argument("--alphas", help="comma list of exponents (dirichlet)")
    sp.add_argument("--p", type=lambda s: _parse_p(s), default=None)
    sp.add_argument("--layers", help="stratification as comma list")
    _add_group_flags(sp)
    sp.add_argument("--C", help="symmetric matrix rows 'a,b;c,d' (gamma0)")
    sp.add_argument("--eta", help="second-layer vector 'a,b' (gamma0)")
    sp.add_argument("--radius", type=float, default=2.0, help="ball radius (volume)")
    _add_sampling_flags(sp)

    sp = sub.add_parser("sweep", help="expansion sweep over shrinking radii")
    _add_group_flags(sp)
    sp.add_argument("--p", type=lambda s: _parse_p(s), required=True)
    sp.add_argument("--xi", required=True, help="horizontal gradient 'a,b'")
    sp.add_argument("--eta", help="second-layer coefficient 'c'")
    sp.add_argument("--A", help="symmetric matrix rows 'a11,a12;a21,a22'")
    sp.add_argument("--x", help="base point coordinates 'a,b,c'")
    sp.add_argument("--q0", type=float, default=0.0)
    sp.add_argument("--eps0", type=float, default=0.4)
    sp.add_argument("--levels", type=int, default=6)
    sp.add_argument("--out", choices=["csv", "json"], default="csv")
    _add_sampling_flags(sp)

    sp = sub.add_parser("solve", help="Dirichlet problem by median iteration")
    _add_group_flags(sp)
    sp.add_argument("--box", required=True, help="per-coordinate 'min,max' rows: '0,1;0,1'")
    sp.add_argument("--h", type=float, required=True)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--p", type=lambda s: _parse_p(s, allow_one=True), required=True)
    sp.add_argument("--bc", default="saddle", help="saddle | linear | constant:<c>")
    sp.add_argument("--initial", type=float, default=0.0)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--max-iters", type=int, default=100_000, dest="max_iters")
    sp.add_argument("--damping", type=float, default=1.0)
    sp.add_argument("--threads", type=int, default=os.cpu_count() or 1)

    return parser


_HANDLERS = {
    "info": _cmd_info,
    "constants": _cmd_constants,
    "median": _cmd_median,
    "oracle": _cmd_oracle,
    "sweep": _cmd_sweep,
    "solve": _cmd_solve,
}

_RANDOMIZED = {"oracle", "sweep"}


def _manifest(args, payload: str, elapsed: float) -> dict:
    resolved = {
        k: v for k, v in sorted(vars(args).items()) if k not in ("subcommand", "manifest") and v is not None
    }
    return {
        "subcommand": args.subcommand,
        "flags": resolved,
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "wall_time_s": round(elapsed, 6),
        "output_sha256": hashlib.sha256(payload.encode("utf-8")).hexdigest(),
    }


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.subcommand in _RANDOMIZED:
        _resolve_seed(args, parser)
    buffer = io.StringIO()
    start = time.perf_counter()
    try:
        code = _HANDLERS[args.subcommand](args, buffer)
    except FeasibilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except CarnotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    payload = buffer.getvalue()
    sys.stdout.write(payload)
    manifest = _manifest(args, payload, time.perf_counter() - start)
    print(json.dumps(manifest), file=sys.stderr)
    if args.manifest:
        with open(args.manifest, "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2)
            fh.write("\n")
    return code


if __name__ == "__main__":
    raise SystemExit(main())
