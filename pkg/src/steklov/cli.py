"""Command-line interface.

Subcommands: graph-gen, graph-spectrum, piece-build, glue, solve,
sloshing, growth, verify, report. Exit codes: 0 success, 2 usage,
3 validation error, 4 solver error, 5 artifact I/O error. Every failure
prints a single "ErrorType: message" line to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .build import (
    FundamentalPiece,
    build_flat_cylinder,
    build_fundamental_piece,
    glue_surface,
)
from .errors import (
    ArtifactIOError,
    InvalidParams,
    RunInvariantViolated,
    SolverError,
    ValidationError,
)
from .experiments import (
    GrowthRunConfig,
    check_kokarev,
    comparison_ratio_report,
    doubled_piece_lambda1,
    growth_slope,
    run_growth,
)
from .graphs import (
    laplacian_spectrum,
    load_graph,
    sample_expander,
    save_graph,
)
from .mesh import euler_genus, load_mesh, save_mesh
from .seeding import derive_rng
from .spectra import (
    BoundaryCondition,
    EigenOptions,
    neumann_lambda1,
    sloshing_mu1,
    sloshing_oracle,
    steklov_spectrum,
)

GROWTH_DEFAULTS = {
    "k": 4,
    "sizes": (8, 12, 16, 24, 32),
    "gap_threshold": 0.2,
    "n_b": 16,
    "resolution": 4,
    "seed": 7,
    "jobs": 1,
    "n_eigs": 8,
    "tol_res": 1e-8,
    "max_iterations": 2000,
    "dense_fallback_threshold": 2000,
}

_CONFIG_PARSERS = {
    "k": int,
    "sizes": lambda v: _parse_sizes(v),
    "gap_threshold": float,
    "n_b": int,
    "resolution": int,
    "seed": int,
    "jobs": int,
    "n_eigs": int,
    "tol_res": float,
    "max_iterations": int,
    "dense_fallback_threshold": int,
}


def _parse_sizes(text) -> tuple[int, ...]:
    if isinstance(text, (list, tuple)):
        return tuple(int(v) for v in text)
    try:
        return tuple(int(part) for part in str(text).split(",") if part.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad sizes list {text!r}: {exc}") from exc


def _read_config_file(path: str) -> dict:
    """key = value lines; keys must be known growth-config keys."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ArtifactIOError(f"cannot read config {path}: {exc}") from exc
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise InvalidParams(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key = key.strip()
        if key not in GROWTH_DEFAULTS:
            raise InvalidParams(f"{path}:{lineno}: unknown config key {key!r}")
        try:
            out[key] = _CONFIG_PARSERS[key](value.strip())
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise InvalidParams(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return out


def _print(*parts) -> None:
    print(*parts, flush=True)


# --- subcommand implementations --------------------------------------------------


def cmd_graph_gen(args) -> int:
    rng = derive_rng(args.seed, "graph", args.n)
    g = sample_expander(args.n, args.k, args.gap, rng, max_attempts=args.attempts)
    spec = laplacian_spectrum(g)
    save_graph(g, args.out)
    _print(f"n = {g.n_vertices}  k = {g.degree}  edges = {g.n_edges}")
    _print(f"lambda1 = {spec.lambda1!r}")
    _print(f"wrote {args.out}")
    return 0


def cmd_graph_spectrum(args) -> int:
    g = load_graph(getattr(args, "in"))
    spec = laplacian_spectrum(g)
    shown = spec.eigenvalues[: args.n_eigs]
    for i, val in enumerate(shown):
        _print(f"lambda_{i} = {float(val)!r}")
    if len(spec.eigenvalues) > len(shown):
        _print(f"... ({len(spec.eigenvalues) - len(shown)} more)")
    return 0


def cmd_piece_build(args) -> int:
    piece = build_fundamental_piece(args.k, args.nb, args.resolution)
    save_mesh(piece.mesh, args.out)
    chi, b, genus = euler_genus(piece.mesh)
    _print(
        f"vertices = {piece.mesh.n_vertices}  triangles = {len(piece.mesh.triangles)}  "
        f"loops = {b}  genus = {genus}"
    )
    _print(f"wrote {args.out}")
    return 0


def cmd_glue(args) -> int:
    piece = FundamentalPiece.from_mesh(load_mesh(args.piece))
    g = load_graph(args.graph)
    surface = glue_surface(piece, g, twist=args.twist)
    save_mesh(surface.mesh, args.out)
    chi, b, genus = euler_genus(surface.mesh)
    _print(
        f"copies = {surface.n_copies}  vertices = {surface.mesh.n_vertices}  "
        f"loops = {b}  genus = {genus}"
    )
    _print(f"wrote {args.out}")
    return 0


def cmd_solve(args) -> int:
    mesh = load_mesh(args.mesh)
    opts = EigenOptions(
        n_eigs=args.n_eigs,
        tol_res=args.tol_res,
        max_iterations=args.max_iterations,
        dense_fallback_threshold=args.dense_threshold,
    )
    if args.problem == "neumann":
        lam1 = neumann_lambda1(mesh, opts)
        _print(f"lambda_1 = {lam1!r}")
        return 0
    loops = tuple(s for s in args.loops.split(",") if s) if args.loops else None
    spectrum = steklov_spectrum(mesh, opts, loops=loops)
    for i, val in enumerate(spectrum.sigmas):
        _print(f"sigma_{i} = {float(val)!r}")
    _print(
        f"solver = {spectrum.solver}  boundary_unknowns = {spectrum.n_boundary_unknowns}  "
        f"max_residual = {float(spectrum.residuals.max())!r}"
    )
    if args.out:
        payload = json.dumps(spectrum.to_record(), indent=2, sort_keys=True) + "\n"
        Path(args.out).write_text(payload, encoding="utf-8")
        _print(f"wrote {args.out}")
    return 0


def cmd_sloshing(args) -> int:
    cylinder = build_flat_cylinder(args.nb, args.layers, 1.0, args.length)
    opts = EigenOptions(n_eigs=args.n_eigs)
    mu = sloshing_mu1(cylinder, BoundaryCondition.one_steklov(cylinder, "bottom"), opts)
    oracle = sloshing_oracle(args.length)
    _print(f"mu_1 = {mu!r}  oracle = {oracle!r}  rel_err = {abs(mu - oracle) / oracle:.3e}")
    return 0


def _growth_config(args, parser: argparse.ArgumentParser) -> GrowthRunConfig:
    merged = dict(GROWTH_DEFAULTS)
    if args.config:
        try:
            merged.update(_read_config_file(args.config))
        except (InvalidParams, ArtifactIOError) as exc:
            parser.error(str(exc))
    flags = {
        "k": args.k,
        "sizes": _parse_sizes(args.sizes) if args.sizes is not None else None,
        "gap_threshold": args.gap,
        "n_b": args.nb,
        "resolution": args.resolution,
        "seed": args.seed,
        "jobs": args.jobs,
        "n_eigs": args.n_eigs,
        "tol_res": args.tol_res,
        "max_iterations": args.max_iterations,
        "dense_fallback_threshold": args.dense_threshold,
    }
    merged.update({key: val for key, val in flags.items() if val is not None})
    eig = EigenOptions(
        n_eigs=merged["n_eigs"],
        tol_res=merged["tol_res"],
        max_iterations=merged["max_iterations"],
        dense_fallback_threshold=merged["dense_fallback_threshold"],
    )
    return GrowthRunConfig(
        sizes=tuple(merged["sizes"]),
        k=merged["k"],
        gap_threshold=merged["gap_threshold"],
        n_b=merged["n_b"],
        resolution=merged["resolution"],
        seed=merged["seed"],
        eig=eig,
        jobs=merged["jobs"],
    )


def cmd_growth(args, parser: argparse.ArgumentParser) -> int:
    from .report import export_report

    config = _growth_config(args, parser)
    try:
        records = run_growth(config)
    except RunInvariantViolated as exc:
        partial = getattr(exc, "records", [])
        if partial:
            export_report(args.out, partial, config)
            print(f"partial run ({len(partial)} records) persisted to {args.out}", file=sys.stderr)
        raise
    piece = build_fundamental_piece(config.k, config.n_b, config.resolution)
    constants = {
        "mu_collar": records[0].mu_collar,
        "doubled_piece_lambda1": doubled_piece_lambda1(piece, config.eig),
    }
    paths = export_report(args.out, records, config, constants=constants)
    for rec in records:
        _print(
            f"N = {rec.n}  lambda1 = {rec.lambda1_graph!r}  sigma1 = {rec.sigma1!r}  "
            f"sigma1*L = {rec.sigma1_times_l!r}  ratio = {rec.ratio!r}"
        )
    if len(records) >= 2:
        _print(f"slope = {growth_slope(records)!r}")
        ratio = comparison_ratio_report(records)
        _print(f"alpha_hat = {ratio.alpha_hat!r}  beta_hat = {ratio.beta_hat!r}  spread = {ratio.spread!r}")
    for kind in ("csv", "json", "svg"):
        _print(f"wrote {paths[kind]}")
    return 0


def cmd_verify(args) -> int:
    from .report import load_report_json

    try:
        text = Path(args.report).read_text(encoding="utf-8")
    except OSError as exc:
        raise ArtifactIOError(f"cannot read {args.report}: {exc}") from exc
    records, config_echo, _ = load_report_json(text)
    if not records:
        raise RunInvariantViolated("report carries no records")
    config = GrowthRunConfig(
        sizes=tuple(r.n for r in records),
        k=int(config_echo["k"]) if config_echo else 4,
        gap_threshold=float(config_echo["gap_threshold"]) if config_echo else 0.2,
    )
    failures = 0
    for rec in records:
        checks = {
            "kokarev": check_kokarev(rec),
            "upper": rec.sigma1 <= rec.trial_quotient + 1e-8,
            "lower": rec.sigma1 >= rec.lower_bound - 1e-6,
            "local_margin": rec.local_margin >= -1e-6,
            "global_margin": rec.global_margin >= -1e-9,
            "gap": rec.lambda1_graph >= config.gap_threshold,
            "length": abs(rec.l_boundary - rec.n) <= 1e-6,
        }
        bad = [name for name, ok in checks.items() if not ok]
        if bad:
            failures += 1
            _print(f"N = {rec.n}: FAIL ({', '.join(bad)})")
        else:
            _print(f"N = {rec.n}: ok")
    if len(records) >= 2:
        ratio = comparison_ratio_report(records)
        _print(f"slope = {growth_slope(records)!r}  spread = {ratio.spread!r}")
    if failures:
        raise RunInvariantViolated(f"{failures} of {len(records)} records failed verification")
    _print(f"all {len(records)} records verified")
    return 0


def cmd_report(args) -> int:
    from .report import export_report, load_report_json

    try:
        text = Path(getattr(args, "in")).read_text(encoding="utf-8")
    except OSError as exc:
        raise ArtifactIOError(f"cannot read {getattr(args, 'in')}: {exc}") from exc
    records, config_echo, constants = load_report_json(text)
    paths = export_report(args.out, records, config_echo, constants=constants)
    for kind in ("csv", "json", "svg"):
        _print(f"wrote {paths[kind]}")
    return 0


# --- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="steklov",
        description="Steklov spectra of surfaces glued from regular graphs.",
    )
    parser.add_argument("--version", action="version", version=f"steklov {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("graph-gen", help="sample a gap-certified k-regular graph")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--gap", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--attempts", type=int, default=1000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_graph_gen)

    p = sub.add_parser("graph-spectrum", help="Laplacian spectrum of a graph file")
    p.add_argument("--in", required=True)
    p.add_argument("--n-eigs", type=int, default=8)
    p.set_defaults(func=cmd_graph_spectrum)

    p = sub.add_parser("piece-build", help="build the fundamental piece mesh")
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--nb", type=int, default=16)
    p.add_argument("--resolution", type=int, default=4)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_piece_build)

    p = sub.add_parser("glue", help="glue piece copies along a graph")
    p.add_argument("--piece", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--twist", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_glue)

    p = sub.add_parser("solve", help="Steklov or Neumann spectrum of a mesh file")
    p.add_argument("--mesh", required=True)
    p.add_argument("--problem", choices=("steklov", "neumann"), default="steklov")
    p.add_argument("--loops", default=None, help="comma-separated Steklov loop labels")
    p.add_argument("--n-eigs", type=int, default=8)
    p.add_argument("--tol-res", type=float, default=1e-8)
    p.add_argument("--max-iterations", type=int, default=2000)
    p.add_argument("--dense-threshold", type=int, default=2000)
    p.add_argument("--out", default=None, help="write the spectrum record as JSON")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sloshing", help="collar sloshing eigenvalue vs oracle")
    p.add_argument("--nb", type=int, default=32)
    p.add_argument("--layers", type=int, default=16)
    p.add_argument("--length", type=float, default=1.0)
    p.add_argument("--n-eigs", type=int, default=4)
    p.set_defaults(func=cmd_sloshing)

    p = sub.add_parser("growth", help="full growth experiment; writes csv/json/svg")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--sizes", default=None, help="comma-separated N values")
    p.add_argument("--gap", type=float, default=None)
    p.add_argument("--nb", type=int, default=None)
    p.add_argument("--resolution", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--n-eigs", type=int, default=None)
    p.add_argument("--tol-res", type=float, default=None)
    p.add_argument("--max-iterations", type=int, default=None)
    p.add_argument("--dense-threshold", type=int, default=None)
    p.add_argument("--config", default=None, help="key = value file; flags override")
    p.add_argument("--out", required=True)
    p.set_defaults(func=lambda args, _p=p: cmd_growth(args, _p))

    p = sub.add_parser("verify", help="re-check record invariants in a report.json")
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="re-export artifacts from a report.json")
    p.add_argument("--in", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except SystemExit as exc:  # parser.error inside a subcommand
        return int(exc.code) if exc.code is not None else 0
    except ValidationError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except SolverError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 4
    except ArtifactIOError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
