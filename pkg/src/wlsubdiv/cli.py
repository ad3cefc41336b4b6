"""``wlsubdiv`` command line.

Every failure exits nonzero and writes one JSON line to stderr::

    {"error": "<code>", "exit": <int>, "message": "..."}

``WLSUBDIV_NUM_THREADS`` (or ``--threads``) caps the BLAS/OpenMP pools.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from contextlib import nullcontext

import numpy as np

from . import __version__
from .errors import ConfigError, WLSError

THREADS_ENV = "WLSUBDIV_NUM_THREADS"

EXIT_CODES = {
    "checks_failed": 1,
    "usage": 2,
    "parse_error": 3,
    "io_error": 4,
    "invalid_mesh": 5,
    "weight_domain": 6,
    "stencil_lacks_face": 7,
    "singular_wls_system": 8,
    "mask_error": 9,
    "degenerate_neighborhood": 10,
    "invalid_config": 11,
    "wls_error": 12,
    "internal": 70,
}


def _grid_spec(text):
    """``x0:x1:nx,y0:y1:ny`` -> (M, 2) target points."""
    try:
        axes = []
        for part in text.split(","):
            a, b, n = part.split(":")
            axes.append(np.linspace(float(a), float(b), int(n)))
        gx, gy = np.meshgrid(axes[0], axes[1], indexing="xy")
    except (ValueError, IndexError):
        raise ConfigError(f"bad grid spec {text!r}; expected x0:x1:nx,y0:y1:ny") from None
    return np.column_stack([gx.ravel(), gy.ravel()])


def _L_arg(text):
    return text if text == "auto" else float(text)


def _write_text(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _points_csv(points, values):
    lines = ["x,y,value"]
    lines += [f"{p[0]:.17g},{p[1]:.17g},{z:.17g}" for p, z in zip(points, values)]
    return "\n".join(lines) + "\n"


# --- subcommands ------------------------------------------------------------------

def cmd_refine(args):
    from .experiments import ExperimentConfig, run_refine
    cfg = ExperimentConfig(mesh=args.mesh, weight=args.weight, L=args.L,
                           iterations=args.iterations, noise_sd=args.noise, seed=args.seed,
                           function=args.function, values=args.values, out_dir=args.out,
                           save_maps=args.save_maps)
    res = run_refine(cfg)
    counts = res.provenance["vertex_counts"]
    print(f"refined {counts[0]} -> {counts[-1]} vertices in {cfg.iterations} steps "
          f"(L={res.provenance['L']:.17g}, W={res.provenance['weight']}); wrote {args.out}")
    return 0


def cmd_mask(args):
    from .uniform_masks import UniformGrid, derive_mask, paper_matrix
    grid = UniformGrid.from_kind(args.grid)
    L = args.L if args.L is not None else (1.6 if grid.kind == "equilateral" else 1.7)
    mask = derive_mask(grid, args.weight, L)
    payload = mask.to_dict()
    if args.compare_published:
        P = paper_matrix(grid.kind, mask.weight, L)
        payload["published_max_abs_diff"] = float(np.abs(mask.to_matrix(7) - P).max())
    if args.format == "json":
        text = json.dumps(payload, indent=2) + "\n"
    else:
        den = None
        if args.format == "rational":
            den = args.denominator or (70 if grid.kind == "equilateral" else 72)
        text = mask.format_matrix(den) + "\n"
        if "published_max_abs_diff" in payload:
            text += f"max |derived - published| = {payload['published_max_abs_diff']:.3e}\n"
    _write_text(args.out, text)
    return 0


def cmd_limitfn(args):
    from .uniform_masks import UniformGrid, basic_limit_function
    grid = UniformGrid.from_kind(args.grid)
    L = args.L if args.L is not None else (1.6 if grid.kind == "equilateral" else 1.7)
    v, z, _ = basic_limit_function(grid, args.weight, L, args.iterations, data=args.data)
    _write_text(args.out, _points_csv(v, z))
    return 0


def cmd_verify(args):
    from .verification import run_battery
    results = run_battery(quick=not args.full, seed=args.seed)
    report = {"version": __version__, "full": bool(args.full), "seed": args.seed,
              "passed": all(r.passed for r in results),
              "checks": [r.to_dict() for r in results]}
    _write_text(args.out, json.dumps(report, indent=2) + "\n")
    if args.out not in (None, "-"):
        for r in results:
            print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.value:.6g} ({r.detail})")
    return 0 if report["passed"] else EXIT_CODES["checks_failed"]


def cmd_baseline(args):
    from .baselines import ScatteredData, mls1, shepard
    from .experiments import ExperimentConfig, load_inputs
    cfg = ExperimentConfig(mesh=args.mesh, weight=args.weight, iterations=0,
                           noise_sd=args.noise, seed=args.seed, function=args.function,
                           values=args.values)
    tri, z, _ = load_inputs(cfg)
    if z.ndim != 1:
        raise ConfigError("baseline needs a single value column")
    targets = _grid_spec(args.grid)
    fn = mls1 if args.method == "mls" else shepard
    out = fn(ScatteredData(tri.vertices, z), args.weight, args.L, targets)
    _write_text(args.out, _points_csv(targets, out))
    return 0


def cmd_experiment62(args):
    from .experiments import ExperimentConfig, TABLE_ROWS, format_table, run_comparison_experiment
    cfg = ExperimentConfig(mesh=args.mesh, iterations=args.iterations, noise_sd=args.noise,
                           seed=args.seed, function="sincos")
    rows = run_comparison_experiment(cfg, methods=args.methods, Ls=args.L, rows=TABLE_ROWS)
    print(format_table(rows))
    if args.out:
        from .io import save_json
        save_json(args.out, {"version": __version__, "seed": args.seed, "mesh": args.mesh,
                             "noise_sd": args.noise, "iterations": args.iterations,
                             "rows": rows})
    if args.csv:
        lines = ["method,W,L,E2,Einf,n_points"]
        for r in rows:
            L = "" if r["L"] is None else f"{r['L']:.17g}"
            lines.append(f"{r['method']},{r['W'] or ''},{L},{r['E2']:.17g},"
                         f"{r['Einf']:.17g},{r['n_points']}")
        _write_text(args.csv, "\n".join(lines) + "\n")
    return 0


def cmd_surface(args):
    from .geom3d import (Triangulation3, icosphere, radial_noise, radial_rms,
                         surface_subdivide)
    from .io import read_mesh, save_json, write_mesh
    if args.input:
        v, f = read_mesh(args.input, dim=3)
        mesh = Triangulation3(v, f)
    else:
        mesh = icosphere(args.sphere)
    if args.noise > 0:
        mesh = radial_noise(mesh, args.noise, np.random.Generator(np.random.Philox(args.seed)))
    L = args.L if args.L is not None else args.L_factor * float(mesh.edge_lengths().max())
    out = surface_subdivide(mesh, args.weight, L, args.iterations)
    write_mesh(args.out, out.vertices, out.faces)
    report = {"version": __version__, "L": L, "weight": args.weight,
              "iterations": args.iterations, "n_vertices": [mesh.n_vertices, out.n_vertices]}
    if not args.input:
        report["radial_rms"] = [radial_rms(mesh), radial_rms(out)]
    if args.report:
        save_json(args.report, report)
    print(json.dumps(report))
    return 0


# --- parser ---------------------------------------------------------------------

class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Reports usage errors through the JSON error line instead of exiting."""

    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def build_parser():
    p = _Parser(prog="wlsubdiv", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"wlsubdiv {__version__}")
    p.add_argument("--threads", type=int, default=None,
                   help=f"thread cap for numeric libraries (overrides ${THREADS_ENV})")
    sub = p.add_subparsers(dest="command", required=True)

    def weight_opt(sp, default="hat"):
        sp.add_argument("--weight", default=default,
                        help="constant|hat|gaussian|table:<path> (default %(default)s)")

    def data_opts(sp):
        sp.add_argument("--mesh", default="fixture",
                        help="OFF/OBJ path, fixture[:seed] or lattice:<grid>:<n>")
        sp.add_argument("--values", help="vertex_index,value CSV (default: sample --function)")
        sp.add_argument("--function", default="sincos",
                        help="sincos|linear|quadratic|one|zero (default %(default)s)")
        sp.add_argument("--noise", type=float, default=0.0, help="Gaussian noise sd")
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("refine", help="subdivide scalar data on a planar mesh")
    data_opts(sp)
    weight_opt(sp)
    sp.add_argument("--L", type=_L_arg, default="auto",
                    help="level-0 ball radius, or 'auto' = 1.6 x diameter")
    sp.add_argument("--iterations", type=int, default=5)
    sp.add_argument("--out", required=True, help="output directory")
    sp.add_argument("--save-maps", action="store_true", help="also write refinement maps")
    sp.set_defaults(func=cmd_refine)

    sp = sub.add_parser("mask", help="derive a uniform-grid mask")
    sp.add_argument("--grid", default="equilateral", choices=["equilateral", "rectangular"])
    weight_opt(sp, "constant")
    sp.add_argument("--L", type=float, default=None, help="default 1.6 / 1.7")
    sp.add_argument("--format", default="json", choices=["json", "text", "rational"])
    sp.add_argument("--denominator", type=int, default=None)
    sp.add_argument("--compare-published", action="store_true")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_mask)

    sp = sub.add_parser("limitfn", help="basic limit function samples as CSV")
    sp.add_argument("--grid", default="equilateral", choices=["equilateral", "rectangular"])
    weight_opt(sp, "constant")
    sp.add_argument("--L", type=float, default=None)
    sp.add_argument("--iterations", type=int, default=5)
    sp.add_argument("--data", default="delta", choices=["delta", "ones"])
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_limitfn)

    sp = sub.add_parser("verify", help="run the property battery, JSON report")
    sp.add_argument("--full", action="store_true", help="acceptance-size samples")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("baseline", help="Shepard / MLS approximation on a target grid")
    sp.add_argument("--method", required=True, choices=["shepard", "mls"])
    data_opts(sp)
    weight_opt(sp)
    sp.add_argument("--L", type=float, required=True)
    sp.add_argument("--grid", default="-1:1:21,-1:1:21", help="x0:x1:nx,y0:y1:ny (write --grid=-1:1:21,... for negative starts)")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_baseline)

    sp = sub.add_parser("experiment62", help="noisy sin*cos method comparison table")
    sp.add_argument("--mesh", default="fixture")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--noise", type=float, default=0.2)
    sp.add_argument("--iterations", type=int, default=5)
    sp.add_argument("--methods", nargs="+", default=["subdivision", "shepard", "mls"],
                    choices=["subdivision", "shepard", "mls"])
    sp.add_argument("--L", type=float, nargs="+", default=[1.0, 2.0])
    sp.add_argument("--out", default=None, help="JSON table")
    sp.add_argument("--csv", default=None, help="CSV table")
    sp.set_defaults(func=cmd_experiment62)

    sp = sub.add_parser("surface", help="refine a noisy 3D surface mesh")
    sp.add_argument("--in", dest="input", default=None, help="OFF/OBJ surface")
    sp.add_argument("--sphere", type=int, default=3, help="icosphere level if no --in")
    sp.add_argument("--noise", type=float, default=0.0, help="radial noise sd")
    sp.add_argument("--seed", type=int, default=0)
    weight_opt(sp)
    sp.add_argument("--L", type=float, default=None, help="absolute ball radius")
    sp.add_argument("--L-factor", type=float, default=1.6, help="L = factor x longest edge")
    sp.add_argument("--iterations", type=int, default=1)
    sp.add_argument("--out", required=True)
    sp.add_argument("--report", default=None)
    sp.set_defaults(func=cmd_surface)
    return p


def _thread_limit(n):
    if n is None:
        env = os.environ.get(THREADS_ENV)
        if not env:
            return nullcontext()
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    if n < 1:
        raise ConfigError("thread count must be >= 1")
    from threadpoolctl import threadpool_limits
    return threadpool_limits(limits=n)


def _fail(code, message):
    exit_code = EXIT_CODES.get(code, EXIT_CODES["wls_error"])
    sys.stderr.write(json.dumps({"error": code, "exit": exit_code, "message": message}) + "\n")
    return exit_code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        return _fail("usage", str(exc))
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        with _thread_limit(args.threads):
            return args.func(args)
    except WLSError as exc:
        return _fail(exc.code, str(exc))
    except OSError as exc:
        return _fail("io_error", f"{exc.filename}: {exc.strerror}" if exc.filename else str(exc))
    except (ValueError, KeyError) as exc:
        return _fail("invalid_config", str(exc))


if __name__ == "__main__":
    sys.exit(main())
