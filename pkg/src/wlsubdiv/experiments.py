"""End-to-end pipelines: refine noisy samples, and the method comparison table.

Everything random flows from one integer seed through a Philox stream, so
a configuration plus its seed determines every output bit for bit.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import error_metrics
from .baselines import ScatteredData, mls1, shepard
from .errors import ConfigError
from .io import load_values, read_mesh, save_json, save_values, write_mesh
from .mesh import (DataLevel, Triangulation2, check_valid, diameter, lattice_patch,
                   scattered_square_mesh)
from .weights import get_weight
from .wls import subdivide

#: test functions selectable by name
FUNCTIONS = {
    "sincos": lambda v: np.sin(v[:, 0]) * np.cos(v[:, 1]),
    "zero": lambda v: np.zeros(len(v)),
    "one": lambda v: np.ones(len(v)),
    "linear": lambda v: 1.0 + 2.0 * v[:, 0] - 3.0 * v[:, 1],
    "quadratic": lambda v: v[:, 0] ** 2 + v[:, 1] ** 2,
}

#: (method, weight) pairs of the published comparison, per L
TABLE_ROWS = (("mls", "hat"), ("mls", "gaussian"), ("shepard", "gaussian"),
              ("subdivision", "hat"), ("subdivision", "gaussian"))


def get_function(name):
    try:
        return FUNCTIONS[name]
    except KeyError:
        raise ConfigError(f"unknown function {name!r}; choose from {sorted(FUNCTIONS)}") from None


def make_mesh(spec: str) -> Triangulation2:
    """Mesh from a path or a generator spec.

    ``fixture[:seed]`` is the 227-vertex scattered square mesh,
    ``lattice:<equilateral|rectangular>:<n>`` a uniform patch, anything
    else is read as an OFF/OBJ file.
    """
    kind, _, rest = spec.partition(":")
    if kind == "fixture":
        return scattered_square_mesh(seed=int(rest) if rest else 0)
    if kind == "lattice":
        grid, _, n = rest.partition(":")
        from .uniform_masks import UniformGrid
        g = UniformGrid.from_kind(grid)
        return lattice_patch(g.e1, g.e2, int(n or 4))[0]
    v, f = read_mesh(spec, dim=2)
    return Triangulation2(v, f)


@dataclass
class ExperimentConfig:
    """Inputs of one refinement run.

    ``L`` is either a positive float, which must exceed the mesh diameter,
    or ``"auto"`` for 1.6 times the diameter. Values come from ``values``
    (a CSV) when given, otherwise from ``function`` sampled at the vertices.
    """

    mesh: str = "fixture"
    weight: str = "hat"
    L: float | str = "auto"
    iterations: int = 5
    noise_sd: float = 0.0
    seed: int = 0
    function: str = "sincos"
    values: str | None = None
    region: tuple = ((-1.0, 1.0), (-1.0, 1.0))
    out_dir: str | None = None
    save_maps: bool = False

    def __post_init__(self):
        if self.iterations < 0:
            raise ConfigError("iterations must be >= 0")
        if not self.noise_sd >= 0:
            raise ConfigError("noise sd must be >= 0")
        if self.L != "auto":
            try:
                self.L = float(self.L)
            except (TypeError, ValueError):
                raise ConfigError(f"L must be a number or 'auto', got {self.L!r}") from None
            if not self.L > 0:
                raise ConfigError("L must be positive")
        get_weight(self.weight)

    def resolve_L(self, tri: Triangulation2) -> float:
        diam = diameter(tri)
        if self.L == "auto":
            return 1.6 * diam
        if not self.L > diam:
            raise ConfigError(f"L={self.L:g} must exceed the mesh diameter {diam:.6g}")
        return float(self.L)


@dataclass
class RefineResult:
    initial: DataLevel
    final: DataLevel
    clean: np.ndarray | None
    provenance: dict = field(default_factory=dict)


def noise(n: int, sd: float, seed: int, columns: int | None = None) -> np.ndarray:
    """Gaussian noise from the Philox stream keyed by ``seed``."""
    rng = np.random.Generator(np.random.Philox(seed))
    shape = (n,) if columns is None else (n, columns)
    return sd * rng.standard_normal(shape)


def load_inputs(config: ExperimentConfig):
    """``(tri, values, clean)``; ``clean`` is None when values come from a file."""
    tri = make_mesh(config.mesh)
    check_valid(tri)
    if config.values is not None:
        z = load_values(config.values, tri.n_vertices)
        clean = None
    else:
        clean = get_function(config.function)(tri.vertices)
        z = clean
    if config.noise_sd > 0:
        z = z + noise(tri.n_vertices, config.noise_sd, config.seed)
    return tri, z, clean


def run_refine(config: ExperimentConfig) -> RefineResult:
    tri, z, clean = load_inputs(config)
    L = config.resolve_L(tri)
    W = get_weight(config.weight)
    t0 = time.perf_counter()
    init = DataLevel(tri, z, 0, L)
    final = subdivide(init, config.iterations, W)
    prov = {
        "package": "wlsubdiv",
        "version": __version__,
        "config": _config_dict(config),
        "L": L,
        "weight": W.name,
        "diameter": diameter(tri),
        "vertex_counts": [tri.n_vertices] + [h["n_vertices"] for h in final.history],
        "levels": final.history,
        "seconds": time.perf_counter() - t0,
    }
    res = RefineResult(init, final, clean, prov)
    if config.out_dir is not None:
        write_refine_artifacts(res, config.out_dir, save_maps=config.save_maps)
    return res


def _config_dict(config):
    d = asdict(config)
    d["region"] = [list(r) for r in config.region]
    # where outputs go does not affect them; keep provenance path-independent
    d.pop("out_dir")
    return d


def write_refine_artifacts(res: RefineResult, out_dir, save_maps=False):
    """Write ``mesh.off``, ``values.csv`` and ``provenance.json`` into ``out_dir``.

    Wall-clock time is kept out of the files so reruns are byte-identical.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_mesh(out / "mesh.off", res.final.tri.vertices, res.final.tri.faces)
    save_values(out / "values.csv", res.final.values)
    prov = {k: v for k, v in res.provenance.items() if k != "seconds"}
    prov["outputs"] = {"mesh": "mesh.off", "values": "values.csv"}
    if save_maps:
        # connectivity only; recomputed since DataLevel does not keep the maps
        from .mesh import midpoint_refine
        maps, t = [], res.initial.tri
        for _ in range(res.final.level):
            t, rmap = midpoint_refine(t, check=False)
            maps.append({"old_count": rmap.old_count,
                         "parent_edge": rmap.parent_edge.tolist()})
        save_json(out / "refinement_maps.json", maps)
        prov["outputs"]["refinement_maps"] = "refinement_maps.json"
    save_json(out / "provenance.json", prov)
    return out


def run_comparison_experiment(config: ExperimentConfig, methods=("subdivision", "shepard", "mls"),
                              Ls=(1.0, 2.0), rows=TABLE_ROWS, include_initial: bool = True):
    """Error table of the noisy sin*cos comparison.

    The subdivision limit is sampled at the level-``iterations`` vertices in
    the region; the scattered-data methods are evaluated at exactly those
    points from the level-0 samples. The initial-data row measures the raw
    samples in the region. Returns a list of dicts with keys ``method, W,
    L, E2, Einf, n_points``.
    """
    methods = tuple(methods)
    if not methods:
        raise ConfigError("methods must be nonempty")
    unknown = set(methods) - {"subdivision", "shepard", "mls"}
    if unknown:
        raise ConfigError(f"unknown methods {sorted(unknown)}")
    tri, z, clean = load_inputs(config)
    F = get_function(config.function)
    out = []
    region = config.region
    for L in Ls:
        cfg = replace(config, L=float(L))
        L = cfg.resolve_L(tri)
        targets = None
        for method, w in rows:
            if method not in methods:
                continue
            W = get_weight(w)
            if method == "subdivision" or targets is None:
                lvl = subdivide(DataLevel(tri, z, 0, L), cfg.iterations, W)
                v = lvl.tri.vertices
                inside = _in_region(v, region)
                targets = v[inside]
                if method == "subdivision":
                    e2, einf = error_metrics(lvl.values, F, v, region)
                    out.append(_row(method, W, L, e2, einf, int(inside.sum())))
                    continue
            data = ScatteredData(tri.vertices, z)
            approx = (mls1 if method == "mls" else shepard)(data, W, L, targets)
            e2, einf = error_metrics(approx, F, targets, region)
            out.append(_row(method, W, L, e2, einf, len(targets)))
    if include_initial:
        e2, einf = error_metrics(z, F, tri.vertices, region)
        out.append(_row("initial", None, None, e2, einf, int(_in_region(tri.vertices, region).sum())))
    return out


def _in_region(v, region):
    (x0, x1), (y0, y1) = region
    return (v[:, 0] >= x0) & (v[:, 0] <= x1) & (v[:, 1] >= y0) & (v[:, 1] <= y1)


def _row(method, W, L, e2, einf, n):
    return {"method": method, "W": None if W is None else W.name, "L": L,
            "E2": float(e2), "Einf": float(einf), "n_points": n}


def format_table(rows) -> str:
    head = f"{'method':<12} {'W':<10} {'L':>5} {'E2':>11} {'Einf':>11}"
    lines = [head, "-" * len(head)]
    for r in rows:
        L = "" if r["L"] is None else f"{r['L']:g}"
        lines.append(f"{r['method']:<12} {r['W'] or '':<10} {L:>5} "
                     f"{r['E2']:>11.3e} {r['Einf']:>11.3e}")
    return "\n".join(lines)
