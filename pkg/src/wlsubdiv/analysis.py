"""Numerical checks of reproduction, approximation order and noise reduction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import WLSError
from .mesh import DataLevel, Triangulation2, distance_to_boundary
from .weights import get_weight
from .wls import refinement_operator, refine_step, subdivide


@dataclass
class RateReport:
    scales: np.ndarray
    errors: np.ndarray
    slope: float | None
    n_points: np.ndarray = field(default=None)

    def to_dict(self):
        return {"scales": self.scales.tolist(), "errors": self.errors.tolist(),
                "slope": self.slope, "n_points": self.n_points.tolist()}


@dataclass
class NoiseReport:
    """Monte Carlo variance of refined iid noise.

    ``ratios[k]`` is the largest per-vertex sample variance at level k+1
    divided by the input variance, ``standard_errors[k]`` its standard error
    under a Gaussian model. ``bound_applicable`` is False when a negative
    coefficient was met, since the variance bound assumes convex rules.
    """

    theta: float
    ratios: list
    standard_errors: list
    trials: int
    bound_applicable: bool
    variances: list = field(default_factory=list, repr=False)
    min_coefficient: float = 0.0

    def to_dict(self):
        return {"theta": self.theta, "ratios": self.ratios,
                "standard_errors": self.standard_errors, "trials": self.trials,
                "bound_applicable": self.bound_applicable,
                "min_coefficient": self.min_coefficient}


def _poly(coeffs, v):
    a0, a1, a2 = coeffs
    return a0 + a1 * v[:, 0] + a2 * v[:, 1]


def check_reproduction(tri: Triangulation2, W, L: float, poly_coeffs=(0.0, 0.0, 1.0),
                       level: int = 0, values=None) -> float:
    """Max error of one refinement step applied to samples of a polynomial.

    ``poly_coeffs`` are ``(a0, a1, a2)`` of ``a0 + a1 x + a2 y``. ``values``
    overrides the input samples (e.g. a quadratic) while the error is still
    measured against the polynomial; pass a callable to use it for both.
    """
    f = poly_coeffs if callable(poly_coeffs) else (lambda v: _poly(poly_coeffs, v))
    z = f(tri.vertices) if values is None else values
    child = refine_step(DataLevel(tri, z, level, L), W)
    return float(np.max(np.abs(child.values - f(child.tri.vertices))))


def fit_slope(scales, errors) -> float:
    x = np.log2(np.asarray(scales, float))
    y = np.log2(np.asarray(errors, float))
    A = np.column_stack([x, np.ones_like(x)])
    return float(np.linalg.lstsq(A, y, rcond=None)[0][0])


def estimate_approximation_order(F, tri: Triangulation2, scales, iterations: int = 3,
                                 W="hat", base_L: float = 1.6, anchor=(0.0, 0.0),
                                 margin_factor: float = 2.0, tol: float = 1e-13) -> RateReport:
    """Empirical convergence order of the limit of subdivision to ``F``.

    For every ``h`` the data ``F`` is sampled on ``anchor + h * tri`` with ball
    radius ``h * base_L``, refined ``iterations`` times, and compared with
    ``F`` at the finest vertices lying farther than ``margin_factor * h *
    base_L`` from the patch boundary (the reach of boundary stencils).
    """
    scales = np.asarray(sorted(scales, reverse=True), float)
    if len(scales) < 3:
        raise ValueError("need at least three scales")
    anchor = np.asarray(anchor, float)
    errors, counts = [], []
    for h in scales:
        t = Triangulation2(anchor + h * tri.vertices, tri.faces)
        lvl = subdivide(DataLevel(t, F(t.vertices), 0, h * base_L), iterations, W)
        v = lvl.tri.vertices
        inner = distance_to_boundary(t, v) > margin_factor * h * base_L
        if not inner.any():
            raise WLSError(f"no interior vertices at scale {h}; enlarge the patch")
        errors.append(float(np.max(np.abs(lvl.values[inner] - F(v[inner])))))
        counts.append(int(inner.sum()))
    errors = np.asarray(errors)
    slope = None if np.all(errors <= tol) else fit_slope(scales, np.maximum(errors, tol))
    return RateReport(scales, errors, slope, np.asarray(counts))


def theta_from_rules(rules) -> float:
    """max over rules of the sum of squared coefficients."""
    return float(max(np.sum(np.asarray(r, float) ** 2) for r in rules))


def theta_of_mask(mask) -> float:
    return theta_from_rules([list(r.values()) for r in mask.rules.values()])


def theta(level: DataLevel, W, L: float | None = None, vertices=None) -> float:
    """Noise factor of the next refinement step of ``level``.

    ``vertices`` optionally restricts the maximum to a subset of the new
    vertices (e.g. those whose balls are not cut by the boundary).
    """
    radius = level.radius if L is None else L * 2.0 ** (-level.level)
    _, _, S = refinement_operator(level.tri, W, radius)
    sq = np.asarray(S.multiply(S).sum(axis=1)).ravel()
    if vertices is not None:
        sq = sq[vertices]
    return float(sq.max())


def interior_selector(tri: Triangulation2, margin: float):
    """Callable picking vertices farther than ``margin`` from the boundary of ``tri``."""
    return lambda pts: distance_to_boundary(tri, pts) > margin


def noise_variance_trial(tri: Triangulation2, W, L: float, noise_sd: float = 1.0,
                         trials: int = 1000, seed: int = 0, levels: int = 1,
                         select=None, chunk: int = 100) -> NoiseReport:
    """Refine pure iid Gaussian noise and measure per-vertex variances.

    The refinement operators are assembled once; noise columns are pushed
    through them in fixed-size chunks drawn from a Philox stream so results
    are reproducible bit for bit. ``select(points)`` returns a boolean mask
    or index array restricting which vertices enter the maxima at every level.
    """
    if trials < 2:
        raise ValueError("need at least two trials")
    W = get_weight(W)
    ops, meshes = [], []
    t = tri
    for k in range(levels):
        t_next, _, S = refinement_operator(t, W, L * 2.0 ** (-k))
        ops.append(S)
        meshes.append(t_next)
        t = t_next
    sq1 = np.asarray(ops[0].multiply(ops[0]).sum(axis=1)).ravel()
    masks = [_as_mask(select, m) for m in meshes]
    th = float(sq1[masks[0]].max())
    min_coef = _cone_min_coefficient(ops, masks)
    rng = np.random.Generator(np.random.Philox(seed))
    sums = [np.zeros(m.n_vertices) for m in meshes]
    sumsq = [np.zeros(m.n_vertices) for m in meshes]
    done = 0
    while done < trials:
        n = min(chunk, trials - done)
        # trial-major draws: trial t gets the same noise whatever the chunk size
        x = noise_sd * rng.standard_normal((n, tri.n_vertices)).T
        for k, S in enumerate(ops):
            x = S @ x
            sums[k] += x.sum(axis=1)
            sumsq[k] += (x * x).sum(axis=1)
        done += n
    var = [(sq - s * s / trials) / (trials - 1) for s, sq in zip(sums, sumsq)]
    var = [np.maximum(v, 0.0) for v in var]
    ratios, ses = [], []
    for v, m in zip(var, masks):
        r = float(v[m].max() / noise_sd ** 2) if noise_sd > 0 else 0.0
        ratios.append(r)
        ses.append(r * float(np.sqrt(2.0 / (trials - 1))))
    return NoiseReport(th, ratios, ses, trials, min_coef >= 0, var, min_coef)


def _as_mask(select, mesh):
    if select is None:
        return np.ones(mesh.n_vertices, bool)
    sel = np.asarray(select(mesh.vertices))
    if sel.dtype == bool:
        return sel
    out = np.zeros(mesh.n_vertices, bool)
    out[sel] = True
    return out


def _cone_min_coefficient(ops, masks) -> float:
    """Smallest coefficient feeding any selected vertex, through all levels."""
    lo = np.inf
    need = [m.copy() for m in masks]
    for k in range(len(ops) - 1, -1, -1):
        rows = ops[k][np.nonzero(need[k])[0]]
        if rows.nnz:
            lo = min(lo, float(rows.data.min()))
        if k:
            touched = np.zeros(ops[k].shape[1], bool)
            touched[rows.indices] = True
            need[k - 1] |= touched
    return lo


def nearest_vertices(points, targets):
    """Indices of the points closest to each target (ties to the lowest index)."""
    p = np.asarray(points, float)
    return np.array([int(np.argmin(np.sum((p - t) ** 2, axis=1)))
                     for t in np.asarray(targets, float).reshape(-1, 2)])


def error_metrics(values, F, vertices, region=((-1.0, 1.0), (-1.0, 1.0))):
    """(E2, Einf) of ``values`` against ``F`` over vertices inside an axis-aligned box.

    ``values`` may carry extra columns; metrics are then per column.
    """
    v = np.asarray(vertices, float)
    (x0, x1), (y0, y1) = region
    inside = (v[:, 0] >= x0) & (v[:, 0] <= x1) & (v[:, 1] >= y0) & (v[:, 1] <= y1)
    if not inside.any():
        raise WLSError("region selects no vertices")
    z = np.asarray(values, float)[inside]
    f = F(v[inside])
    err = z - (f[:, None] if z.ndim == 2 else f)
    e2 = np.sqrt(np.mean(err ** 2, axis=0))
    einf = np.max(np.abs(err), axis=0)
    if z.ndim == 1:
        return float(e2), float(einf)
    return e2, einf
