"""Property battery behind ``wlsubdiv verify``.

Each check returns a :class:`CheckResult`; ``quick=True`` shrinks the
random sample counts and Monte Carlo trials so the battery runs in a few
seconds, ``quick=False`` uses the full acceptance sizes.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from .analysis import (check_reproduction, estimate_approximation_order, nearest_vertices,
                       noise_variance_trial, theta_of_mask)
from .baselines import ScatteredData, mls1_eval
from .errors import StencilError
from .mesh import diameter, lattice_patch, random_mesh
from .uniform_masks import UniformGrid, derive_mask, paper_matrix
from .weights import get_weight
from .wls import compute_coefficients, make_ball


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""
    seconds: float = 0.0

    def __post_init__(self):
        self.passed = bool(self.passed)
        self.value = float(self.value)

    def to_dict(self):
        return asdict(self)


def dense_rule_coefficients(points, center, weights) -> np.ndarray:
    """Rule coefficients from the 3x3 normal equations, solved directly.

    The fitted value at the centre is e0^T (A^T W A)^{-1} A^T W z with
    A = [1, x - cx, y - cy], so the coefficient vector is the first row of
    (A^T W A)^{-1} A^T W.
    """
    p = np.asarray(points, float) - np.asarray(center, float)
    w = np.asarray(weights, float)
    A = np.column_stack([np.ones(len(p)), p])
    M = A.T @ (w[:, None] * A)
    e0 = np.linalg.solve(M, np.array([1.0, 0.0, 0.0]))  # M symmetric
    return w * (A @ e0)


def random_stencil(rng, n=None):
    """Points in the unit disc around a random centre, non-collinear, with hat weights."""
    n = int(rng.integers(3, 13)) if n is None else n
    while True:
        c = rng.uniform(-1, 1, 2)
        r = rng.uniform(0, 1, n)
        phi = rng.uniform(0, 2 * np.pi, n)
        pts = c + np.sqrt(r)[:, None] * np.stack([np.cos(phi), np.sin(phi)], 1)
        q = pts - pts.mean(0)
        s = np.linalg.svd(q, compute_uv=False)
        if len(s) > 1 and s[1] > 1e-3 * s[0]:
            return pts, c, get_weight("hat")(np.sqrt(r))


def _timed(fn):
    t0 = time.perf_counter()
    res = fn()
    res.seconds = time.perf_counter() - t0
    return res


def check_mask_equality():
    errs = []
    for kind, L in (("equilateral", 1.6), ("rectangular", 1.7)):
        M = derive_mask(UniformGrid.from_kind(kind), "constant", L).to_matrix(7)
        errs.append(float(np.abs(M - paper_matrix(kind, "constant")).max()))
    e = max(errs)
    return CheckResult("mask_equality", e <= 1e-12, e, 1e-12,
                       "derived W=1 masks vs published 1/70 and 1/72 matrices")


def check_hat_closed_forms():
    errs, lo = [], np.inf
    for kind, L in (("equilateral", 1.6), ("rectangular", 1.7)):
        M = derive_mask(UniformGrid.from_kind(kind), "hat", L).to_matrix(7)
        P = paper_matrix(kind, "hat", L)
        errs.append(float(np.abs(M - P).max()))
        lo = min(lo, float(P[P != 0].min()), float(M[M != 0].min()))
    e = max(errs)
    return CheckResult("hat_closed_forms", e <= 1e-12 and lo > 0, e, 1e-12,
                       f"smallest nonzero coefficient {lo:.6g}")


def check_reproduction_battery(n=100, seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        tri = random_mesh(int(rng.integers(12, 40)), rng)
        p = tuple(rng.normal(size=3))
        W = ("constant", "hat", "gaussian")[int(rng.integers(3))]
        L = float(rng.uniform(1.2, 2.5)) * diameter(tri)
        worst = max(worst, check_reproduction(tri, W, L, p))
    return CheckResult("pi1_reproduction", worst <= 1e-10, worst, 1e-10,
                       f"{n} random meshes and linear polynomials")


def check_partition_and_oracle(n=1000, seed=0):
    rng = np.random.default_rng(seed)
    sum_err = rel_err = 0.0
    for _ in range(n):
        pts, c, w = random_stencil(rng)
        a = compute_coefficients(make_ball(pts, c, w), shortcut=False).coefficients
        b = dense_rule_coefficients(pts, c, w)
        sum_err = max(sum_err, abs(a.sum() - 1))
        rel_err = max(rel_err, float(np.abs(a - b).max() / np.abs(b).max()))
    ok = sum_err <= 1e-12 and rel_err <= 1e-9
    return CheckResult("partition_of_unity_oracle", ok, rel_err, 1e-9,
                       f"max |sum alpha - 1| = {sum_err:.3g} over {n} stencils")


#: six-point configuration whose degree-1 rule has a negative coefficient
NEGATIVE_EXAMPLE = np.array([[-4, 1], [-3, 1], [-2, 1], [-1, 1], [4, 1], [3, -1]], float)


def check_negative_coefficient():
    a = compute_coefficients(make_ball(NEGATIVE_EXAMPLE, (0.0, 0.0))).coefficients
    m = float(a.min())
    return CheckResult("negative_coefficient", m < 0, m, 0.0,
                       "W=1, centre (0,0); min coefficient must be < 0")


def sincos(v):
    return np.sin(v[:, 0]) * np.cos(v[:, 1])


#: equilateral patch and anchor of the rate study; sin*cos has a zero
#: Hessian at the origin, so the patch is shifted off it
RATE_ANCHOR = (1.0, 0.5)


def check_approximation_order():
    g = UniformGrid.equilateral()
    tri, _ = lattice_patch(g.e1, g.e2, 6)
    rep = estimate_approximation_order(sincos, tri, [0.4, 0.2, 0.1], iterations=3,
                                       W="constant", base_L=1.6, anchor=RATE_ANCHOR)
    ok = rep.slope is not None and 1.8 <= rep.slope <= 2.2
    return CheckResult("approximation_order", ok, rep.slope, 0.2,
                       "sup-error slope over h in {0.4, 0.2, 0.1}; target [1.8, 2.2]")


#: one vertex of each parity class near the patch centre (level-1 coordinates)
NOISE_REPRESENTATIVES = 0.5 * np.array([[0, 0], [1, 0], [0.5, math.sqrt(3) / 2],
                                        [1.5, math.sqrt(3) / 2]])


def check_denoising(trials=1000, seed=0, levels=5):
    g = UniformGrid.equilateral()
    th = theta_of_mask(derive_mask(g, "constant", 1.6))
    th_ok = abs(th - 1 / 7) <= 1e-15
    tri, _ = lattice_patch(g.e1, g.e2, 5)
    lvl1 = noise_variance_trial(tri, "constant", 1.6, trials=trials, seed=seed, levels=1,
                                select=lambda p: nearest_vertices(p, NOISE_REPRESENTATIVES))
    ok1 = lvl1.ratios[0] <= 1 / 7 + 3 * lvl1.standard_errors[0]
    okL = True
    detail = f"theta={th:.17g}; level-1 ratio {lvl1.ratios[0]:.4f} (SE {lvl1.standard_errors[0]:.4f})"
    if levels > 1:
        tri4, _ = lattice_patch(g.e1, g.e2, 4)
        deep = noise_variance_trial(tri4, "constant", 1.6, trials=trials, seed=seed,
                                    levels=levels,
                                    select=lambda p: nearest_vertices(p, [(0.0, 0.0)]))
        okL = deep.ratios[-1] <= 1 + 3 * deep.standard_errors[-1]
        detail += f"; level-{levels} ratio {deep.ratios[-1]:.4f}"
    return CheckResult("denoising", th_ok and ok1 and okL, th, 1e-15, detail)


def check_baseline_crosscheck(n=500, seed=0):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        pts, c, w = random_stencil(rng)
        z = rng.normal(size=len(pts))
        a = compute_coefficients(make_ball(pts, c, w)).coefficients
        # the stencil lives in the unit disc, so L = 1 reproduces its hat weights
        m = mls1_eval(ScatteredData(pts, z), "hat", 1.0, c)
        worst = max(worst, abs(m - a @ z))
    return CheckResult("baseline_crosscheck", worst <= 1e-9, worst, 1e-9,
                       f"mls1_eval vs subdivision rule over {n} stencils")


def run_battery(quick: bool = True, seed: int = 0):
    """Run every check; returns a list of :class:`CheckResult`."""
    n_mesh, n_sten, n_base, trials, levels = ((20, 200, 100, 300, 3) if quick
                                              else (100, 1000, 500, 1000, 5))
    checks = [
        check_mask_equality,
        check_hat_closed_forms,
        lambda: check_reproduction_battery(n_mesh, seed),
        lambda: check_partition_and_oracle(n_sten, seed),
        check_negative_coefficient,
        check_approximation_order,
        lambda: check_denoising(trials, seed, levels),
        lambda: check_baseline_crosscheck(n_base, seed),
    ]
    out = []
    for fn in checks:
        try:
            out.append(_timed(fn))
        except StencilError as exc:  # report, do not abort the battery
            out.append(CheckResult(getattr(fn, "__name__", "check"), False, float("nan"), 0.0,
                                   f"{exc.code}: {exc}"))
    return out
