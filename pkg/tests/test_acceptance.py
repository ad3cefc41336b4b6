"""The ten acceptance criteria, each at its stated tolerance and time budget.

Every test records a one-line PASS/FAIL verdict in ``RESULTS``; the
conftest prints them at the end of the session (and each test also
prints its own line, visible with ``-s``).
"""

import math
import time

import numpy as np
import pytest

from oracles import lstsq_coefficients
from wlsubdiv.analysis import (check_reproduction, error_metrics, estimate_approximation_order,
                               nearest_vertices, noise_variance_trial, theta_of_mask)
from wlsubdiv.baselines import ScatteredData, mls1_eval
from wlsubdiv.experiments import noise
from wlsubdiv.geom3d import icosphere, radial_noise, radial_rms, surface_refine_step
from wlsubdiv.mesh import DataLevel, diameter, lattice_patch, random_mesh, scattered_square_mesh
from wlsubdiv.uniform_masks import (UniformGrid, derive_mask, equilateral_hat_symbols,
                                    paper_matrix, rectangular_hat_symbols)
from wlsubdiv.wls import compute_coefficients, make_ball, subdivide

RESULTS = []

EQ = UniformGrid.equilateral()
RECT = UniformGrid.rectangular()

# Published W=1 masks, typed in here independently of the library tables.
EQ_70 = np.array([
    [0, 0, 0, 7, 7, 7, 7],
    [0, 0, 7, 10, 7, 10, 7],
    [0, 7, 7, 7, 7, 7, 7],
    [7, 10, 7, 10, 7, 10, 7],
    [7, 7, 7, 7, 7, 7, 0],
    [7, 10, 7, 10, 7, 0, 0],
    [7, 7, 7, 7, 0, 0, 0]]) / 70
RECT_72 = np.array([
    [0, 0, 6, 9, 6, 0, 0],
    [0, 8, 9, 8, 9, 8, 0],
    [6, 9, 6, 9, 6, 9, 6],
    [9, 8, 9, 8, 9, 8, 9],
    [6, 9, 6, 9, 6, 9, 6],
    [0, 8, 9, 8, 9, 8, 0],
    [0, 0, 6, 9, 6, 0, 0]]) / 72


def record(n, name, ok, detail, seconds, budget):
    ok = bool(ok) and seconds < budget
    line = (f"{'PASS' if ok else 'FAIL'} criterion {n:>2} {name}: {detail} "
            f"[{seconds:.2f}s < {budget:g}s]")
    RESULTS.append(line)
    print(line)
    return ok


def test_01_mask_equality():
    t0 = time.perf_counter()
    e1 = np.abs(derive_mask(EQ, "constant", 1.6).to_matrix(7) - EQ_70).max()
    e2 = np.abs(derive_mask(RECT, "constant", 1.7).to_matrix(7) - RECT_72).max()
    dt = time.perf_counter() - t0
    assert record(1, "mask equality", max(e1, e2) <= 1e-12,
                  f"max diff {max(e1, e2):.2e} (tol 1e-12)", dt, 1)


def test_02_closed_form_hat_masks():
    t0 = time.perf_counter()
    errs, lo = [], np.inf
    for grid, L, sym, letters in ((EQ, 1.6, equilateral_hat_symbols, "abcdef"),
                                  (RECT, 1.7, rectangular_hat_symbols, "abcdefgh")):
        derived = derive_mask(grid, "hat", L).to_matrix(7)
        published = paper_matrix(grid.kind, "hat", L)
        errs.append(np.abs(derived - published).max())
        lo = min(lo, derived[published > 0].min(), min(sym(L)[c] for c in letters))
        # zeros of the layout stay zero
        assert np.all(derived[published == 0] == 0)
    dt = time.perf_counter() - t0
    e = max(errs)
    assert record(2, "closed-form hat masks", e <= 1e-12 and lo > 0,
                  f"max diff {e:.2e} (tol 1e-12), min coefficient {lo:.4f} > 0", dt, 1)


def test_03_pi1_reproduction():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst = 0.0
    for k in range(100):
        tri = random_mesh(int(rng.integers(10, 60)), rng, box=float(rng.uniform(0.5, 5)))
        p = tuple(rng.normal(scale=5, size=3))
        W = ("constant", "hat", "gaussian")[k % 3]
        L = float(rng.uniform(1.05, 3.0)) * diameter(tri)
        worst = max(worst, check_reproduction(tri, W, L, p))
    dt = time.perf_counter() - t0
    assert record(3, "Pi1 reproduction", worst <= 1e-10,
                  f"max error {worst:.2e} over 100 meshes (tol 1e-10)", dt, 10)


def random_stencil(rng):
    n = int(rng.integers(3, 13))
    while True:
        c = rng.uniform(-1, 1, 2)
        pts = c + rng.uniform(-1, 1, (n, 2))
        d = np.hypot(*(pts - c).T)
        if d.max() >= 1.5:
            continue
        q = pts - pts.mean(0)
        s = np.linalg.svd(q, compute_uv=False)
        if s[1] > 1e-3 * s[0]:
            return pts, c, 1 - d / 1.5


def test_04_partition_and_oracle():
    rng = np.random.default_rng(4)
    t0 = time.perf_counter()
    sum_err = rel = 0.0
    for _ in range(1000):
        pts, c, w = random_stencil(rng)
        a = compute_coefficients(make_ball(pts, c, w), shortcut=False).coefficients
        ref = lstsq_coefficients(pts, c, w)
        sum_err = max(sum_err, abs(a.sum() - 1))
        rel = max(rel, np.abs(a - ref).max() / np.abs(ref).max())
    dt = time.perf_counter() - t0
    assert record(4, "partition of unity + oracle", sum_err <= 1e-12 and rel <= 1e-9,
                  f"|sum-1| {sum_err:.1e} (tol 1e-12), rel diff {rel:.1e} (tol 1e-9)", dt, 10)


def test_05_negative_coefficient():
    t0 = time.perf_counter()
    pts = np.array([[-4, 1], [-3, 1], [-2, 1], [-1, 1], [4, 1], [3, -1]], float)
    a = compute_coefficients(make_ball(pts, (0.0, 0.0))).coefficients
    dt = time.perf_counter() - t0
    assert record(5, "negative coefficient", a.min() < 0, f"min alpha {a.min():.5f} < 0", dt, 1)


def sincos(v):
    return np.sin(v[:, 0]) * np.cos(v[:, 1])


def test_06_approximation_order():
    t0 = time.perf_counter()
    tri, _ = lattice_patch(EQ.e1, EQ.e2, 6)
    # sin(x)cos(y) has a vanishing Hessian at the origin, so the patch is
    # anchored at (1, 0.5) where the second-order error term is generic
    rep = estimate_approximation_order(sincos, tri, [0.4, 0.2, 0.1], iterations=3,
                                       W="constant", base_L=1.6, anchor=(1.0, 0.5))
    dt = time.perf_counter() - t0
    assert record(6, "approximation order", 1.8 <= rep.slope <= 2.2,
                  f"slope {rep.slope:.3f} in [1.8, 2.2], sup errors "
                  + ", ".join(f"{e:.2e}" for e in rep.errors), dt, 30)


def test_07_denoising():
    t0 = time.perf_counter()
    th = theta_of_mask(derive_mask(EQ, "constant", 1.6))
    tri, _ = lattice_patch(EQ.e1, EQ.e2, 5)
    reps = 0.5 * np.array([[0, 0], [1, 0], [0.5, math.sqrt(3) / 2], [1.5, math.sqrt(3) / 2]])
    one = noise_variance_trial(tri, "constant", 1.6, noise_sd=1.0, trials=1000, seed=0,
                               select=lambda p: nearest_vertices(p, reps))
    tri4, _ = lattice_patch(EQ.e1, EQ.e2, 4)
    deep = noise_variance_trial(tri4, "constant", 1.6, noise_sd=1.0, trials=1000, seed=0,
                                levels=5, select=lambda p: nearest_vertices(p, [(0.0, 0.0)]))
    dt = time.perf_counter() - t0
    ok = (th == pytest.approx(1 / 7, abs=1e-16)
          and one.ratios[0] <= 1 / 7 + 3 * one.standard_errors[0]
          and deep.ratios[-1] <= 1 + 3 * deep.standard_errors[-1]
          and one.bound_applicable and deep.bound_applicable)
    assert record(7, "denoising", ok,
                  f"theta {th:.15f}; level-1 {one.ratios[0]:.4f} <= "
                  f"{1 / 7 + 3 * one.standard_errors[0]:.4f}; level-5 {deep.ratios[-1]:.4f} <= "
                  f"{1 + 3 * deep.standard_errors[-1]:.4f}", dt, 60)


#: mesh seed and the 20 noise seeds of the desk-scale comparison experiment
FIXTURE_SEED = 0
NOISE_SEEDS = tuple(range(20))


def test_08_experiment_desk_scale():
    t0 = time.perf_counter()
    tri = scattered_square_mesh(seed=FIXTURE_SEED)
    assert tri.n_vertices == 227 and 0.78 <= diameter(tri) <= 0.84
    f0 = sincos(tri.vertices)
    # one noise column per seed, all refined in the same pass
    Z = f0[:, None] + np.column_stack([noise(tri.n_vertices, 0.2, s) for s in NOISE_SEEDS])
    lvl = subdivide(DataLevel(tri, Z, 0, 1.0), 5, "hat")
    e2, _ = error_metrics(lvl.values, sincos, lvl.tri.vertices)
    e2_init, _ = error_metrics(Z, sincos, tri.vertices)
    dt = time.perf_counter() - t0
    good = (e2 >= 0.05) & (e2 <= 0.15) & (e2 < e2_init)
    frac = good.mean()
    assert record(8, "noisy sin*cos experiment", frac >= 0.95,
                  f"{int(good.sum())}/20 seeds with E2 in [0.05, 0.15] and below initial; "
                  f"E2 median {np.median(e2):.4f} vs initial {np.median(e2_init):.4f} "
                  f"(reference 9.545e-02 vs 1.929e-01)", dt, 300)


def test_09_surface_denoising():
    t0 = time.perf_counter()
    sphere = icosphere(3)
    L = 1.6 * sphere.edge_lengths().max()
    improved = 0
    for s in range(20):
        noisy = radial_noise(sphere, 0.02, np.random.Generator(np.random.Philox(s)))
        out = surface_refine_step(noisy, "hat", L)
        improved += radial_rms(out) < radial_rms(noisy)
    dt = time.perf_counter() - t0
    assert record(9, "surface denoising", improved >= 19,
                  f"{improved}/20 seeds reduce radial RMS", dt, 120)


def test_10_baseline_crosscheck():
    rng = np.random.default_rng(10)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(500):
        pts, c, w = random_stencil(rng)
        z = rng.normal(size=len(pts))
        rule = compute_coefficients(make_ball(pts, c, w)).coefficients @ z
        # stencil radius 1.5 and hat weights 1 - d/1.5 are what mls1 uses with L = 1.5
        val = mls1_eval(ScatteredData(pts, z), "hat", 1.5, c)
        worst = max(worst, abs(val - rule))
    dt = time.perf_counter() - t0
    assert record(10, "baseline cross-check", worst <= 1e-9,
                  f"max |mls1 - rule| {worst:.2e} over 500 cases (tol 1e-9)", dt, 10)
