import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wlsubdiv.analysis import (check_reproduction, error_metrics, estimate_approximation_order,
                               fit_slope, interior_selector, nearest_vertices,
                               noise_variance_trial, theta, theta_from_rules, theta_of_mask)
from wlsubdiv.errors import WLSError
from wlsubdiv.mesh import DataLevel, diameter, lattice_patch, random_mesh
from wlsubdiv.uniform_masks import UniformGrid, derive_mask

EQ = UniformGrid.equilateral()
RECT = UniformGrid.rectangular()


def test_reproduce_constant(rng):
    tri = random_mesh(20, rng)
    assert check_reproduction(tri, "hat", 1.6 * diameter(tri), (1.0, 0, 0)) <= 1e-12


def test_reproduce_linear_on_fixture(fixture_mesh):
    assert check_reproduction(fixture_mesh, "hat", 1.0, (2.0, 3.0, -5.0)) <= 1e-10


@settings(max_examples=25)
@given(st.integers(0, 2**31 - 1), st.sampled_from(["constant", "hat", "gaussian"]),
       st.floats(1.1, 3.0))
def test_reproduce_random_linear(seed, W, factor):
    rng = np.random.default_rng(seed)
    tri = random_mesh(int(rng.integers(8, 30)), rng)
    p = tuple(rng.normal(size=3) * 10)
    assert check_reproduction(tri, W, factor * diameter(tri), p) <= 1e-10


def test_quadratic_is_not_reproduced():
    tri, _ = lattice_patch(EQ.e1, EQ.e2, 4)
    errs = []
    for h in (0.2, 0.1):
        t = tri.scaled(h)
        f = lambda v: v[:, 0] ** 2  # noqa: E731
        errs.append(check_reproduction(t, "constant", 1.6 * h, f))
    assert errs[0] > 1e-6
    assert errs[0] / errs[1] == pytest.approx(4, rel=1e-6)


def test_fit_slope_exact():
    h = np.array([0.4, 0.2, 0.1])
    assert fit_slope(h, 3 * h ** 2) == pytest.approx(2.0)


def test_rate_linear_skips_slope():
    tri, _ = lattice_patch(EQ.e1, EQ.e2, 6)
    rep = estimate_approximation_order(lambda v: 1 + v[:, 0] - 2 * v[:, 1], tri,
                                       [0.4, 0.2, 0.1], iterations=2)
    assert rep.slope is None
    assert rep.errors.max() <= 1e-12


def test_rate_quadratic():
    tri, _ = lattice_patch(EQ.e1, EQ.e2, 6)
    rep = estimate_approximation_order(lambda v: v[:, 0] ** 2 + v[:, 1] ** 2, tri,
                                       [0.4, 0.2, 0.1], iterations=3, W="constant")
    assert 1.8 <= rep.slope <= 2.2
    assert set(rep.to_dict()) == {"scales", "errors", "slope", "n_points"}


def test_rate_needs_three_scales():
    tri, _ = lattice_patch(EQ.e1, EQ.e2, 3)
    with pytest.raises(ValueError):
        estimate_approximation_order(np.sum, tri, [0.2, 0.1])


def test_theta_equilateral_and_rectangular():
    assert theta_of_mask(derive_mask(EQ, "constant", 1.6)) == pytest.approx(1 / 7, abs=1e-16)
    assert theta_of_mask(derive_mask(RECT, "constant", 1.7)) == pytest.approx(1 / 8, abs=1e-16)


def test_theta_single_member():
    assert theta_from_rules([[1.0]]) == 1.0


def test_theta_engine_interior():
    tri, _ = lattice_patch(EQ.e1, EQ.e2, 5)
    lvl = DataLevel(tri, np.zeros(tri.n_vertices), 0, 1.6)
    from wlsubdiv.mesh import midpoint_refine
    child, _ = midpoint_refine(tri)
    inner = np.nonzero(interior_selector(tri, 1.6)(child.vertices))[0]
    assert theta(lvl, "constant", vertices=inner) == pytest.approx(1 / 7, abs=1e-15)
    # boundary rules are less balanced
    assert theta(lvl, "constant") > 1 / 7


def test_noise_zero_sd():
    tri, _ = lattice_patch(EQ.e1, EQ.e2, 3)
    rep = noise_variance_trial(tri, "constant", 1.6, noise_sd=0.0, trials=50)
    assert rep.ratios == [0.0]
    assert np.all(rep.variances[0] == 0)


def test_noise_reproducible_and_chunk_independent():
    tri, _ = lattice_patch(EQ.e1, EQ.e2, 3)
    a = noise_variance_trial(tri, "constant", 1.6, trials=200, seed=3)
    b = noise_variance_trial(tri, "constant", 1.6, trials=200, seed=3)
    c = noise_variance_trial(tri, "constant", 1.6, trials=200, seed=3, chunk=7)
    assert a.ratios == b.ratios
    np.testing.assert_allclose(a.variances[0], c.variances[0], rtol=1e-12)


def test_noise_level1_bound():
    tri, _ = lattice_patch(EQ.e1, EQ.e2, 5)
    reps = 0.5 * np.array([[0, 0], [1, 0], [0.5, math.sqrt(3) / 2], [1.5, math.sqrt(3) / 2]])
    rep = noise_variance_trial(tri, "constant", 1.6, trials=1000, seed=0,
                               select=lambda p: nearest_vertices(p, reps))
    assert rep.theta == pytest.approx(1 / 7)
    assert rep.bound_applicable
    assert rep.ratios[0] <= 1 / 7 + 3 * rep.standard_errors[0]


def test_noise_flags_negative_coefficients(rng):
    tri = random_mesh(30, rng)
    rep = noise_variance_trial(tri, "hat", 1.6 * diameter(tri), trials=20)
    # boundary stencils of irregular meshes carry negative coefficients
    assert rep.min_coefficient < 0 and not rep.bound_applicable


def test_error_metrics():
    v = np.array([[0, 0], [0.5, 0.5], [2, 2]], float)
    F = lambda p: p[:, 0]  # noqa: E731
    assert error_metrics(F(v), F, v) == (0.0, 0.0)
    e2, einf = error_metrics(F(v) + 0.3, F, v)
    assert e2 == pytest.approx(0.3) and einf == pytest.approx(0.3)
    e2, einf = error_metrics(np.array([0.0, 1.0, 100.0]), F, v)
    assert einf == pytest.approx(0.5)   # (2,2) is outside the region
    with pytest.raises(WLSError):
        error_metrics(F(v), F, v, region=((5, 6), (5, 6)))


def test_error_metrics_columns():
    v = np.array([[0, 0], [0.5, 0.5]], float)
    F = lambda p: p[:, 0]  # noqa: E731
    e2, einf = error_metrics(np.column_stack([F(v), F(v) + 1]), F, v)
    np.testing.assert_allclose(e2, [0, 1])
