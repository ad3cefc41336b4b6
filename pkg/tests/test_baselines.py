import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import lstsq_coefficients
from wlsubdiv.baselines import (ConditionWarning, ScatteredData, mls1, mls1_eval, shepard,
                                shepard_eval)
from wlsubdiv.errors import SingularSystemError, WLSError
from wlsubdiv.mesh import DataLevel, random_mesh, diameter
from wlsubdiv.wls import build_ball, compute_coefficients


def test_scattered_data_validation():
    with pytest.raises(ValueError):
        ScatteredData([[0, 0], [1, 1]], [1.0])
    with pytest.raises(ValueError):
        ScatteredData([[0, 0], [0, 0]], [1.0, 2.0])


def test_shepard_examples():
    one = ScatteredData([[0.3, 0.4]], [7.0])
    assert shepard_eval(one, "hat", 1.0, (0.3, 0.4)) == 7.0
    two = ScatteredData([[-0.5, 0], [0.5, 0]], [0.0, 1.0])
    assert shepard_eval(two, "hat", 1.0, (0, 0)) == pytest.approx(0.5)
    rng = np.random.default_rng(0)
    pts = rng.uniform(-1, 1, (30, 2))
    const = ScatteredData(pts, np.full(30, 3.25))
    assert shepard_eval(const, "gaussian", 0.8, (0.1, 0.1)) == pytest.approx(3.25)


def test_shepard_empty_neighborhood():
    d = ScatteredData([[0, 0]], [1.0])
    with pytest.raises(WLSError, match="empty neighborhood"):
        shepard_eval(d, "hat", 1.0, (5, 5))
    with pytest.raises(WLSError):
        shepard(d, "hat", 1.0, [[5, 5]])


def test_zero_extension_at_radius():
    # a site at exactly distance L gets W(1) = 0 for the hat, but 1 for constant
    d = ScatteredData([[0, 0], [1, 0]], [0.0, 1.0])
    assert shepard_eval(d, "hat", 1.0, (0, 0)) == 0.0
    assert shepard_eval(d, "constant", 1.0, (0, 0)) == 0.5


@given(st.integers(0, 2**31 - 1))
def test_shepard_is_convex(seed):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1, 1, (15, 2))
    z = rng.normal(size=15)
    t = rng.uniform(-0.5, 0.5, 2)
    val = shepard_eval(ScatteredData(pts, z), "gaussian", 1.0, t)
    near = np.hypot(*(pts - t).T) <= 1.0
    assert z[near].min() - 1e-12 <= val <= z[near].max() + 1e-12


@given(st.integers(0, 2**31 - 1))
def test_mls_reproduces_linear(seed):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1, 1, (20, 2))
    a = rng.normal(size=3)
    z = a[0] + a[1] * pts[:, 0] + a[2] * pts[:, 1]
    t = rng.uniform(-0.3, 0.3, 2)
    val = mls1_eval(ScatteredData(pts, z), "hat", 1.2, t)
    assert val == pytest.approx(a[0] + a[1] * t[0] + a[2] * t[1], abs=1e-10)


def test_mls_constant():
    rng = np.random.default_rng(1)
    d = ScatteredData(rng.uniform(-1, 1, (20, 2)), np.full(20, -2.0))
    assert mls1_eval(d, "gaussian", 1.0, (0, 0)) == pytest.approx(-2.0, abs=1e-12)


def test_mls_collinear():
    d = ScatteredData([[0, 0], [1, 1], [2, 2], [-1, -1]], [0, 1, 2, 3])
    with pytest.raises(SingularSystemError, match="collinear"):
        mls1_eval(d, "constant", 3.0, (0.5, 0.5))
    with pytest.raises(SingularSystemError):
        mls1(d, "constant", 3.0, [[0.5, 0.5]])
    few = ScatteredData([[0, 0], [1, 0]], [0, 1])
    with pytest.raises(SingularSystemError):
        mls1_eval(few, "constant", 3.0, (0, 0))


def test_mls_condition_warning():
    eps = 1e-7
    d = ScatteredData([[0, 0], [1, 0], [2, 0], [1, eps]], [0, 1, 2, 3])
    with pytest.warns(ConditionWarning):
        mls1_eval(d, "constant", 5.0, (1, 0))


def test_vectorised_matches_scalar():
    rng = np.random.default_rng(2)
    data = ScatteredData(rng.uniform(-1, 1, (60, 2)), rng.normal(size=60))
    T = rng.uniform(-0.6, 0.6, (25, 2))
    with warnings.catch_warnings():
        warnings.simplefilter("error", ConditionWarning)
        for W in ("hat", "gaussian", "constant"):
            np.testing.assert_allclose(mls1(data, W, 0.7, T),
                                       [mls1_eval(data, W, 0.7, t) for t in T], atol=1e-12)
            np.testing.assert_allclose(shepard(data, W, 0.7, T),
                                       [shepard_eval(data, W, 0.7, t) for t in T], atol=1e-12)


def test_mls_matches_subdivision_rule():
    rng = np.random.default_rng(3)
    tri = random_mesh(40, rng)
    L = 1.5 * diameter(tri)
    z = rng.normal(size=tri.n_vertices)
    lvl = DataLevel(tri, z, 0, L)
    data = ScatteredData(tri.vertices, z)
    for c in rng.uniform(-0.8, 0.8, (30, 2)):
        ball = compute_coefficients(build_ball(lvl, c, "hat"))
        ref = lstsq_coefficients(ball.points, c, ball.weights) @ z[ball.members]
        val = mls1_eval(data, "hat", L, c)
        assert val == pytest.approx(ball.apply(z), abs=1e-9)
        assert val == pytest.approx(ref, abs=1e-9)
