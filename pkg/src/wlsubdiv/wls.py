"""L-ball weighted least squares refinement rules for functional data.

Every new value is the degree-1 weighted least squares fit of the parent
values inside a ball around the new vertex, evaluated at that vertex. The
fit never has to be solved: its value is a linear functional of the data
whose coefficients are ratios of 3x3 determinants (``compute_mu``).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import sparse
from scipy.spatial import cKDTree

from .errors import SingularSystemError, StencilError
from .mesh import DataLevel, Triangulation2, check_valid, diameter, midpoint_refine
from .weights import WeightFunction, get_weight

#: relative half-width of the band around the ball radius in which
#: membership is considered numerically fragile
EPS_BALL = 1e-9
#: centroid test for the w/sum(w) shortcut, relative to sum(w) * radius
CENTROID_RTOL = 1e-12
#: singular test for sum(w mu), relative to radius**4
SINGULAR_RTOL = 1e-14


class BallBoundaryWarning(UserWarning):
    """A vertex sits within the guard band of a ball boundary."""


@dataclass(frozen=True, eq=False)
class StencilBall:
    """One refinement rule: members of the ball around ``center`` and their weights.

    ``members`` index the parent vertices, ``points`` are their coordinates.
    ``coefficients`` is filled by :func:`compute_coefficients`.
    """

    center: np.ndarray
    members: np.ndarray
    points: np.ndarray
    weights: np.ndarray
    radius: float | None = None
    coefficients: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, float).reshape(2))
        object.__setattr__(self, "members", np.asarray(self.members, np.int64).reshape(-1))
        object.__setattr__(self, "points", np.asarray(self.points, float).reshape(-1, 2))
        object.__setattr__(self, "weights", np.asarray(self.weights, float).reshape(-1))
        if not (len(self.members) == len(self.points) == len(self.weights)):
            raise ValueError("members, points and weights must have equal length")

    def __len__(self):
        return len(self.members)

    def apply(self, values):
        """Rule value for parent data ``values`` (indexed like the parent mesh)."""
        if self.coefficients is None:
            raise ValueError("coefficients not computed")
        return self.coefficients @ np.asarray(values, float)[self.members]


def make_ball(points, center, weights=None, radius=None) -> StencilBall:
    """Ball from raw coordinates; members are numbered 0..n-1."""
    points = np.asarray(points, float).reshape(-1, 2)
    if weights is None:
        weights = np.ones(len(points))
    return StencilBall(center, np.arange(len(points)), points, weights, radius)


def ball_contains_face(members, faces) -> bool:
    faces = np.asarray(faces)
    return bool(np.isin(faces, members).all(axis=1).any())


def build_ball(parent: DataLevel, new_vertex, W: WeightFunction | str = "hat",
               eps_ball: float = EPS_BALL) -> StencilBall:
    """Ball of parent vertices strictly within ``2^-k L`` of ``new_vertex``."""
    W = get_weight(W)
    center = np.asarray(new_vertex, float).reshape(2)
    r = parent.radius
    d = np.sqrt(np.sum((parent.tri.vertices - center) ** 2, axis=1))
    inside = d < r
    if np.any(np.abs(d - r) <= eps_ball * r):
        warnings.warn(f"vertex within {eps_ball:g} (relative) of the ball boundary "
                      f"around {center.tolist()}", BallBoundaryWarning, stacklevel=2)
    members = np.nonzero(inside)[0]
    if not ball_contains_face(members, parent.tri.faces):
        raise StencilError(f"stencil lacks a face: ball of radius {r:g} around "
                           f"{center.tolist()} has {len(members)} vertices and no full face")
    w = W(d[members] / r)
    return StencilBall(center, members, parent.tri.vertices[members], w, r)


def _det3(p, q, s):
    """det |1 1 1; p q s| for broadcastable (..., 2) arrays."""
    return ((q[..., 0] - p[..., 0]) * (s[..., 1] - p[..., 1])
            - (q[..., 1] - p[..., 1]) * (s[..., 0] - p[..., 0]))


def compute_mu(ball: StencilBall) -> np.ndarray:
    """Pairwise determinant sums mu_i for every member of the ball.

    mu_i = sum_{j1<j2} w_j1 w_j2 det|1 1 1; c v_j1 v_j2| det|1 1 1; v_i v_j1 v_j2|
    with ``c`` the ball centre; O(n^2) pairs, O(n^3) work overall.
    """
    n = len(ball)
    if n == 0:
        raise ValueError("empty ball")
    j1, j2 = np.triu_indices(n, k=1)
    v, w = ball.points, ball.weights
    pair = w[j1] * w[j2] * _det3(ball.center, v[j1], v[j2])
    return _det3(v[:, None, :], v[None, j1, :], v[None, j2, :]) @ pair


def _scale(ball: StencilBall) -> float:
    if ball.radius is not None:
        return float(ball.radius)
    d = np.sqrt(np.sum((ball.points - ball.center) ** 2, axis=1))
    return float(d.max()) if len(d) and d.max() > 0 else 1.0


def is_centred(ball: StencilBall, rtol: float = CENTROID_RTOL) -> bool:
    """True if the weighted centroid of the members coincides with the centre."""
    w = ball.weights
    moment = w @ (ball.points - ball.center)
    return bool(np.hypot(*moment) <= rtol * w.sum() * _scale(ball))


def compute_coefficients(ball: StencilBall, shortcut: bool = True) -> StencilBall:
    """Fill in the rule coefficients alpha_i = w_i mu_i / sum_j w_j mu_j.

    When the weighted centroid equals the centre every mu_i is the same and
    the rule collapses to ``w / sum(w)``; that branch is taken if
    ``shortcut`` is set.
    """
    w = ball.weights
    if shortcut and len(ball) and is_centred(ball):
        return replace(ball, coefficients=w / w.sum())
    mu = compute_mu(ball)
    denom = w @ mu
    if not abs(denom) > SINGULAR_RTOL * _scale(ball) ** 4:
        raise SingularSystemError(
            f"singular WLS system: members of the ball around {ball.center.tolist()} "
            f"are collinear (sum w*mu = {denom:g})")
    return replace(ball, coefficients=w * mu / denom)


# --- vectorised refinement ------------------------------------------------------

@dataclass(frozen=True)
class BallPairs:
    """All (new vertex, member) incidences of one refinement step, sorted by row."""

    rows: np.ndarray
    cols: np.ndarray
    dist: np.ndarray
    n_rows: int


def ball_pairs(parent_vertices, centers, radius, eps_ball=EPS_BALL) -> BallPairs:
    parent_vertices = np.asarray(parent_vertices, float)
    centers = np.asarray(centers, float)
    tc, tp = cKDTree(centers), cKDTree(parent_vertices)
    sdm = tc.sparse_distance_matrix(tp, radius * (1 + 4 * eps_ball), output_type="ndarray")
    i = sdm["i"].astype(np.int64)
    j = sdm["j"].astype(np.int64)
    # recompute distances so membership does not depend on the tree's rounding
    d = np.sqrt(np.sum((parent_vertices[j] - centers[i]) ** 2, axis=1))
    fragile = np.abs(d - radius) <= eps_ball * radius
    if fragile.any():
        warnings.warn(f"{int(fragile.sum())} vertex/ball incidences within {eps_ball:g} "
                      f"(relative) of the radius {radius:g}", BallBoundaryWarning, stacklevel=3)
    keep = d < radius
    i, j, d = i[keep], j[keep], d[keep]
    order = np.lexsort((j, i))
    return BallPairs(i[order], j[order], d[order], len(centers))


def rows_with_face(pairs: BallPairs, faces, n_parent: int) -> np.ndarray:
    """Boolean per row: does the ball contain all three vertices of some face."""
    faces = np.asarray(faces, np.int64)
    key = pairs.rows * n_parent + pairs.cols  # sorted, rows then cols
    # rows whose ball holds a face's first vertex are the candidates
    by_col = np.argsort(pairs.cols, kind="stable")
    cols_sorted = pairs.cols[by_col]
    start = np.searchsorted(cols_sorted, faces[:, 0], "left")
    stop = np.searchsorted(cols_sorted, faces[:, 0], "right")
    counts = stop - start
    face_rep = np.repeat(np.arange(len(faces)), counts)
    offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    cand_rows = pairs.rows[by_col[np.repeat(start, counts) + offs]]
    ok = np.ones(len(cand_rows), bool)
    for c in (1, 2):
        k = cand_rows * n_parent + faces[face_rep, c]
        pos = np.searchsorted(key, k)
        pos = np.minimum(pos, len(key) - 1)
        ok &= key[pos] == k
    out = np.zeros(pairs.n_rows, bool)
    out[cand_rows[ok]] = True
    return out


def rule_coefficients(parent_vertices, centers, pairs: BallPairs, weights, radius):
    """Vectorised coefficients for every (row, member) pair of ``pairs``.

    Same rule as :func:`compute_coefficients`, but mu_i is expanded through
    the weighted moments of the ball so each row costs O(n) instead of O(n^3).
    """
    i, j = pairs.rows, pairs.cols
    n = pairs.n_rows
    u = parent_vertices[j] - centers[i]
    w = weights
    ux, uy = u[:, 0], u[:, 1]
    s0 = np.bincount(i, w, n)
    sx = np.bincount(i, w * ux, n)
    sy = np.bincount(i, w * uy, n)
    sxx = np.bincount(i, w * ux * ux, n)
    sxy = np.bincount(i, w * ux * uy, n)
    syy = np.bincount(i, w * uy * uy, n)
    minor = sxx * syy - sxy * sxy
    mu = (minor[i] - sx[i] * (ux * syy[i] - sxy[i] * uy)
          + sy[i] * (ux * sxy[i] - sxx[i] * uy))
    denom = s0 * minor - sx * (sx * syy - sxy * sy) + sy * (sx * sxy - sxx * sy)
    singular = ~(np.abs(denom) > SINGULAR_RTOL * radius ** 4)
    centred = np.hypot(sx, sy) <= CENTROID_RTOL * s0 * radius
    with np.errstate(divide="ignore", invalid="ignore"):
        alpha = np.where(centred[i], w / s0[i], w * mu / denom[i])
    return alpha, singular & ~centred


def refinement_operator(tri: Triangulation2, W, radius: float, check: bool = True,
                        eps_ball: float = EPS_BALL):
    """Child mesh and sparse (N_child, N_parent) matrix of one refinement step."""
    W = get_weight(W)
    if check:
        check_valid(tri)
    child, rmap = midpoint_refine(tri, check=False)
    pv = tri.vertices
    centers = child.vertices
    pairs = ball_pairs(pv, centers, radius, eps_ball)
    counts = np.bincount(pairs.rows, minlength=pairs.n_rows)
    referenced = np.zeros(tri.n_vertices, bool)
    referenced[tri.faces.ravel()] = True
    # a ball wider than the longest edge always holds a face around its centre
    if not (radius > diameter(tri) and referenced.all()):
        has_face = rows_with_face(pairs, tri.faces, tri.n_vertices)
        bad = np.nonzero(~has_face)[0]
        if len(bad):
            v = int(bad[0])
            raise StencilError(
                f"stencil lacks a face: ball of radius {radius:g} around "
                f"{centers[v].tolist()} has {int(counts[v])} vertices and no full face"
                + (f"; {len(bad)} vertices affected" if len(bad) > 1 else ""), vertex=v)
    w = W(pairs.dist / radius)
    alpha, singular = rule_coefficients(pv, centers, pairs, w, radius)
    if singular.any():
        v = int(np.nonzero(singular)[0][0])
        raise SingularSystemError(
            f"singular WLS system around {centers[v].tolist()}", vertex=v)
    S = sparse.csr_matrix((alpha, (pairs.rows, pairs.cols)),
                          shape=(child.n_vertices, tri.n_vertices))
    return child, rmap, S


def refine_step(parent: DataLevel, W="hat", eps_ball: float = EPS_BALL) -> DataLevel:
    """Refine mesh and values by one level."""
    child_tri, rmap, S = refinement_operator(parent.tri, W, parent.radius, eps_ball=eps_ball)
    values = S @ parent.values
    info = {
        "level": parent.level + 1,
        "n_vertices": child_tri.n_vertices,
        "radius": parent.radius,
        "min_coefficient": float(S.data.min()),
        "max_members": int(np.diff(S.indptr).max()),
    }
    return DataLevel(child_tri, values, parent.level + 1, parent.base_L,
                     history=parent.history + [info])


def subdivide(initial: DataLevel, iterations: int, W="hat") -> DataLevel:
    """Apply :func:`refine_step` ``iterations`` times."""
    if iterations < 0:
        raise ValueError("iterations must be nonnegative")
    level = initial
    for _ in range(iterations):
        level = refine_step(level, W)
    return level


def default_base_L(tri: Triangulation2, factor: float = 1.6) -> float:
    return factor * diameter(tri)
