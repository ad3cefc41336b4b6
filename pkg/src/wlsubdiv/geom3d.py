"""Subdivision of noisy triangulated surfaces through local reference frames.

Each new point gets a frame whose origin is the old vertex (replacement)
or the edge midpoint (insertion) and whose first two axes are the leading
principal directions of the ball around that origin. In the frame the ball
is functional data over the tangent plane; the planar rule then gives the
height of the new point above the origin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import FrameError, MeshError, SingularSystemError, StencilError
from .mesh import refine_connectivity, unique_edges
from .weights import get_weight
from .wls import BallPairs, rows_with_face, rule_coefficients

#: second singular value below this fraction of the first means rank < 2
RANK_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class Triangulation3:
    vertices: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.vertices, dtype=float).reshape(-1, 3)
        f = np.ascontiguousarray(self.faces, dtype=np.int64).reshape(-1, 3)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def edges(self):
        return unique_edges(self.faces)

    def edge_lengths(self):
        e = self.edges
        return np.linalg.norm(self.vertices[e[:, 0]] - self.vertices[e[:, 1]], axis=1)

    def transformed(self, R, t) -> "Triangulation3":
        return Triangulation3(self.vertices @ np.asarray(R).T + np.asarray(t), self.faces)


def validate3(mesh: Triangulation3) -> list[str]:
    report = []
    f, n = mesh.faces, mesh.n_vertices
    if np.any(f < 0) or np.any(f >= n):
        report.append("face index out of range")
        return report
    dup = (f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])
    report += [f"face {i}: duplicate index in face" for i in np.nonzero(dup)[0]]
    a, b, c = (mesh.vertices[f[:, i]] for i in range(3))
    area2 = np.linalg.norm(np.cross(b - a, c - a), axis=1)
    scale = np.max([np.sum((b - a) ** 2, 1), np.sum((c - a) ** 2, 1)], axis=0)
    report += [f"face {i}: degenerate face (zero area)"
               for i in np.nonzero((area2 <= 1e-12 * scale) & ~dup)[0]]
    return report


@dataclass(frozen=True)
class LocalFrame:
    origin: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    b3: np.ndarray

    @property
    def basis(self) -> np.ndarray:
        """Rows are b1, b2, b3."""
        return np.stack([self.b1, self.b2, self.b3])

    def to_local(self, points):
        return (np.asarray(points, float) - self.origin) @ self.basis.T

    def to_global(self, coords):
        return self.origin + np.asarray(coords, float) @ self.basis


def _fix_sign(vec):
    """Flip so the largest-magnitude component is positive (first one on ties)."""
    k = np.argmax(np.abs(vec), axis=-1)
    s = np.sign(np.take_along_axis(vec, k[..., None], axis=-1))
    s[s == 0] = 1
    return vec * s


def local_frame(neighborhood, origin) -> LocalFrame:
    """Frame from the first two principal directions of ``neighborhood - origin``."""
    P = np.asarray(neighborhood, float).reshape(-1, 3)
    O = np.asarray(origin, float).reshape(3)
    if len(P) < 3:
        raise FrameError(f"degenerate neighborhood: {len(P)} points, need at least 3")
    U, s, _ = np.linalg.svd((P - O).T, full_matrices=False)
    if len(s) < 2 or not s[1] > RANK_RTOL * s[0]:
        raise FrameError("degenerate neighborhood: centred points have rank < 2")
    b1 = _fix_sign(U[:, 0])
    b2 = _fix_sign(U[:, 1])
    return LocalFrame(O, b1, b2, np.cross(b1, b2))


def _batched_frames(origins, rows, members, n_rows):
    """Principal directions for many balls at once via 3x3 scatter matrices."""
    d = members - origins[rows]
    C = np.zeros((n_rows, 3, 3))
    np.add.at(C, rows, d[:, :, None] * d[:, None, :])
    evals, evecs = np.linalg.eigh(C)  # ascending
    b1 = _fix_sign(evecs[:, :, 2])
    b2 = _fix_sign(evecs[:, :, 1])
    b3 = np.cross(b1, b2)
    # eigenvalues are squared singular values
    s = np.sqrt(np.maximum(evals, 0.0))
    degenerate = ~(s[:, 1] > RANK_RTOL * s[:, 2])
    return b1, b2, b3, degenerate


def surface_refine_step(mesh: Triangulation3, W, L: float, check: bool = True) -> Triangulation3:
    """One refinement of a surface mesh; ``L`` is an absolute ball radius."""
    W = get_weight(W)
    if check:
        bad = validate3(mesh)
        if bad:
            raise MeshError("invalid surface mesh: " + "; ".join(bad[:5]))
    V = mesh.vertices
    edges, child_faces = refine_connectivity(mesh.n_vertices, mesh.faces)
    origins = np.concatenate([V, (V[edges[:, 0]] + V[edges[:, 1]]) / 2])
    n = len(origins)
    sdm = cKDTree(origins).sparse_distance_matrix(cKDTree(V), L, output_type="ndarray")
    i, j = sdm["i"].astype(np.int64), sdm["j"].astype(np.int64)
    d3 = np.linalg.norm(V[j] - origins[i], axis=1)
    keep = d3 < L
    i, j = i[keep], j[keep]
    order = np.lexsort((j, i))
    i, j = i[order], j[order]
    counts = np.bincount(i, minlength=n)
    if np.any(counts < 3):
        bad = np.nonzero(counts < 3)[0]
        v = int(bad[0])
        raise FrameError(f"degenerate neighborhood: {int(counts[v])} points within L={L:g}; "
                         f"{len(bad)} of {n} new vertices affected", vertex=v)
    b1, b2, b3, degenerate = _batched_frames(origins, i, V[j], n)
    if degenerate.any():
        v = int(np.nonzero(degenerate)[0][0])
        raise FrameError("degenerate neighborhood: centred points have rank < 2", vertex=v)
    d = V[j] - origins[i]
    x = np.einsum("ij,ij->i", d, b1[i])
    y = np.einsum("ij,ij->i", d, b2[i])
    h = np.einsum("ij,ij->i", d, b3[i])
    uv = np.stack([x, y], 1)
    r2 = np.hypot(x, y)
    pairs = BallPairs(i, j, r2, n)
    has_face = rows_with_face(pairs, mesh.faces, mesh.n_vertices)
    if not has_face.all():
        v = int(np.nonzero(~has_face)[0][0])
        raise StencilError(f"stencil lacks a face within L={L:g}", vertex=v)
    w = W(r2 / L)
    # planar rule with every centre at the local origin
    alpha, singular = rule_coefficients(uv, np.zeros((n, 2)), BallPairs(i, np.arange(len(i)), r2, n),
                                        w, L)
    if singular.any():
        v = int(np.nonzero(singular)[0][0])
        raise SingularSystemError("singular WLS system in local frame", vertex=v)
    height = np.bincount(i, alpha * h, n)
    return Triangulation3(origins + height[:, None] * b3, child_faces)


def surface_subdivide(mesh: Triangulation3, W, L: float, iterations: int) -> Triangulation3:
    """Iterate :func:`surface_refine_step`, halving ``L`` every step."""
    if iterations < 0:
        raise ValueError("iterations must be nonnegative")
    for k in range(iterations):
        mesh = surface_refine_step(mesh, W, L * 2.0 ** (-k))
    return mesh


# --- test surfaces ---------------------------------------------------------------

def icosahedron() -> Triangulation3:
    p = (1 + np.sqrt(5)) / 2
    v = np.array([[-1, p, 0], [1, p, 0], [-1, -p, 0], [1, -p, 0],
                  [0, -1, p], [0, 1, p], [0, -1, -p], [0, 1, -p],
                  [p, 0, -1], [p, 0, 1], [-p, 0, -1], [-p, 0, 1]], float)
    v /= np.linalg.norm(v, axis=1)[:, None]
    f = np.array([[0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
                  [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
                  [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
                  [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1]])
    return Triangulation3(v, f)


def icosphere(subdivisions: int = 3) -> Triangulation3:
    """Unit sphere: icosahedron midpoint-refined and projected back to radius 1."""
    m = icosahedron()
    for _ in range(subdivisions):
        edges, faces = refine_connectivity(m.n_vertices, m.faces)
        v = np.concatenate([m.vertices, (m.vertices[edges[:, 0]] + m.vertices[edges[:, 1]]) / 2])
        v /= np.linalg.norm(v, axis=1)[:, None]
        m = Triangulation3(v, faces)
    return m


def torus(n_major: int = 32, n_minor: int = 16, R: float = 1.0, r: float = 0.4) -> Triangulation3:
    u = 2 * np.pi * np.arange(n_major) / n_major
    v = 2 * np.pi * np.arange(n_minor) / n_minor
    uu, vv = np.meshgrid(u, v, indexing="ij")
    pts = np.stack([(R + r * np.cos(vv)) * np.cos(uu),
                    (R + r * np.cos(vv)) * np.sin(uu),
                    r * np.sin(vv)], -1).reshape(-1, 3)
    a, b = np.meshgrid(np.arange(n_major), np.arange(n_minor), indexing="ij")
    a, b = a.ravel(), b.ravel()
    idx = lambda i, j: (i % n_major) * n_minor + (j % n_minor)  # noqa: E731
    p00, p10, p01, p11 = idx(a, b), idx(a + 1, b), idx(a, b + 1), idx(a + 1, b + 1)
    faces = np.concatenate([np.stack([p00, p10, p11], 1), np.stack([p00, p11, p01], 1)])
    return Triangulation3(pts, faces)


def radial_noise(mesh: Triangulation3, sigma: float, rng) -> Triangulation3:
    """Perturb each vertex along its position vector by N(0, sigma^2)."""
    v = mesh.vertices
    n = v / np.linalg.norm(v, axis=1)[:, None]
    return Triangulation3(v + sigma * rng.standard_normal(len(v))[:, None] * n, mesh.faces)


def radial_rms(mesh: Triangulation3, radius: float = 1.0) -> float:
    return float(np.sqrt(np.mean((np.linalg.norm(mesh.vertices, axis=1) - radius) ** 2)))
