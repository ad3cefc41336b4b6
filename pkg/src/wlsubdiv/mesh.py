"""Planar triangulations, midpoint refinement and mesh generators."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import Delaunay

from .errors import MeshError

# relative tolerance on |det| / (longest edge)^2 for calling a face degenerate
DEGENERATE_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class Triangulation2:
    """A planar triangulation: float (N, 2) vertices and int (F, 3) faces."""

    vertices: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.vertices, dtype=float).reshape(-1, 2)
        f = np.ascontiguousarray(self.faces, dtype=np.int64).reshape(-1, 3)
        v.setflags(write=False)
        f.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @cached_property
    def edges(self) -> np.ndarray:
        """Unique edges as an (E, 2) array of sorted pairs, lexicographic order."""
        return unique_edges(self.faces)

    def valence(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n_vertices)

    def boundary_edges(self) -> np.ndarray:
        return boundary_edges(self.faces)

    def boundary_vertices(self) -> np.ndarray:
        return np.unique(self.boundary_edges().ravel())

    def scaled(self, h: float) -> "Triangulation2":
        return Triangulation2(self.vertices * h, self.faces)

    def translated(self, shift) -> "Triangulation2":
        return Triangulation2(self.vertices + np.asarray(shift, float), self.faces)


@dataclass(frozen=True)
class RefinementMap:
    """Provenance of one midpoint refinement.

    ``parent_edge[m]`` is the parent edge bisected by child vertex
    ``old_count + m``.
    """

    parent_edge: np.ndarray
    old_count: int

    @property
    def new_count(self) -> int:
        return self.old_count + len(self.parent_edge)

    def to_json(self) -> str:
        return json.dumps(
            {"old_count": int(self.old_count),
             "parent_edge": self.parent_edge.astype(int).tolist()})

    @classmethod
    def from_json(cls, text: str) -> "RefinementMap":
        d = json.loads(text)
        edges = np.asarray(d["parent_edge"], dtype=np.int64).reshape(-1, 2)
        return cls(edges, int(d["old_count"]))


@dataclass
class DataLevel:
    """Values attached to a triangulation at subdivision level ``level``.

    ``values`` may be (N,) or (N, m); extra columns are refined
    independently, which lets many noise realisations share one pass.
    """

    tri: Triangulation2
    values: np.ndarray
    level: int = 0
    base_L: float = 1.0
    history: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape[0] != self.tri.n_vertices:
            raise MeshError(
                f"{self.values.shape[0]} values for {self.tri.n_vertices} vertices")
        if self.level < 0:
            raise MeshError("level must be nonnegative")
        if not self.base_L > 0:
            raise MeshError("base_L must be positive")

    @property
    def radius(self) -> float:
        """Ball radius used when refining this level, 2^-k L."""
        return self.base_L * 2.0 ** (-self.level)


def unique_edges(faces) -> np.ndarray:
    faces = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
    if len(faces) == 0:
        return np.zeros((0, 2), dtype=np.int64)
    e = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    e.sort(axis=1)
    return np.unique(e, axis=0)


def boundary_edges(faces) -> np.ndarray:
    faces = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
    e = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    e.sort(axis=1)
    uniq, counts = np.unique(e, axis=0, return_counts=True)
    return uniq[counts == 1]


def _face_determinants(vertices, faces):
    a, b, c = (vertices[faces[:, i]] for i in range(3))
    return (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])


def validate(tri: Triangulation2) -> list[str]:
    """Return a list of human-readable violations; empty means valid."""
    report = []
    v, f = tri.vertices, tri.faces
    if not np.all(np.isfinite(v)):
        report.append("non-finite vertex coordinate")
    n = len(v)
    bad = np.nonzero((f < 0).any(axis=1) | (f >= n).any(axis=1))[0]
    for i in bad:
        report.append(f"face {i}: index out of range {tuple(int(x) for x in f[i])}")
    dup = (f[:, 0] == f[:, 1]) | (f[:, 1] == f[:, 2]) | (f[:, 0] == f[:, 2])
    for i in np.nonzero(dup)[0]:
        report.append(f"face {i}: duplicate index in face {tuple(int(x) for x in f[i])}")
    ok = ~dup
    ok[bad] = False
    if ok.any():
        idx = np.nonzero(ok)[0]
        det = _face_determinants(v, f[idx])
        a, b, c = (v[f[idx, i]] for i in range(3))
        scale = np.max([np.sum((a - b) ** 2, 1), np.sum((b - c) ** 2, 1),
                        np.sum((c - a) ** 2, 1)], axis=0)
        degenerate = np.abs(det) <= DEGENERATE_RTOL * scale
        for i in idx[degenerate]:
            report.append(f"face {i}: degenerate face (zero area)")
    return report


def check_valid(tri: Triangulation2) -> None:
    report = validate(tri)
    if report:
        shown = "; ".join(report[:5])
        more = f" (+{len(report) - 5} more)" if len(report) > 5 else ""
        raise MeshError(f"invalid triangulation: {shown}{more}")


def refine_connectivity(n_vertices: int, faces):
    """Split every face into four via edge midpoints.

    Works for any embedding dimension since only indices are touched.
    Returns ``(edges, child_faces)`` where child vertex ``n_vertices + m``
    sits on ``edges[m]``.
    """
    faces = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
    edges = unique_edges(faces)
    # edge key lookup; edges are lexicographically sorted so keys are too
    keys = edges[:, 0] * n_vertices + edges[:, 1]

    def mid(i, j):
        lo, hi = np.minimum(i, j), np.maximum(i, j)
        return n_vertices + np.searchsorted(keys, lo * n_vertices + hi)

    a, b, c = faces[:, 0], faces[:, 1], faces[:, 2]
    mab, mbc, mca = mid(a, b), mid(b, c), mid(c, a)
    child = np.stack([
        np.stack([a, mab, mca], 1),
        np.stack([mab, b, mbc], 1),
        np.stack([mca, mbc, c], 1),
        np.stack([mab, mbc, mca], 1),
    ], axis=1).reshape(-1, 3)
    return edges, child


def midpoint_refine(tri: Triangulation2, check: bool = True):
    """One step of midpoint (1-to-4) refinement.

    Parent vertices keep their indices; midpoints are appended in ascending
    ``(min, max)`` edge order. Returns ``(child, RefinementMap)``.
    """
    if check:
        check_valid(tri)
    edges, child_faces = refine_connectivity(tri.n_vertices, tri.faces)
    v = tri.vertices
    mids = (v[edges[:, 0]] + v[edges[:, 1]]) / 2
    child = Triangulation2(np.concatenate([v, mids]), child_faces)
    return child, RefinementMap(edges, tri.n_vertices)


def diameter(tri: Triangulation2) -> float:
    """Longest edge length."""
    e = tri.edges
    if len(e) == 0:
        raise MeshError("triangulation has no edges")
    d = tri.vertices[e[:, 0]] - tri.vertices[e[:, 1]]
    return float(np.sqrt(np.max(np.sum(d * d, axis=1))))


# --- generators -------------------------------------------------------------

def lattice_patch(e1, e2, n: int, spacing: float = 1.0, diagonal=None) -> tuple[Triangulation2, np.ndarray]:
    """Triangulated lattice ``spacing * (i e1 + j e2)`` for ``|i|, |j| <= n``.

    Each lattice cell is cut along its shorter diagonal (``(1,-1)`` on the
    equilateral lattice); on ties the ``(1,1)`` diagonal is used. Returns the
    triangulation and the (N, 2) integer lattice indices of its vertices.
    """
    e1 = np.asarray(e1, float)
    e2 = np.asarray(e2, float)
    if diagonal is None:
        d_minus = np.linalg.norm(e1 - e2)
        d_plus = np.linalg.norm(e1 + e2)
        diagonal = (1, -1) if d_minus < d_plus * (1 - 1e-12) else (1, 1)
    ii, jj = np.meshgrid(np.arange(-n, n + 1), np.arange(-n, n + 1), indexing="ij")
    idx = np.stack([ii.ravel(), jj.ravel()], 1)
    m = 2 * n + 1
    vid = lambda i, j: (i + n) * m + (j + n)  # noqa: E731
    ci, cj = np.meshgrid(np.arange(-n, n), np.arange(-n, n), indexing="ij")
    ci, cj = ci.ravel(), cj.ravel()
    p00, p10, p01, p11 = vid(ci, cj), vid(ci + 1, cj), vid(ci, cj + 1), vid(ci + 1, cj + 1)
    if tuple(diagonal) == (1, -1):
        faces = np.concatenate([np.stack([p00, p10, p01], 1), np.stack([p10, p11, p01], 1)])
    else:
        faces = np.concatenate([np.stack([p00, p10, p11], 1), np.stack([p00, p11, p01], 1)])
    verts = spacing * (idx[:, :1] * e1 + idx[:, 1:] * e2)
    return Triangulation2(verts, faces), idx


def random_mesh(n_points: int, rng, box: float = 1.0) -> Triangulation2:
    """Delaunay triangulation of random points in ``[-box, box]^2`` (corners included)."""
    corners = np.array([[-1, -1], [1, -1], [1, 1], [-1, 1]], float) * box
    pts = np.concatenate([corners, rng.uniform(-box, box, size=(max(n_points - 4, 0), 2))])
    tri = Delaunay(pts)
    faces = tri.simplices.copy()
    # drop slivers Delaunay can emit for near-collinear hull points
    det = _face_determinants(pts, faces)
    faces = faces[np.abs(det) > 1e-9 * box * box]
    return Triangulation2(pts, _orient_ccw(pts, faces))


def _orient_ccw(pts, faces):
    det = _face_determinants(pts, faces)
    faces = faces.copy()
    flip = det < 0
    faces[flip] = faces[flip][:, [0, 2, 1]]
    return faces


def scattered_square_mesh(n_vertices: int = 227, half_width: float = 3.2,
                          target_diameter=(0.78, 0.84), seed: int = 0,
                          max_tries: int = 500) -> Triangulation2:
    """Irregular Delaunay mesh of ``[-a, a]^2`` with a prescribed edge-length range.

    Evenly spaced boundary points keep hull edges short; interior points
    are a jittered grid. Candidate meshes are drawn from a seeded stream
    until the longest edge lands in ``target_diameter``.
    """
    rng = np.random.default_rng(seed)
    a = half_width
    # boundary: k segments per side
    k = max(int(round(np.sqrt(n_vertices))) - 1, 2)
    t = np.linspace(-a, a, k + 1)[:-1]
    bnd = np.concatenate([
        np.stack([t, np.full_like(t, -a)], 1),
        np.stack([np.full_like(t, a), t], 1),
        np.stack([-t, np.full_like(t, a)], 1),
        np.stack([np.full_like(t, -a), -t], 1),
    ])
    n_in = n_vertices - len(bnd)
    if n_in < 1:
        raise MeshError("too few vertices for the boundary resolution")
    m = int(np.floor(np.sqrt(n_in)))
    h = 2 * a / (m + 1)
    g = -a + h * np.arange(1, m + 1)
    gx, gy = np.meshgrid(g, g, indexing="ij")
    grid = np.stack([gx.ravel(), gy.ravel()], 1)
    lo, hi = target_diameter
    for _ in range(max_tries):
        jitter = rng.uniform(-0.3 * h, 0.3 * h, size=grid.shape)
        extra = rng.uniform(-a + h / 2, a - h / 2, size=(n_in - len(grid), 2))
        pts = np.concatenate([bnd, grid + jitter, extra])
        faces = _orient_ccw(pts, Delaunay(pts).simplices)
        cand = Triangulation2(pts, faces)
        if validate(cand):
            continue
        if lo <= diameter(cand) <= hi:
            return cand
    raise MeshError(f"no mesh with diameter in {target_diameter} after {max_tries} tries")


def distance_to_boundary(tri: Triangulation2, points) -> np.ndarray:
    """Euclidean distance from each point to the nearest boundary edge."""
    p = np.asarray(points, float).reshape(-1, 2)
    be = tri.boundary_edges()
    if len(be) == 0:
        return np.full(len(p), np.inf)
    a = tri.vertices[be[:, 0]]
    ab = tri.vertices[be[:, 1]] - a
    ab2 = np.sum(ab * ab, axis=1)
    out = np.empty(len(p))
    step = max(1, 2_000_000 // max(len(be), 1))
    for s in range(0, len(p), step):
        q = p[s:s + step, None, :] - a[None]
        t = np.clip(np.sum(q * ab[None], axis=2) / ab2, 0.0, 1.0)
        d = q - t[..., None] * ab[None]
        out[s:s + step] = np.sqrt(np.min(np.sum(d * d, axis=2), axis=1))
    return out
