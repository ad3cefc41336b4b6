"""Stationary masks of the scheme on uniform (lattice) grids.

On a lattice ``v_l = 2^-k [e1, e2] l`` every ball is a translate of one of
four balls, picked by the parity of ``l``: (0, 0) is the replacement rule,
(1, 0), (0, 1), (1, 1) are the three insertion rules. The mask entry at
offset ``m`` (with ``m = l - 2 i``) is the coefficient of parent ``i``.

Printed 7x7 matrices put offset ``(m1, m2)`` at row ``m2 + 3`` and column
``m1 + 3``; this is the layout under which the published equilateral
matrices agree with the lattice neighbourhoods.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import MaskError
from .mesh import DataLevel, lattice_patch
from .weights import WeightFunction, get_weight
from .wls import EPS_BALL, compute_coefficients, make_ball, refine_step

PARITIES = ((0, 0), (1, 0), (0, 1), (1, 1))


@dataclass(frozen=True)
class UniformGrid:
    e1: tuple
    e2: tuple
    kind: str = "custom"

    def __post_init__(self):
        if abs(np.linalg.det(self.basis)) < 1e-14:
            raise MaskError("lattice basis is singular")

    @property
    def basis(self) -> np.ndarray:
        return np.column_stack([np.asarray(self.e1, float), np.asarray(self.e2, float)])

    def point(self, index, level: int = 0):
        return 2.0 ** (-level) * (np.asarray(index, float) @ self.basis.T)

    @classmethod
    def equilateral(cls):
        return cls((1.0, 0.0), (0.5, math.sqrt(3) / 2), "equilateral")

    @classmethod
    def rectangular(cls):
        return cls((1.0, 0.0), (0.0, 1.0), "rectangular")

    @classmethod
    def from_kind(cls, kind: str):
        if kind in ("equilateral", "eq"):
            return cls.equilateral()
        if kind in ("rectangular", "rect"):
            return cls.rectangular()
        raise MaskError(f"unknown grid kind {kind!r}")


@dataclass
class Mask:
    """Four refinement rules keyed by parity; each maps offset ``m`` to a coefficient."""

    rules: dict
    grid: UniformGrid | None = None
    weight: str = ""
    L: float | None = None
    members: dict = field(default_factory=dict)

    def coefficients(self, parity) -> dict:
        return self.rules[tuple(parity)]

    def offsets(self):
        return sorted(m for r in self.rules.values() for m in r)

    def half_size(self) -> int:
        return max(max(abs(a), abs(b)) for a, b in self.offsets())

    def to_matrix(self, size: int | None = None) -> np.ndarray:
        """Interleave the four rules into one square matrix (row = m2, col = m1)."""
        h = self.half_size() if size is None else (size - 1) // 2
        out = np.zeros((2 * h + 1, 2 * h + 1))
        for rule in self.rules.values():
            for (m1, m2), c in rule.items():
                if max(abs(m1), abs(m2)) > h:
                    raise MaskError(f"offset {(m1, m2)} outside a {2 * h + 1}x{2 * h + 1} matrix")
                out[m2 + h, m1 + h] = c
        return out

    def rule_sums(self) -> dict:
        return {p: sum(r.values()) for p, r in self.rules.items()}

    def support(self) -> set:
        return {m for r in self.rules.values() for m, c in r.items() if c != 0}

    def is_rectangular_support(self) -> bool:
        s = self.support()
        xs = {m[0] for m in s}
        ys = {m[1] for m in s}
        return len(s) == len(xs) * len(ys)

    def to_dict(self) -> dict:
        return {
            "grid": None if self.grid is None else {
                "kind": self.grid.kind, "e1": list(self.grid.e1), "e2": list(self.grid.e2)},
            "weight": self.weight,
            "L": self.L,
            "rules": {f"{p[0]}{p[1]}": [[m[0], m[1], c] for m, c in sorted(r.items())]
                      for p, r in self.rules.items()},
            "matrix": self.to_matrix().tolist(),
        }

    def format_matrix(self, denominator: int | None = None, digits: int = 6) -> str:
        """Aligned text; with ``denominator`` entries are printed as integers over it."""
        M = self.to_matrix()
        if denominator is not None:
            cells = [[_as_numerator(x, denominator) for x in row] for row in M]
            head = f"1/{denominator} *\n"
        else:
            cells = [[f"{x:.{digits}f}" if x else "0" for x in row] for row in M]
            head = ""
        width = max(len(c) for row in cells for c in row)
        return head + "\n".join(" ".join(c.rjust(width) for c in row) for row in cells)


def _as_numerator(x, den):
    q = x * den
    if abs(q - round(q)) < 1e-9:
        return str(int(round(q)))
    return str(Fraction(x).limit_denominator(10 * den))


def _window_check(d, L, eps):
    near = np.abs(d - L) <= eps * L
    if near.any():
        raise MaskError(f"ambiguous stencil window: a lattice vertex lies at distance "
                        f"{d[near][0]:.12g} from the centre, on the ball boundary L={L:g}")


def lattice_ball(grid: UniformGrid, parity, L: float, level: int = 0, eps: float = EPS_BALL):
    """Lattice indices and coordinates of the level-``level`` ball for one parity class."""
    B = grid.basis
    scale = 2.0 ** (-level)
    r = scale * L
    center = 0.5 * scale * (B @ np.asarray(parity, float))
    # index box large enough to contain the ball
    s = np.linalg.svd(B, compute_uv=False)
    n = int(math.ceil(L / s[-1])) + 2
    ii, jj = np.meshgrid(np.arange(-n, n + 1), np.arange(-n, n + 1), indexing="ij")
    idx = np.stack([ii.ravel(), jj.ravel()], 1)
    pts = scale * idx @ B.T
    d = np.sqrt(np.sum((pts - center) ** 2, axis=1))
    _window_check(d / scale, L, eps)
    keep = d < r
    return idx[keep], pts[keep], center, d[keep], r


def derive_mask(grid: UniformGrid, W, L: float, level: int = 0,
                shortcut: bool = True) -> Mask:
    """Compute the four rules by running the WLS rule on each lattice ball."""
    W = get_weight(W)
    rules, members = {}, {}
    for p in PARITIES:
        idx, pts, center, d, r = lattice_ball(grid, p, L, level)
        ball = make_ball(pts, center, W(d / r), radius=r)
        ball = compute_coefficients(ball, shortcut=shortcut)
        offs = np.asarray(p) - 2 * idx
        rules[p] = {(int(a), int(b)): float(c) for (a, b), c in zip(offs, ball.coefficients)}
        members[p] = idx
    return Mask(rules, grid, W.name, L, members)


# --- published masks ------------------------------------------------------------

_EQ_CONSTANT = [
    [0, 0, 0, 7, 7, 7, 7],
    [0, 0, 7, 10, 7, 10, 7],
    [0, 7, 7, 7, 7, 7, 7],
    [7, 10, 7, 10, 7, 10, 7],
    [7, 7, 7, 7, 7, 7, 0],
    [7, 10, 7, 10, 7, 0, 0],
    [7, 7, 7, 7, 0, 0, 0],
]
_EQ_HAT = [
    "000abba",
    "00bcdcb",
    "0bdeedb",
    "acefeca",
    "bdeedb0",
    "bcdcb00",
    "abba000",
]
_RECT_CONSTANT = [
    [0, 0, 6, 9, 6, 0, 0],
    [0, 8, 9, 8, 9, 8, 0],
    [6, 9, 6, 9, 6, 9, 6],
    [9, 8, 9, 8, 9, 8, 9],
    [6, 9, 6, 9, 6, 9, 6],
    [0, 8, 9, 8, 9, 8, 0],
    [0, 0, 6, 9, 6, 0, 0],
]
_RECT_HAT = [
    "00aba00",
    "0cdedc0",
    "adfgfda",
    "beghgeb",
    "adfgfda",
    "0cdedc0",
    "00aba00",
]


def equilateral_hat_symbols(L: float) -> dict:
    s3, s7 = math.sqrt(3), math.sqrt(7)
    g = -2 * (s3 - 10 * L + 2 * s7 + 4)
    return {
        "a": (2 * L - 3) / g,
        "b": (2 * L - s7) / g,
        "c": (L - 1) / (7 * L - 6),
        "d": (2 * L - s3) / g,
        "e": (2 * L - 1) / g,
        "f": L / (7 * L - 6),
        "g": g,
    }


def rectangular_hat_symbols(L: float) -> dict:
    s2, s5, s10 = math.sqrt(2), math.sqrt(5), math.sqrt(10)
    return {
        "a": -18 * (2 * L - s10) / (s2 - 6 * L + 2 * s10),
        "b": -18 * (2 * L - 3) / (s5 - 4 * L + 2),
        "c": -72 * (L - s2) / (4 * s2 - 9 * L + 4),
        "d": -18 * (2 * L - s5) / (s5 - 4 * L + 2),
        "e": -72 * (L - 1) / (4 * s2 - 9 * L + 4),
        "f": -18 * (2 * L - s2) / (s2 - 6 * L + 2 * s10),
        "g": -18 * (2 * L - 1) / (s5 - 4 * L + 2),
        "h": -72 * L / (4 * s2 - 9 * L + 4),
    }


# The rectangular hat symbols are as printed; they sum to 72 per rule rather
# than 1, i.e. they carry an implicit 1/72 factor like the W=1 matrix.
_RECT_HAT_SCALE = 1 / 72


def _mask_from_matrix(M, grid, weight, L) -> Mask:
    M = np.asarray(M, float)
    h = (M.shape[0] - 1) // 2
    rules = {p: {} for p in PARITIES}
    for r in range(M.shape[0]):
        for c in range(M.shape[1]):
            m1, m2 = c - h, r - h
            if M[r, c] != 0:
                rules[(m1 % 2, m2 % 2)][(m1, m2)] = float(M[r, c])
    return Mask(rules, grid, weight, L)


def paper_matrix(grid_kind: str, w_kind: str, L: float | None = None) -> np.ndarray:
    """The published 7x7 mask, scaled so every rule sums to one."""
    w_kind = get_weight(w_kind).kind
    if (grid_kind, w_kind) == ("equilateral", "constant"):
        return np.asarray(_EQ_CONSTANT, float) / 70
    if (grid_kind, w_kind) == ("rectangular", "constant"):
        return np.asarray(_RECT_CONSTANT, float) / 72
    if w_kind == "hat":
        if L is None:
            raise MaskError("hat masks need L")
        if grid_kind == "equilateral":
            sym, layout, scale = equilateral_hat_symbols(L), _EQ_HAT, 1.0
        elif grid_kind == "rectangular":
            sym, layout, scale = rectangular_hat_symbols(L), _RECT_HAT, _RECT_HAT_SCALE
        else:
            raise MaskError(f"no published mask for grid {grid_kind!r}")
        return np.array([[0.0 if ch == "0" else scale * sym[ch] for ch in row]
                         for row in layout])
    raise MaskError(f"no published mask for ({grid_kind!r}, {w_kind!r})")


def paper_mask(grid_kind: str, w_kind, L: float | None = None) -> Mask:
    grid = UniformGrid.from_kind(grid_kind)
    M = paper_matrix(grid.kind, w_kind, L)
    return _mask_from_matrix(M, grid, get_weight(w_kind).kind, L)


# --- basic limit function -------------------------------------------------------

def _inradius(grid: UniformGrid, n: int) -> float:
    """Distance from the origin to the boundary of the index box |i|,|j| <= n."""
    e1, e2 = np.asarray(grid.e1, float), np.asarray(grid.e2, float)
    det = abs(np.linalg.det(grid.basis))
    return n * det / max(np.linalg.norm(e1), np.linalg.norm(e2))


def basic_limit_function(grid: UniformGrid, W, L: float, iterations: int,
                         half_width: int | None = None, data: str = "delta"):
    """Refine delta data at the origin ``iterations`` times on a lattice patch.

    Values can only spread ``L + L/2 + ...`` < 2L from the origin, and a
    ball is truncated only within one radius of the patch boundary, so a
    patch whose inradius exceeds 2L is free of boundary effects. Returns
    ``(vertices, values, level)``.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if half_width is None:
        half_width = int(math.ceil(2 * L / _inradius(grid, 1))) + 1
    if _inradius(grid, half_width) <= 2 * L:
        raise MaskError(f"patch half-width {half_width} too small: boundary effects "
                        f"would reach the support (inradius must exceed 2L = {2 * L:g})")
    tri, idx = lattice_patch(grid.e1, grid.e2, half_width)
    if data == "delta":
        z = ((idx[:, 0] == 0) & (idx[:, 1] == 0)).astype(float)
    elif data == "ones":
        z = np.ones(len(idx))
    else:
        raise ValueError(f"unknown data {data!r}")
    level = DataLevel(tri, z, 0, L)
    for _ in range(iterations):
        level = refine_step(level, W)
    return level.tri.vertices, level.values, level


def hexagon_contains(points, radius: float, tol: float = 1e-12) -> np.ndarray:
    """Whether points lie in the regular hexagon with vertices at ``radius`` on the x axis."""
    p = np.asarray(points, float)
    ok = np.ones(len(p), bool)
    apothem = radius * math.sqrt(3) / 2
    for k in range(6):
        ang = math.pi / 6 + k * math.pi / 3
        n = np.array([math.cos(ang), math.sin(ang)])
        ok &= p @ n <= apothem + tol
    return ok
