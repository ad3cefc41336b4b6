"""Radial weight functions W: [0, 1) -> (0, 1]."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import WeightDomainError

KINDS = ("constant", "hat", "gaussian", "tabulated")


@dataclass(frozen=True, eq=False)
class WeightFunction:
    """A radial weight profile evaluated at normalised distance ``t``.

    Calling the object evaluates the raw profile with no domain check;
    use :func:`evaluate_weight` inside stencil code.
    """

    kind: str
    grid: np.ndarray | None = None
    samples: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.kind == "tabulated":
            g = np.asarray(self.grid, float)
            s = np.asarray(self.samples, float)
            if g.ndim != 1 or g.shape != s.shape or len(g) < 2:
                raise ValueError("tabulated weight needs matching 1-D grid and samples")
            if np.any(np.diff(g) <= 0):
                raise ValueError("tabulated grid must be strictly increasing")
            if g[0] > 0 or g[-1] < 1 - 1e-12:
                # values are held constant past the ends, but insist the
                # table actually describes [0, 1)
                raise ValueError("tabulated grid must span [0, 1)")
            if np.any(s <= 0) or np.any(s > 1):
                raise ValueError("tabulated samples must lie in (0, 1]")
            object.__setattr__(self, "grid", g)
            object.__setattr__(self, "samples", s)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "constant":
            return np.ones_like(t)
        if self.kind == "hat":
            return 1.0 - t
        if self.kind == "gaussian":
            return np.exp(-((2.5 * t) ** 2) / 2)
        return np.interp(t, self.grid, self.samples)

    @property
    def name(self) -> str:
        return self.kind

    def __repr__(self):
        return f"WeightFunction({self.kind!r})"


CONSTANT = WeightFunction("constant")
HAT = WeightFunction("hat")
GAUSSIAN = WeightFunction("gaussian")


def tabulated(grid, samples) -> WeightFunction:
    return WeightFunction("tabulated", np.asarray(grid, float), np.asarray(samples, float))


def load_table(path) -> WeightFunction:
    """Read a two-column ``t,W`` CSV (header lines starting with ``#`` ignored)."""
    data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    if data.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns t,W")
    return tabulated(data[:, 0], data[:, 1])


def get_weight(spec) -> WeightFunction:
    """Resolve ``constant|hat|gaussian|table:<path>`` (or pass a WeightFunction through)."""
    if isinstance(spec, WeightFunction):
        return spec
    spec = str(spec)
    aliases = {"constant": CONSTANT, "one": CONSTANT, "1": CONSTANT,
               "hat": HAT, "gaussian": GAUSSIAN, "gauss": GAUSSIAN}
    if spec in aliases:
        return aliases[spec]
    if spec.startswith("table:"):
        return load_table(spec[len("table:"):])
    raise ValueError(f"unknown weight {spec!r}; expected constant|hat|gaussian|table:<path>")


def evaluate_weight(W: WeightFunction, distance, level: int, base_L: float):
    """Weight of a vertex at ``distance`` from the centre of a level-``level`` ball.

    The distance is normalised by the ball radius ``2^-level * base_L`` and
    must fall in ``[0, 1)``; anything else means the stencil and the weights
    disagree, so it is an error rather than clamped.
    """
    radius = base_L * 2.0 ** (-level)
    d = np.asarray(distance, dtype=float)
    t = d / radius
    if np.any(~(d >= 0)) or np.any(~(t < 1)):
        raise WeightDomainError(
            f"distance outside [0, {radius!r}) for level {level}, L={base_L}")
    out = W(t)
    return float(out) if out.ndim == 0 else out
