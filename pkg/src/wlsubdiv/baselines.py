"""Shepard and degree-1 moving least squares approximation of scattered data.

Here the weight profile is extended by zero beyond 1, so a site at exactly
distance ``L`` still gets ``W(1)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import SingularSystemError, WLSError
from .weights import get_weight

COND_WARN = 1e12
#: beyond this the 3x3 system is numerically singular (exactly collinear
#: sites give a huge but finite condition number after rounding)
COND_SINGULAR = 1 / np.finfo(float).eps


class ConditionWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class ScatteredData:
    sites: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.sites, float).reshape(-1, 2)
        z = np.asarray(self.values, float)
        if len(s) != len(z):
            raise ValueError(f"{len(s)} sites but {len(z)} values")
        if len(np.unique(s, axis=0)) != len(s):
            raise ValueError("sites must be distinct")
        object.__setattr__(self, "sites", s)
        object.__setattr__(self, "values", z)


def _weights(W, d, L):
    t = d / L
    return np.where(t <= 1.0, W(np.minimum(t, 1.0)), 0.0)


def shepard_eval(data: ScatteredData, W, L: float, target) -> float:
    W = get_weight(W)
    target = np.asarray(target, float).reshape(2)
    d = np.sqrt(np.sum((data.sites - target) ** 2, axis=1))
    w = _weights(W, d, L)
    s = w.sum()
    if not s > 0:
        raise WLSError(f"empty neighborhood: no site within {L:g} of {target.tolist()}")
    return float(w @ data.values / s)


def _solve_local(sites, values, w, target):
    u = sites - target
    A = np.column_stack([np.ones(len(u)), u])
    M = A.T @ (w[:, None] * A)
    rhs = A.T @ (w * values)
    cond = np.linalg.cond(M)
    if not cond < COND_SINGULAR:
        raise SingularSystemError(f"collinear neighborhood around {target.tolist()}")
    if cond > COND_WARN:
        warnings.warn(f"ill-conditioned local fit (cond={cond:.3g}) at {target.tolist()}",
                      ConditionWarning, stacklevel=3)
    # LU with partial pivoting (LAPACK gesv)
    try:
        coef = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError:
        raise SingularSystemError(f"collinear neighborhood around {target.tolist()}") from None
    return coef[0]


def mls1_eval(data: ScatteredData, W, L: float, target) -> float:
    """Value at ``target`` of the weighted degree-1 least squares fit.

    The fit is done in coordinates centred at the target, so the value is
    just the constant term.
    """
    W = get_weight(W)
    target = np.asarray(target, float).reshape(2)
    d = np.sqrt(np.sum((data.sites - target) ** 2, axis=1))
    w = _weights(W, d, L)
    keep = w > 0
    if keep.sum() < 3:
        raise SingularSystemError(
            f"collinear neighborhood: {int(keep.sum())} weighted sites near {target.tolist()}")
    return float(_solve_local(data.sites[keep], data.values[keep], w[keep], target))


def _neighborhoods(data, targets, L):
    tree = cKDTree(data.sites)
    return tree.query_ball_point(targets, L * (1 + 1e-12))


def shepard(data: ScatteredData, W, L: float, targets) -> np.ndarray:
    """Vectorised :func:`shepard_eval` over an (M, 2) array of targets."""
    W = get_weight(W)
    targets = np.asarray(targets, float).reshape(-1, 2)
    out = np.empty(len(targets))
    for k, nb in enumerate(_neighborhoods(data, targets, L)):
        nb = np.asarray(nb, int)
        d = np.sqrt(np.sum((data.sites[nb] - targets[k]) ** 2, axis=1))
        w = _weights(W, d, L)
        s = w.sum()
        if not s > 0:
            raise WLSError(f"empty neighborhood around target {k}")
        out[k] = w @ data.values[nb] / s
    return out


def mls1(data: ScatteredData, W, L: float, targets) -> np.ndarray:
    """Vectorised :func:`mls1_eval`: batched 3x3 normal equations."""
    W = get_weight(W)
    targets = np.asarray(targets, float).reshape(-1, 2)
    nbs = _neighborhoods(data, targets, L)
    counts = np.array([len(nb) for nb in nbs])
    rows = np.repeat(np.arange(len(targets)), counts)
    cols = np.concatenate([np.asarray(nb, int) for nb in nbs]) if len(rows) else np.zeros(0, int)
    u = data.sites[cols] - targets[rows]
    w = _weights(W, np.sqrt(np.sum(u * u, axis=1)), L)
    A = np.column_stack([np.ones(len(u)), u])
    M = np.zeros((len(targets), 3, 3))
    rhs = np.zeros((len(targets), 3))
    np.add.at(M, rows, w[:, None, None] * A[:, :, None] * A[:, None, :])
    np.add.at(rhs, rows, (w * data.values[cols])[:, None] * A)
    cond = np.linalg.cond(M)
    bad = ~(cond < COND_SINGULAR) | (np.bincount(rows, w > 0, len(targets)) < 3)
    if bad.any():
        k = int(np.nonzero(bad)[0][0])
        raise SingularSystemError(f"collinear neighborhood around target {k}")
    if np.any(cond > COND_WARN):
        warnings.warn(f"{int(np.sum(cond > COND_WARN))} ill-conditioned local fits",
                      ConditionWarning, stacklevel=2)
    return np.linalg.solve(M, rhs[..., None])[:, 0, 0]
