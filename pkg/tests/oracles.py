"""Independent reference implementations used only by the tests.

These deliberately avoid the library's code paths: coefficients come from
a least-squares solve of the sqrt-weighted design matrix, balls from brute
force distance loops, refinement from per-vertex Python loops.
"""

import numpy as np


def lstsq_coefficients(points, center, weights):
    """Evaluation functional of the weighted degree-1 fit at ``center``.

    Solves min ||sqrt(w) (A c - z)|| for every unit data vector at once
    with numpy's SVD-based lstsq; row 0 of the solution is the value at
    the centre (A is centred there).
    """
    p = np.asarray(points, float) - np.asarray(center, float)
    sw = np.sqrt(np.asarray(weights, float))
    A = np.column_stack([np.ones(len(p)), p]) * sw[:, None]
    C, *_ = np.linalg.lstsq(A, np.diag(sw), rcond=None)
    return C[0]


def brute_ball(vertices, center, radius):
    return [j for j, v in enumerate(np.asarray(vertices, float))
            if np.hypot(v[0] - center[0], v[1] - center[1]) < radius]


def brute_refine(vertices, faces, values, radius, W):
    """One refinement step written as plain loops over new vertices."""
    V = np.asarray(vertices, float)
    edges = sorted({tuple(sorted((int(f[a]), int(f[b]))))
                    for f in faces for a, b in ((0, 1), (1, 2), (2, 0))})
    new = np.concatenate([V, [(V[i] + V[j]) / 2 for i, j in edges]])
    out = np.empty(len(new))
    for k, c in enumerate(new):
        members = brute_ball(V, c, radius)
        d = np.array([np.hypot(*(V[j] - c)) for j in members])
        alpha = lstsq_coefficients(V[members], c, W(d / radius))
        out[k] = alpha @ np.asarray(values, float)[members]
    return new, out


def mask_convolution(mask, values_by_index, target_index):
    """Level-1 value at lattice index ``target_index`` from level-0 lattice data.

    Target ``l`` reads parent ``i`` with coefficient a_{l - 2i}.
    """
    l = np.asarray(target_index)
    parity = (int(l[0]) % 2, int(l[1]) % 2)
    total = 0.0
    for (m1, m2), c in mask.rules[parity].items():
        i = ((l[0] - m1) // 2, (l[1] - m2) // 2)
        total += c * values_by_index[i]
    return total
