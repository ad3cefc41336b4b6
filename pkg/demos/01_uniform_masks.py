"""Uniform grids: the adaptive rule collapses to a fixed stationary mask.

On a regular lattice every L-ball at level k looks the same up to scale,
so the weighted least-squares rule becomes one finite mask per lattice.
This script derives those masks, prints them as integer matrices over
their common denominator, and shows the noise-reduction factor theta.

    python3 demos/01_uniform_masks.py
"""

from fractions import Fraction

import numpy as np

from wlsubdiv import UniformGrid, derive_mask
from wlsubdiv.analysis import theta_of_mask


def show(title, M, denom):
    print(f"\n{title}  (x 1/{denom})")
    for row in M[::-1]:  # print with the second lattice coordinate increasing upward
        print("  " + " ".join(f"{x * denom:6.2f}" if x else "     ." for x in row))


for kind, L in (("equilateral", 1.6), ("rectangular", 1.7)):
    grid = UniformGrid.from_kind(kind)
    m1 = derive_mask(grid, "constant", L)
    M = m1.to_matrix(7)
    denom = int(np.lcm.reduce([Fraction(float(x)).limit_denominator(1000).denominator
                               for x in M.ravel() if x]))
    show(f"{kind}, W = 1, L = {L}", M, denom)
    print(f"  theta = {theta_of_mask(m1):.6f}")

    mh = derive_mask(grid, "hat", L)
    show(f"{kind}, W = 1 - t, L = {L}", mh.to_matrix(7), denom)
    print(f"  theta = {theta_of_mask(mh):.6f}; every coefficient positive: "
          f"{bool((mh.to_matrix(7)[M != 0] > 0).all())}")

# theta is the largest sum of squared rule coefficients; for W = 1 on the
# equilateral lattice each rule averages seven values, giving exactly 1/7
