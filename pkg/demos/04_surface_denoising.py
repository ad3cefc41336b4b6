"""One refinement step on a noisy sphere.

Each new vertex is placed by fitting a local height function over a
principal-axis tangent frame of its neighbourhood; the fitted height at
the frame origin becomes the new point. Radial noise is partly averaged
out, which shows as a smaller RMS distance to the unit sphere.

    python3 demos/04_surface_denoising.py
"""

import numpy as np

from wlsubdiv.geom3d import icosphere, radial_noise, radial_rms, surface_subdivide

sphere = icosphere(3)
L = 1.6 * sphere.edge_lengths().max()
noisy = radial_noise(sphere, 0.02, np.random.Generator(np.random.Philox(3)))
print(f"input:  {noisy.n_vertices:6d} vertices, radial RMS {radial_rms(noisy):.5f}")
for it in (1, 2):
    out = surface_subdivide(noisy, "hat", L, it)
    print(f"step {it}: {out.n_vertices:6d} vertices, radial RMS {radial_rms(out):.5f}")
