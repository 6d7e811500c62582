"""Pre-build sweep: measure max |  ||w(t)-w(s)||^2 - |t-s| | over the
11-point grid {0, 0.1, ..., 1} for K in {1e2, 1e3, 1e4}, to freeze the
truncation-error bound asserted in the geometry tests and confirm the
~1/K decay."""

import sys

sys.path.insert(0, "src")

import numpy as np

from spiralwalk.geometry import SpiralRef
from spiralwalk.linalg import pairwise_sq_dists

grid = tuple(np.round(np.linspace(0.0, 1.0, 11), 10))
for k in (10**2, 10**3, 10**4):
    cloud = SpiralRef(grid, truncation_terms=k).cloud()
    d2 = pairwise_sq_dists(cloud.points, cloud.points)
    t = np.asarray(grid)
    target = np.abs(t[:, None] - t[None, :])
    err = np.abs(d2 - target).max()
    print(f"K={k:>6d}  max|d^2 - |t-s||={err:.6e}  err*K={err * k:.4f}")
