"""Enlarge a Brownian filtration with the time-reversed path.

Once B_{1-s} is known at time s, B stops being a martingale: its increments
drift towards the revealed value. Subtracting the compensator A restores a
Brownian motion M = B - A on [0, 0.45].
"""

import numpy as np

from enlargelab.expansion import compensator_reversed_closed
from enlargelab.models import gaussian_density
from enlargelab.paths import make_uniform_grid, simulate_bm
from enlargelab.stats_verify import drift_regression, quadratic_variation_paths, total_variation_paths

grid = make_uniform_grid(1.0, 2**10)
B = simulate_bm(grid, 4000, seed=1)
d = compensator_reversed_closed(B, B, gaussian_density(), t_max=0.45)
M = d.martingale_part

qv = quadratic_variation_paths(M.paths)
k = M.grid.index_of(0.375)
print(f"mean QV of M at t=0.375: {qv[:, k].mean():.4f} (Brownian value 0.375)")

s, t = 0.25, 0.375
feature = B.at(1 - s) - B.at(s)
for label, proc in (("raw B", B), ("compensated M", M)):
    r = drift_regression(proc, feature, (s, t))
    print(f"{label:>14}: slope {r.slope:+.4f} +/- {r.slope_se:.4f}, p = {r.slope_p_value:.2g}")

tv = total_variation_paths(d.finite_variation.paths).mean()
print(f"mean total variation of A: {tv:.4f} (closed form {np.sqrt(2 / np.pi) * (1 - np.sqrt(0.1)):.4f})")
