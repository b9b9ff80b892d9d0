"""Progressive enlargement with the last passage times of a Bessel 3 process.

For a level ladder with spacing eps, the compensator combines a band term
(time spent between consecutive last passages) with -int ds/Z. The band term
has the same mean as int_0^1 ds/Z, and the compensator approaches the Pitman
one as eps shrinks.
"""

import numpy as np

from enlargelab.expansion import compensator_honest_bessel, compensator_pitman, honest_band_term, honest_time_ladders
from enlargelab.paths import TailRule, future_infimum_ensemble, left_integral, make_uniform_grid, simulate_bessel3
from enlargelab.stats_verify import mean_ci

grid = make_uniform_grid(1.0, 2**9)
Z = simulate_bessel3(grid, 3000, seed=3)
X = future_infimum_ensemble(Z, TailRule.EXACT_BESSEL3, bridge=True, seed=3)
with np.errstate(divide="ignore"):
    I = left_integral(1.0 / Z.paths, grid.times)[0][:, -1]
pitman = compensator_pitman(Z, X).finite_variation.paths
m, hw, _ = mean_ci(I)
print(f"E[int_0^1 ds/Z] = {m:.4f} +/- {hw:.4f}")
for eps in (0.4, 0.2, 0.1):
    ladder = honest_time_ladders(Z, X, eps)
    S, _ = honest_band_term(Z, ladder)
    A = compensator_honest_bessel(Z, ladder).finite_variation.paths
    ms, hs, _ = mean_ci(S.paths[:, -1])
    dist = np.abs(A - pitman).max(axis=1).mean()
    print(f"eps={eps:<4} band mean {ms:.4f} +/- {hs:.4f}, mean sup distance to Pitman {dist:.4f}")
