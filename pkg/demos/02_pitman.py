"""Bessel 3 with knowledge of its future infimum.

Z is the norm of a 3-D Brownian motion and X_t = inf_{u >= t} Z_u. Knowing X
turns Z - 2X into a Brownian motion. The future infimum is computed with
Brownian-bridge minima between grid points and an exact tail beyond the horizon.
"""

from enlargelab.expansion import compensator_pitman
from enlargelab.paths import TailRule, future_infimum_ensemble, make_uniform_grid, simulate_bessel3
from enlargelab.stats_verify import ks_normality, quadratic_variation_paths

grid = make_uniform_grid(1.0, 2**10)
Z = simulate_bessel3(grid, 4000, seed=2)
X = future_infimum_ensemble(Z, TailRule.EXACT_BESSEL3, bridge=True, seed=2)
M = compensator_pitman(Z, X).martingale_part

print(f"mean QV of Z - 2X over [0, 1]: {quadratic_variation_paths(M.paths)[:, -1].mean():.4f} (target 1)")
ks = ks_normality(M.at(1.0) - M.at(0.5), 0.5)
print(f"KS test of increments on [0.5, 1]: D = {ks.statistic:.4f}, p = {ks.p_value:.3f}")
