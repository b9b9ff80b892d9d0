"""Removing the drift of an Ornstein-Uhlenbeck price with a change of measure.

U is the stochastic exponential of the market price of risk. It has mean 1,
and under the reweighted measure the OU price is a martingale.
"""

from enlargelab.insider import market_mpr, novikov_estimate, stochastic_exponential
from enlargelab.models import resolve_model
from enlargelab.paths import make_uniform_grid, simulate_bm, simulate_diffusion_em
from enlargelab.stats_verify import mean_ci

model = resolve_model("ou(1,1)").model
grid = make_uniform_grid(1.0, 2**8)
B = simulate_bm(grid, 20000, seed=6)
Z = simulate_diffusion_em(model, grid, 1.0, 20000, seed=6)
theta = market_mpr(model, Z)
U = stochastic_exponential(theta, B)
for label, values in (("E[U_T]", U.terminal), ("E[U_T Z_T]", U.terminal * Z.paths[:, -1]),
                      ("E[Z_T] unweighted", Z.paths[:, -1])):
    m, hw, _ = mean_ci(values)
    print(f"{label:>18} = {m:.4f} +/- {hw:.4f}")
nov = novikov_estimate(theta, grid)
print(f"Novikov estimate {nov.statistic:.4f}, flags: {list(nov.flags) or 'none'}")
