"""How fast discretized information approaches the continuous filtration.

Projecting B_s onto the values of B on a grid of mesh h leaves an error whose
mean is the bridge prediction sqrt(2/pi) * sqrt(h) / 2 at a midpoint.
"""

from enlargelab.paths import make_uniform_grid, simulate_bm
from enlargelab.weakconv import weak_convergence_rate

B = simulate_bm(make_uniform_grid(1.0, 200), 20000, seed=4)
report = weak_convergence_rate(B, [0.1, 0.05, 0.02, 0.01], 0.555, 1.0)
print(" mesh   empirical  predicted  95% halfwidth")
for row in report.rows():
    print(f"{row['mesh']:5.2f}   {row['empirical_error']:.5f}    {row['predicted_error']:.5f}    {row['ci_halfwidth']:.5f}")
