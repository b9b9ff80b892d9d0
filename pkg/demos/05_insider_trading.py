"""A trader who sees a noisy preview X = W_1 + eps V of the final price.

The preview reveals a drift (X_s - W_s) / ((1 + eps^2)(1 - s)). Trading on it
earns a positive expected profit, shrinking as the noise grows, while an
uninformed trader in a driftless market earns nothing on average.
"""

import numpy as np

from enlargelab import _rng
from enlargelab.expansion import noisy_signal
from enlargelab.insider import insider_drift_signal, pnl_samples
from enlargelab.paths import make_uniform_grid, simulate_bm
from enlargelab.stats_verify import mean_ci

grid = make_uniform_grid(1.0, 2**8)
W = simulate_bm(grid, 20000, seed=5)
V = simulate_bm(grid, 20000, seed=5, stream=_rng.NOISE_V)
price = W.truncate(0.9)
for eps in (0.05, 0.1, 0.5, 2.0):
    drift = insider_drift_signal(price, noisy_signal(W, V, eps), eps)
    m, hw, _ = mean_ci(pnl_samples(price, drift))
    expected = np.log(10) / (1 + eps**2)
    print(f"eps={eps:<4} insider P&L {m:.3f} +/- {hw:.3f} (continuous-time value {expected:.3f})")
m, hw, _ = mean_ci(pnl_samples(price, np.zeros_like(price.paths)))
print(f"uninformed P&L {m:.3f} +/- {hw:.3f}")
