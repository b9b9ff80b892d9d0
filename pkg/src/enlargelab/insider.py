"""Measure changes and trading with a noisy preview of the future price."""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .paths import PathEnsemble
from .stats_verify import VerificationReport, mean_ci

OVERFLOW_LOG = 700.0


@dataclass(frozen=True, eq=False)
class GirsanovDensity:
    """Density process U with U_0 = 1, and the kernel theta that produced it."""

    U: PathEnsemble
    kernel: np.ndarray

    @property
    def terminal(self):
        return self.U.paths[:, -1]


@dataclass(frozen=True)
class PnLReport:
    label: str
    mean: float
    ci_halfwidth: float
    stderr: float
    n_paths: int


def _on_grid(values, ensemble):
    v = np.asarray(values, dtype=float)
    return np.broadcast_to(v, ensemble.paths.shape)


def stochastic_exponential(theta, B):
    """U_t = exp(sum theta dB - 1/2 sum theta^2 ds), theta at left endpoints."""
    th = _on_grid(theta, B)
    if not np.all(np.isfinite(th[:, :-1])):
        raise InvalidArgument("theta must be finite")
    dB = np.diff(B.paths, axis=1)
    h = B.grid.steps
    logU = np.zeros_like(B.paths)
    np.cumsum(th[:, :-1] * dB - 0.5 * th[:, :-1] ** 2 * h, axis=1, out=logU[:, 1:])
    return GirsanovDensity(PathEnsemble(B.grid, np.exp(logU), B.seed, B.stream_scheme), np.array(th))


def _coefficients(model, Z):
    t = Z.grid.times[None, :]
    b = np.broadcast_to(model.b(t, Z.paths), Z.paths.shape)
    sig = np.broadcast_to(model.sigma(t, Z.paths), Z.paths.shape)
    zero = sig == 0
    if np.any(zero):
        i, k = np.argwhere(zero)[0]
        raise ZeroDivisionError(f"sigma = 0 on path {i} at t={Z.grid.times[k]:.6g}")
    return b, sig


def market_mpr(model, Z):
    """Market price of risk -b(t, Z_t) / sigma(t, Z_t)."""
    b, sig = _coefficients(model, Z)
    return -b / sig


def insider_drift_signal(W, X, eps):
    """(X_s - W_s) / ((1 + eps^2)(1 - s)), the drift the noisy preview reveals."""
    if W.grid.T >= 1.0:
        raise InvalidArgument("insider quantities need a horizon strictly below 1")
    s = W.grid.times
    return (X.paths[:, : len(s)] - W.paths) / ((1 + eps**2) * (1 - s))


def insider_mpr(model, W, X, eps, Z=None):
    """-(b(s, Z_s) - sigma(s, Z_s) (X_s - W_s) / ((1 + eps^2)(1 - s))) / sigma(s, Z_s).

    ``Z`` is the price path; it defaults to ``W`` (driftless unit-volatility price).
    """
    signal = insider_drift_signal(W, X, eps)
    b, sig = _coefficients(model, W if Z is None else Z)
    return -(b - sig * signal) / sig


def novikov_estimate(H, grid, test="novikov"):
    """Monte Carlo E[exp(1/2 int H^2 ds)] with a finiteness diagnostic.

    ``flags`` lists the instability signs found: overflowing paths, a
    confidence interval that fails to shrink from a quarter of the sample
    to all of it, or a single path carrying over 10% of the total.
    """
    Hv = np.asarray(H, dtype=float)
    Hv = np.broadcast_to(Hv, (Hv.shape[0] if Hv.ndim == 2 else 1, len(grid)))
    q = 0.5 * np.sum(Hv[:, :-1] ** 2 * grid.steps, axis=1)
    overflow = q > OVERFLOW_LOG
    vals = np.exp(q[~overflow])
    n = vals.size
    flags = []
    if overflow.any():
        flags.append(f"overflow on {int(overflow.sum())} paths")
    mean, hw = (float(vals.mean()), 0.0) if n else (float("inf"), float("inf"))
    if n >= 8:
        hw = 1.96 * vals.std(ddof=1) / np.sqrt(n)
        quarter = vals[: n // 4]
        hw_q = 1.96 * quarter.std(ddof=1) / np.sqrt(quarter.size)
        if hw > 0.75 * hw_q and hw > 1e-12 * mean:
            flags.append("confidence interval not shrinking")
        if n >= 100 and vals.max() > 0.1 * vals.sum():
            flags.append("single path dominates")
    return VerificationReport(test, mean, lo=mean - hw, hi=mean + hw, n=int(Hv.shape[0]),
                              kind="no-flags", flags=tuple(flags))


def price_under_measure(payoff, U, paths, test="price"):
    """Importance-sampling estimate E_P[U_T payoff(path)] with a 95% interval."""
    values = U.terminal * np.asarray(payoff(paths.paths), dtype=float)
    mean, hw, _ = mean_ci(values)
    return VerificationReport(test, mean, lo=mean - hw, hi=mean + hw, n=values.size, kind="interval")


def _positions(drift, strategy, sigma):
    if strategy == "sign":
        return np.sign(drift)
    if strategy == "proportional":
        return drift / sigma**2
    raise InvalidArgument(f"unknown strategy {strategy!r}")


def _wealth(Z, pos, cost):
    pos = np.asarray(pos, dtype=float)[:, : Z.paths.shape[1]]
    dZ = np.diff(Z.paths, axis=1)
    held = pos[:, :-1]
    gains = np.sum(held * dZ, axis=1)
    # open from flat, rebalance, liquidate at the horizon
    trades = np.abs(np.diff(held, axis=1, prepend=0.0, append=0.0)).sum(axis=1)
    return gains - cost * trades


def insider_pnl(Z, perceived_drift, strategy="proportional", cost=0.0, market_drift=None, sigma=1.0):
    """Self-financing P&L of an insider and of an uninformed trader.

    Positions are set at each left endpoint: the insider trades on its
    perceived drift, the uninformed trader on the market drift (flat when
    ``market_drift`` is None, i.e. a driftless model). Trading cost is
    ``cost`` times the total absolute position change.
    """
    if cost < 0:
        raise InvalidArgument("cost must be nonnegative")
    drift = _on_grid(perceived_drift, Z)
    reports = {}
    for label, d in (("insider", drift),
                     ("uninformed", np.zeros_like(Z.paths) if market_drift is None else _on_grid(market_drift, Z))):
        w = _wealth(Z, _positions(d, strategy, sigma), cost)
        mean, hw, se = mean_ci(w)
        reports[label] = PnLReport(label, mean, hw, se, w.size)
    return reports


def pnl_samples(Z, drift, strategy="proportional", cost=0.0, sigma=1.0):
    """Per-path terminal wealth for a given drift signal."""
    return _wealth(Z, _positions(_on_grid(drift, Z), strategy, sigma), cost)
