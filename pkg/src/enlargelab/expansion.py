"""Compensators of Brownian motion under progressive enlargement.

Convention used by every function here: a :class:`Decomposition` stores the
finite-variation part ``A`` with ``A_0 = 0`` such that ``M = X - A`` is the
candidate martingale in the enlarged filtration. Paper-style formulas that
write the martingale as ``X + A`` are mapped into this convention; each
function's docstring states its drift explicitly.

All ``ds`` integrals are left-endpoint Riemann sums on the simulation grid
(see :func:`enlargelab.paths.left_integral`).
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument
from .models import SQRT_2_OVER_PI
from .paths import PathEnsemble, left_integral

CLIP = 1e8
REVERSED_T_MAX = 0.45
NOISY_T_MAX = 0.9


@dataclass(frozen=True, eq=False)
class Decomposition:
    """X = M + A on a common grid, one row per path."""

    original: PathEnsemble
    finite_variation: PathEnsemble
    martingale_part: PathEnsemble
    formula: str = ""
    params: dict = field(default_factory=dict)
    clip_count: int = 0
    warnings: tuple = ()

    @property
    def grid(self):
        return self.original.grid

    @property
    def n_paths(self):
        return self.original.n_paths

    def path(self, i):
        """(X, A, M) of path ``i`` as :class:`SamplePath` objects."""
        return (self.original.path(i), self.finite_variation.path(i), self.martingale_part.path(i))

    def manifest(self):
        return {"formula": self.formula, "params": self.params, "clip_count": self.clip_count,
                "warnings": list(self.warnings), "n_paths": self.n_paths, "t_max": self.grid.T}


def _decompose(X, A, formula, params, clip_count=0, notes=()):
    grid = X.grid
    A = np.asarray(A, dtype=float)
    return Decomposition(
        original=X,
        finite_variation=PathEnsemble(grid, A, X.seed, X.stream_scheme),
        martingale_part=PathEnsemble(grid, X.paths - A, X.seed, X.stream_scheme),
        formula=formula, params=dict(params), clip_count=int(clip_count), warnings=tuple(notes))


def _require_unit_symmetric(grid):
    if not np.isclose(grid.T, 1.0) or not grid.is_symmetric():
        raise InvalidArgument("needs a grid on [0, 1] symmetric under t -> 1 - t")


def _check_t_max(t_max, pole):
    if not 0 < t_max < pole:
        raise InvalidArgument(f"t_max must lie in (0, {pole:g})")


# ---------------------------------------------------------------------------
# reversed diffusion


def compensator_reversed_closed(X, B, density, t_max=REVERSED_T_MAX):
    """Drift of B after enlarging with the time-reversed diffusion.

    A_t = int_0^t score_x(1 - 2s, X_s, X_{1-s}) ds on [0, t_max], t_max < 1/2;
    for Brownian X = B this is int_0^t (B_{1-s} - B_s) / (1 - 2s) ds.
    """
    _check_t_max(t_max, 0.5)
    _require_unit_symmetric(X.grid)
    if B.grid != X.grid or B.n_paths != X.n_paths:
        raise InvalidArgument("X and B must share grid and path count")
    grid = X.grid.truncate(t_max)
    j = np.arange(len(grid))
    s = grid.times
    last = len(X.grid) - 1
    with np.errstate(divide="ignore", invalid="ignore"):
        f = density.score_x(np.maximum(1.0 - 2.0 * s, 1e-300), X.paths[:, j], X.paths[:, last - j])
    A, _ = left_integral(f, s)
    return _decompose(B.truncate(t_max), A, "reversed-closed",
                      {"density": density.name, "t_max": t_max})


def compensator_reversed_discretized(X, B, sub, density):
    """Blockwise drift A^(n) for a subdivision of [0, t_max], t_max < 1/2.

    On block [t_i, t_{i+1}) the integrand is score_x(1 - t_i - s, X_s, X_{1-t_i}).
    The subdivision lives on the truncated grid; its last point is t_max.
    """
    _require_unit_symmetric(X.grid)
    grid = sub.grid
    if len(grid) > len(X.grid) or not np.array_equal(grid.times, X.grid.times[: len(grid)]):
        raise InvalidArgument("subdivision grid must be an initial segment of the path grid")
    if np.any(sub.times >= 0.5):
        raise InvalidArgument("coarse points must lie below 1/2")
    s = grid.times
    j = np.arange(len(grid))
    coarse = sub.indices[sub.block_of()]
    t_c = grid.times[coarse]
    last = len(X.grid) - 1
    f = density.score_x(1.0 - t_c - s, X.paths[:, j], X.paths[:, last - coarse])
    A, _ = left_integral(f, s)
    return _decompose(B.truncate(grid.T), A, "reversed-discretized",
                      {"density": density.name, "n_coarse": int(sub.indices.size), "t_max": grid.T})


def remaining_bridge_drift(B_s, B_rev_s):
    """E(B_{1/2} - B_s | G_s) = (B_{1-s} - B_s) / 2."""
    return 0.5 * (np.asarray(B_rev_s) - np.asarray(B_s))


def bridge_conditional_mean(x, y, T0, T1, t):
    """E(B_t | B_T0 = x, B_T1 = y): linear interpolation."""
    if not T0 < T1:
        raise InvalidArgument("need T0 < T1")
    if not T0 <= t <= T1:
        raise InvalidArgument("t must lie in [T0, T1]")
    return (T1 - t) / (T1 - T0) * x + (t - T0) / (T1 - T0) * y


# ---------------------------------------------------------------------------
# noisy future signal X_t = W_1 + eps V_{1-t}


def noisy_signal(W, V, eps):
    """X_t = W_1 + eps V_{1-t} on a symmetric [0, 1] grid."""
    _require_unit_symmetric(W.grid)
    if V.grid != W.grid or V.n_paths != W.n_paths:
        raise InvalidArgument("W and V must share grid and path count")
    if eps < 0:
        raise InvalidArgument("eps must be nonnegative")
    return PathEnsemble(W.grid, W.paths[:, -1:] + eps * V.paths[:, ::-1], W.seed, W.stream_scheme)


def conditional_exp_noisy(W_t, X_t, t, T_query, eps):
    """E(W_T | H_t) = W_t + (T - t) / ((1 + eps^2)(1 - t)) (X_t - W_t)."""
    if not t < 1:
        raise InvalidArgument("t must be < 1")
    if not 0 <= t <= T_query <= 1:
        raise InvalidArgument("need 0 <= t <= T_query <= 1")
    return W_t + (T_query - t) / ((1 + eps**2) * (1 - t)) * (np.asarray(X_t) - np.asarray(W_t))


def noisy_tv_bound(eps, t_max):
    """sqrt(2/pi) int_0^t_max ds / sqrt((1 - s)(1 + eps^2)), uniform in the subdivision."""
    return SQRT_2_OVER_PI * 2.0 * (1.0 - np.sqrt(1.0 - t_max)) / np.sqrt(1.0 + eps**2)


def _integrand_values(h, grid, n_paths):
    if callable(h):
        H = np.asarray(h(grid.times), dtype=float)
    else:
        H = np.asarray(h, dtype=float)
    H = np.broadcast_to(H, (n_paths, len(grid)))
    if not np.all(np.isfinite(H)):
        raise InvalidArgument("integrand H must be finite on the grid")
    return H


def pole_order(H, grid):
    """Fitted exponent a in |H_s| ~ (1 - s)^(-a) over the second half of the grid."""
    s = grid.times
    sel = s >= s[-1] / 2
    level = np.mean(np.abs(H), axis=0)[sel]
    if np.any(level <= 0):
        return 0.0
    x = -np.log1p(-s[sel])
    return float(np.polyfit(x, np.log(level), 1)[0])


def compensator_noisy_future(W, V, eps, h=None, t_max=NOISY_T_MAX):
    """Decompose int H dW in the filtration enlarged by the noisy signal.

    A_t = int_0^t H_s (X_s - W_s) / ((1 + eps^2)(1 - s)) ds, so that
    int H dW - A is the candidate martingale; H = 1 when ``h`` is None.
    ``h`` may be a function of time or an (n_paths, n_times) array on W's grid.
    """
    _check_t_max(t_max, 1.0)
    X = noisy_signal(W, V, eps)
    grid = W.grid.truncate(t_max)
    n = len(grid)
    s = grid.times
    drift = (X.paths[:, :n] - W.paths[:, :n]) / ((1 + eps**2) * (1 - s))
    notes = []
    params = {"eps": eps, "t_max": t_max}
    if h is None:
        original = W.truncate(t_max)
    else:
        if callable(h):
            H = _integrand_values(h, grid, W.n_paths)
        else:
            H = _integrand_values(h, W.grid, W.n_paths)[:, :n]
        dW = np.diff(W.paths[:, :n], axis=1)
        stoch = np.zeros((W.n_paths, n))
        np.cumsum(H[:, :-1] * dW, axis=1, out=stoch[:, 1:])
        original = PathEnsemble(grid, stoch, W.seed, W.stream_scheme)
        drift = H * drift
        order = pole_order(H, grid)
        params["pole_order"] = order
        if order - 0.5 >= 0.5:
            notes.append(f"integrand order {order:.3f} violates (1-s)^-(1/2+alpha), alpha < 1/2")
            warnings.warn(notes[-1], RuntimeWarning)
    A, _ = left_integral(drift, s)
    return _decompose(original, A, "noisy-future", params, notes=notes)


def compensator_noisy_future_discretized(W, V, eps, sub):
    """Blockwise A^(n): on [t_i, t_{i+1}) integrand (X_{t_i} - W_s) / ((1 - s) + eps^2 (1 - t_i)).

    ``sub`` is a subdivision of the truncated grid [0, t_max], t_max < 1.
    """
    grid = sub.grid
    _check_t_max(grid.T, 1.0)
    if len(grid) > len(W.grid) or not np.array_equal(grid.times, W.grid.times[: len(grid)]):
        raise InvalidArgument("subdivision grid must be an initial segment of the path grid")
    X = noisy_signal(W, V, eps)
    n = len(grid)
    s = grid.times
    coarse = sub.indices[sub.block_of()]
    t_c = grid.times[coarse]
    f = (X.paths[:, coarse] - W.paths[:, :n]) / ((1 - s) + eps**2 * (1 - t_c))
    A, _ = left_integral(f, s)
    return _decompose(W.truncate(grid.T), A, "noisy-future-discretized",
                      {"eps": eps, "n_coarse": int(sub.indices.size), "t_max": grid.T})


# ---------------------------------------------------------------------------
# Bessel 3: Pitman drift and honest-time compensators


def _inverse_integral(Z):
    with np.errstate(divide="ignore"):
        inv = 1.0 / Z.paths
    interior_zero = int(np.count_nonzero(Z.paths[:, 1:-1] == 0.0))
    if interior_zero:
        warnings.warn(f"{interior_zero} interior zeros of Z; 1/Z skipped there", RuntimeWarning)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        integral, skipped = left_integral(inv, Z.grid.times)
    return integral, skipped


def compensator_pitman(Z, X):
    """Pitman drift of B = Z - Z_0 - int ds/Z after enlarging with the future infimum.

    A_t = 2(X_t - X_0) - int_0^t ds/Z_s, hence M = B - A = Z - Z_0 - 2(X - X_0).
    """
    if X.grid != Z.grid or X.n_paths != Z.n_paths:
        raise InvalidArgument("Z and X must share grid and path count")
    I, skipped = _inverse_integral(Z)
    B = PathEnsemble(Z.grid, Z.paths - Z.paths[:, :1] - I, Z.seed, Z.stream_scheme)
    A = 2.0 * (X.paths - X.paths[:, :1]) - I
    notes = (f"{skipped} singular quadrature points skipped",) if skipped else ()
    return _decompose(B, A, "pitman", {}, notes=notes)


@dataclass(frozen=True, eq=False)
class HonestTimeLadder:
    """Last-passage times tau[i, p] of level p*eps on path i (+inf if not reached)."""

    epsilon: float
    tau: np.ndarray
    levels: np.ndarray


def _ladder_rows(Z, X, times, eps):
    if not eps > 0:
        raise InvalidArgument("eps must be positive")
    n_levels = int(np.floor(np.max(Z) / eps)) + 2
    levels = eps * np.arange(n_levels)
    tau = np.full((Z.shape[0], n_levels), np.inf)
    for i in range(Z.shape[0]):
        # X is nondecreasing: first index where the future infimum reaches each level
        k = np.searchsorted(X[i], levels, side="left")
        reached = k < Z.shape[1]
        kk = k[reached]
        t_hit = np.zeros(kk.size)
        inner = kk > 0
        km = kk[inner]
        lo, hi = Z[i, km - 1], Z[i, km]
        lev = levels[reached][inner]
        t0, t1 = times[km - 1], times[km]
        below = lo < lev
        with np.errstate(divide="ignore", invalid="ignore"):
            # a crossing reached through a sub-grid dip sits at the step start,
            # which keeps tau monotone when several levels share one step
            frac = np.where(below, (lev - lo) / (hi - lo), 0.0)
        t_hit[inner] = t0 + np.clip(frac, 0.0, 1.0) * (t1 - t0)
        tau[i, reached] = t_hit
    return HonestTimeLadder(float(eps), tau, levels)


def honest_time_ladder(Z, eps, X=None):
    """Last passages of the levels p*eps by a single path.

    tau_p is the first time the future infimum reaches p*eps, placed inside
    its grid step by linear interpolation of Z (at the step start when the
    crossing came from a sub-grid dip). ``X`` defaults to the window-only future infimum.
    """
    from .paths import future_infimum

    if X is None:
        X = future_infimum(Z)
    return _ladder_rows(Z.values[None], X.values[None], Z.times, eps)


def honest_time_ladders(Z, X, eps):
    """:func:`honest_time_ladder` for every path of an ensemble."""
    if X.grid != Z.grid or X.n_paths != Z.n_paths:
        raise InvalidArgument("Z and X must share grid and path count")
    return _ladder_rows(Z.paths, X.paths, Z.grid.times, eps)


def _band_weights(R, ladder, times):
    """Active band of each (path, time): yields (q, active mask) for candidate levels.

    Only q with tau_q < s and R_s <= (q+1) eps can be active; since the future
    infimum never exceeds R, q is within one of ceil(R/eps) - 1.
    """
    eps = ladder.epsilon
    n_levels = ladder.levels.size
    p0 = np.maximum(np.ceil(R / eps) - 1, 0).astype(int)
    rows = np.arange(R.shape[0])[:, None]
    for shift in (-1, 0, 1):
        q = p0 + shift
        valid = (q >= 0) & (q < n_levels)
        qc = np.clip(q, 0, n_levels - 1)
        tau_q = ladder.tau[rows, qc]
        active = valid & (tau_q < times[None, :]) & ((qc + 1) * eps >= R)
        yield qc, active


def _clip(values, active):
    out = np.where(active, values, 0.0)
    over = active & ~(np.abs(out) <= CLIP)
    out[over] = np.sign(np.nan_to_num(out[over], nan=1.0)) * CLIP
    return out, int(over.sum())


def _start_singular(f, R):
    # first interval starting at R_0 = 0 is evaluated at its right endpoint
    f[R[:, 0] == 0.0, 0] = np.nan
    return f


def honest_band_integrand(Z, ladder):
    """sum_p 1{tau_p < s} 1{(p+1) eps >= Z_s} / (Z_s - p eps), clipped; returns (values, clips)."""
    R = Z.paths
    eps = ladder.epsilon
    total = np.zeros_like(R)
    clips = 0
    with np.errstate(divide="ignore", invalid="ignore"):
        for q, active in _band_weights(R, ladder, Z.grid.times):
            gap = R - q * eps
            val = np.where(gap > 0, 1.0 / gap, np.inf)
            val, c = _clip(val, active)
            total += val
            clips += c
    return total, clips


def honest_band_term(Z, ladder):
    """Cumulative band term S_t; its mean matches E int_0^t ds/Z_s."""
    f, clips = honest_band_integrand(Z, ladder)
    S, _ = left_integral(_start_singular(f, Z.paths), Z.grid.times)
    return PathEnsemble(Z.grid, S, Z.seed, Z.stream_scheme), clips


def compensator_honest_bessel(Z, ladder, eps=None):
    """Drift of B in the filtration making the last passages tau_p stopping times.

    A^n_t = sum_p int_0^t 1{tau_p < s} 1{(p+1) eps >= Z_s} ds / (Z_s - p eps)
            - int_0^t ds / Z_s,
    oriented as the honest-time decomposition of B so that B - A^n is the
    candidate martingale. ``1/(Z - p eps)`` is clipped at ``CLIP``.
    """
    if eps is not None and not np.isclose(eps, ladder.epsilon):
        raise InvalidArgument("ladder was built with a different eps")
    with np.errstate(divide="ignore"):
        inv = 1.0 / Z.paths
    band, clips = honest_band_integrand(Z, ladder)
    f = _start_singular(band - inv, Z.paths)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        A, _ = left_integral(f, Z.grid.times)
        I, _ = _inverse_integral(Z)
    B = PathEnsemble(Z.grid, Z.paths - Z.paths[:, :1] - I, Z.seed, Z.stream_scheme)
    return _decompose(B, A, "honest-bessel", {"eps": ladder.epsilon}, clips)


def bessel3_bracket(t, R):
    """d<B, 1/R>_s / ds = -1/R_s^2 for the Bessel-3 driving motion B."""
    with np.errstate(divide="ignore"):
        return -1.0 / R**2


def compensator_honest_transient(R, scale, ladder, dNM_density=bessel3_bracket, N=None):
    """Honest-time drift of an F-martingale N for a transient diffusion R.

    With M = -s(R) and b_s = d<N,M>_s / ds:
    A^n_t = int_0^t b_s / M_s ds
            + sum_p int_0^t 1{tau_p < s} 1{R_s <= (p+1) eps}
                    s(p eps) / (s(p eps) - s(R_s)) * b_s / s(R_s) ds,
    where the p = 0 ratio is 1 (s(0+) = -inf). The default bracket and
    ``N = None`` give the Bessel-3 case N = B, M = 1/R.
    """
    eps = ladder.epsilon
    times = R.grid.times
    Rv = R.paths
    with np.errstate(divide="ignore", invalid="ignore"):
        sR = np.where(Rv > 0, scale.s(np.where(Rv > 0, Rv, 1.0)), -np.inf)
        bracket = np.broadcast_to(np.asarray(dNM_density(times[None, :], Rv), dtype=float), Rv.shape)
        base = bracket / (-sR)
        total = np.zeros_like(Rv)
        clips = 0
        for q, active in _band_weights(Rv, ladder, times):
            s_level = np.where(q > 0, scale.s(np.maximum(q, 1) * eps), -np.inf)
            denom = s_level - sR
            ratio = np.where(q == 0, 1.0, np.where(denom < 0, s_level / denom, np.inf))
            term, c = _clip(ratio * bracket / sR, active)
            total += term
            clips += c
        f = _start_singular(base + total, Rv)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        A, _ = left_integral(f, times)
    if N is None:
        I, _ = _inverse_integral(R)
        N = PathEnsemble(R.grid, Rv - Rv[:, :1] - I, R.seed, R.stream_scheme)
    return _decompose(N, A, "honest-transient", {"eps": eps}, clips)


def transient_bound_rhs(R, scale, dNM_density=bessel3_bracket):
    """Per-path int_0^T |d<N,M>_s| / M_s, the honest-time total-variation bound."""
    Rv = R.paths
    with np.errstate(divide="ignore", invalid="ignore"):
        sR = np.where(Rv > 0, scale.s(np.where(Rv > 0, Rv, 1.0)), -np.inf)
        bracket = np.broadcast_to(np.asarray(dNM_density(R.grid.times[None, :], Rv), dtype=float), Rv.shape)
        f = _start_singular(np.abs(bracket) / (-sR), Rv)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        out, _ = left_integral(f, R.grid.times)
    return out[:, -1]
