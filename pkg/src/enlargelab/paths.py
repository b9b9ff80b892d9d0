"""Time grids, path containers and exact/Euler simulation of the driving processes."""

import enum
import warnings
from dataclasses import dataclass

import numpy as np

from . import _rng
from .errors import InvalidArgument, SimulationDiverged


@dataclass(frozen=True, eq=False)
class TimeGrid:
    times: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or times.size < 2:
            raise InvalidArgument("a grid needs at least two points")
        if times[0] != 0.0:
            raise InvalidArgument("grid must start at 0")
        if not np.all(np.diff(times) > 0):
            raise InvalidArgument("grid times must be strictly increasing")
        times.setflags(write=False)
        object.__setattr__(self, "times", times)

    @property
    def T(self):
        return float(self.times[-1])

    @property
    def n_steps(self):
        return self.times.size - 1

    @property
    def steps(self):
        return np.diff(self.times)

    def __len__(self):
        return self.times.size

    def __eq__(self, other):
        return isinstance(other, TimeGrid) and np.array_equal(self.times, other.times)

    def mesh(self):
        return float(self.steps.max())

    def is_symmetric(self, tol=1e-12):
        return np.allclose(self.times + self.times[::-1], self.T, rtol=0, atol=tol * max(self.T, 1.0))

    def index_of(self, t, tol=1e-9):
        """Index of the grid point equal to ``t`` (within ``tol``)."""
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > tol * max(self.T, 1.0):
            raise InvalidArgument(f"t={t} is not a grid point")
        return k

    def last_index_at_or_before(self, t):
        return int(np.searchsorted(self.times, t + 1e-12 * max(self.T, 1.0), side="right") - 1)

    def truncate(self, t_max):
        """The sub-grid of points ``<= t_max``."""
        k = self.last_index_at_or_before(t_max)
        if k < 1:
            raise InvalidArgument("truncation leaves fewer than two points")
        return TimeGrid(self.times[: k + 1])


def make_uniform_grid(T, n_steps):
    if not T > 0:
        raise InvalidArgument("T must be positive")
    if int(n_steps) != n_steps or n_steps < 1:
        raise InvalidArgument("n_steps must be a positive integer")
    n_steps = int(n_steps)
    # exact endpoints; interior points by multiplication, not accumulation
    return TimeGrid(T * (np.arange(n_steps + 1) / n_steps))


@dataclass(frozen=True, eq=False)
class SamplePath:
    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (len(self.grid),):
            raise InvalidArgument("need exactly one value per grid point")
        if not np.all(np.isfinite(values)):
            raise InvalidArgument("path values must be finite")
        object.__setattr__(self, "values", values)

    @property
    def times(self):
        return self.grid.times


@dataclass(frozen=True, eq=False)
class PathEnsemble:
    """Paths sharing one grid; row i is path i."""

    grid: TimeGrid
    paths: np.ndarray
    seed: int = 0
    stream_scheme: str = "philox-per-path"

    def __post_init__(self):
        paths = np.asarray(self.paths, dtype=float)
        if paths.ndim == 1:
            paths = paths[None, :]
        if paths.ndim != 2 or paths.shape[1] != len(self.grid):
            raise InvalidArgument("paths must be n_paths x n_times")
        object.__setattr__(self, "paths", paths)

    @property
    def n_paths(self):
        return self.paths.shape[0]

    def __len__(self):
        return self.n_paths

    def path(self, i):
        return SamplePath(self.grid, self.paths[i])

    def at(self, t):
        """Column of values at grid time ``t``."""
        return self.paths[:, self.grid.index_of(t)]

    def truncate(self, t_max):
        grid = self.grid.truncate(t_max)
        return PathEnsemble(grid, self.paths[:, : len(grid)], self.seed, self.stream_scheme)


@dataclass(frozen=True, eq=False)
class Subdivision:
    """Indices of the coarse points inside a finer grid."""

    grid: TimeGrid
    indices: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=int)
        if idx.ndim != 1 or idx.size < 2:
            raise InvalidArgument("a subdivision needs at least two points")
        if not np.all(np.diff(idx) > 0):
            raise InvalidArgument("subdivision indices must be strictly increasing")
        if idx[0] != 0 or idx[-1] != len(self.grid) - 1:
            raise InvalidArgument("subdivision must contain the first and last grid index")
        object.__setattr__(self, "indices", idx)

    @property
    def times(self):
        return self.grid.times[self.indices]

    def mesh(self):
        return float(np.diff(self.times).max())

    def is_refined_by(self, other):
        return other.grid == self.grid and np.all(np.isin(self.indices, other.indices))

    def block_of(self):
        """For each fine index, the position of the coarse point at or before it."""
        return np.searchsorted(self.indices, np.arange(len(self.grid)), side="right") - 1


def uniform_subdivision(grid, spacing):
    """Coarse points at multiples of ``spacing`` that fall on ``grid``, plus the endpoint.

    ``spacing`` is a time step, e.g. ``0.5 / n`` for n blocks of [0, 1/2].
    """
    if not spacing > 0:
        raise InvalidArgument("spacing must be positive")
    n = int(np.floor(grid.T / spacing + 1e-9))
    idx = [grid.index_of(k * spacing) for k in range(n + 1)]
    if idx[-1] != len(grid) - 1:
        idx.append(len(grid) - 1)
    return Subdivision(grid, np.array(idx))


def even_subdivision(grid, n_blocks):
    """``n_blocks`` near-equal blocks whose endpoints are snapped to grid points."""
    if int(n_blocks) != n_blocks or not 1 <= n_blocks <= grid.n_steps:
        raise InvalidArgument("n_blocks must be an integer in [1, n_steps]")
    targets = grid.T * np.arange(int(n_blocks) + 1) / n_blocks
    idx = np.searchsorted(grid.times, targets)
    idx = np.clip(idx, 0, grid.n_steps)
    left = np.clip(idx - 1, 0, grid.n_steps)
    closer = np.abs(grid.times[left] - targets) <= np.abs(grid.times[idx] - targets)
    return Subdivision(grid, np.unique(np.where(closer, left, idx)))


def full_subdivision(grid):
    return Subdivision(grid, np.arange(len(grid)))


def left_integral(integrand, times):
    """Cumulative left-endpoint Riemann sum along the last axis, starting at 0.

    A non-finite left value on the first interval (e.g. 1/Z at Z_0 = 0) is
    replaced by the right-endpoint value; non-finite interior values are
    skipped and counted. Returns ``(cumulative, n_skipped)``.
    """
    f = np.array(integrand, dtype=float, copy=True)
    squeeze = f.ndim == 1
    f = np.atleast_2d(f)
    first = ~np.isfinite(f[:, 0])
    if np.any(first):
        f[first, 0] = f[first, 1]
    bad = ~np.isfinite(f[:, :-1])
    n_skipped = int(bad.sum())
    if n_skipped:
        warnings.warn(f"{n_skipped} singular integrand values skipped in quadrature", RuntimeWarning)
        f[:, :-1][bad] = 0.0
    out = np.zeros_like(f)
    np.cumsum(f[:, :-1] * np.diff(times), axis=1, out=out[:, 1:])
    return (out[0] if squeeze else out), n_skipped


def simulate_bm(grid, n_paths, seed, stream=_rng.BM):
    """Standard Brownian paths from 0; ``stream`` selects an independent noise source."""
    if n_paths < 1:
        raise InvalidArgument("n_paths must be >= 1")
    dB = brownian_increments(grid, n_paths, seed, stream)
    paths = np.zeros((n_paths, len(grid)))
    np.cumsum(dB, axis=1, out=paths[:, 1:])
    return PathEnsemble(grid, paths, seed)


def brownian_increments(grid, n_paths, seed, stream=_rng.BM):
    """The increments behind ``simulate_bm(grid, n_paths, seed)``."""
    return _rng.normals(n_paths, grid.n_steps, seed, stream) * np.sqrt(grid.steps)


def simulate_diffusion_em(model, grid, x0, n_paths, seed):
    """Euler-Maruyama paths of dX = b(t,X)dt + sigma(t,X)dB.

    The driving noise is exactly the increments of ``simulate_bm`` with the
    same grid, path count and seed, so (B, X) come out coupled.
    """
    if n_paths < 1:
        raise InvalidArgument("n_paths must be >= 1")
    dB = brownian_increments(grid, n_paths, seed)
    h = grid.steps
    X = np.empty((n_paths, len(grid)))
    X[:, 0] = x0
    with np.errstate(all="ignore"):
        for k in range(grid.n_steps):
            t, x = grid.times[k], X[:, k]
            drift = np.broadcast_to(model.b(t, x), x.shape)
            vol = np.broadcast_to(model.sigma(t, x), x.shape)
            bad = ~(np.isfinite(drift) & np.isfinite(vol))
            if np.any(bad):
                raise SimulationDiverged(np.flatnonzero(bad)[0], t)
            X[:, k + 1] = x + drift * h[k] + vol * dB[:, k]
    bad = ~np.isfinite(X[:, -1])
    if np.any(bad):
        raise SimulationDiverged(np.flatnonzero(bad)[0], grid.T)
    return PathEnsemble(grid, X, seed)


def simulate_bessel3(grid, n_paths, seed):
    """Bessel(3) from the origin as the norm of a 3-d Brownian motion."""
    if n_paths < 1:
        raise InvalidArgument("n_paths must be >= 1")
    sq = np.sqrt(grid.steps)[:, None]

    def draw(g, row):
        pos = np.cumsum(g.standard_normal((grid.n_steps, 3)) * sq, axis=0)
        row[0] = 0.0
        row[1:] = np.sqrt(np.einsum("ij,ij->i", pos, pos))

    paths = _rng.fill_rows(n_paths, (len(grid),), seed, _rng.BESSEL, draw)
    return PathEnsemble(grid, paths, seed)


def bessel3_driving_bm(Z):
    """B_t = Z_t - Z_0 - int_0^t ds/Z_s, left-endpoint quadrature."""
    with np.errstate(divide="ignore"):
        inv = 1.0 / Z.paths
    integral, _ = left_integral(inv, Z.grid.times)
    return PathEnsemble(Z.grid, Z.paths - Z.paths[:, :1] - integral, Z.seed, Z.stream_scheme)


def reverse_path(path, T=None):
    grid = path.grid
    if T is not None and not np.isclose(T, grid.T):
        raise InvalidArgument("horizon does not match the grid")
    if not grid.is_symmetric():
        raise InvalidArgument("grid is not symmetric under t -> T - t")
    return SamplePath(grid, path.values[::-1].copy())


class TailRule(enum.Enum):
    NONE = "none"
    EXACT_BESSEL3 = "exact-bessel3"


def bridge_minima(values, times, uniforms, floor=None):
    """Minimum of a Brownian bridge on each step, sampled from uniforms.

    Uses the exact law of the minimum of a unit-variance bridge between
    consecutive values; ``floor`` clips (0 for nonnegative processes).
    """
    a = values[..., :-1]
    b = values[..., 1:]
    dt = np.diff(times)
    m = 0.5 * (a + b - np.sqrt((a - b) ** 2 - 2.0 * dt * np.log(uniforms)))
    m = np.minimum(m, np.minimum(a, b))
    if floor is not None:
        m = np.maximum(m, floor)
    return m


def _future_inf_rows(values, tail, minima=None):
    X = np.empty_like(values)
    cur = values[:, -1] if tail is None else np.minimum(values[:, -1], tail)
    X[:, -1] = cur
    for k in range(values.shape[1] - 2, -1, -1):
        cur = np.minimum(cur, values[:, k])
        if minima is not None:
            cur = np.minimum(cur, minima[:, k])
        X[:, k] = cur
    return X


def future_infimum(path, tail=TailRule.NONE, rng=None, bridge=False):
    """Running future minimum X_t = inf_{s >= t} Z_s of a single path.

    With ``TailRule.EXACT_BESSEL3`` the infimum beyond the horizon is drawn
    as Z_T * U. With ``bridge=True`` each grid step also contributes the
    sampled minimum of a Brownian bridge between its endpoints.
    """
    tail = TailRule(tail) if tail is not None else TailRule.NONE
    values = np.asarray(path.values, dtype=float)
    if values.size == 0:
        raise InvalidArgument("empty path")
    if (tail is TailRule.EXACT_BESSEL3 or bridge) and rng is None:
        raise InvalidArgument("an rng is required for random tail or bridge minima")
    tail_value = None
    if tail is TailRule.EXACT_BESSEL3:
        if np.any(values < 0):
            raise InvalidArgument("exact Bessel-3 tail needs nonnegative values")
        u = rng.random()
        tail_value = np.array([values[-1] * u])
    minima = None
    if bridge:
        u = 1.0 - rng.random(values.size - 1)
        minima = bridge_minima(values, path.times, u, floor=0.0 if np.all(values >= 0) else None)[None]
    return SamplePath(path.grid, _future_inf_rows(values[None], tail_value, minima)[0])


def future_infimum_ensemble(Z, tail=TailRule.EXACT_BESSEL3, bridge=True, seed=None):
    """Ensemble version of :func:`future_infimum` with per-path random streams."""
    tail = TailRule(tail) if tail is not None else TailRule.NONE
    seed = Z.seed if seed is None else seed
    nonneg = bool(np.all(Z.paths >= 0))
    tail_value = None
    if tail is TailRule.EXACT_BESSEL3:
        if not nonneg:
            raise InvalidArgument("exact Bessel-3 tail needs nonnegative values")
        tail_value = Z.paths[:, -1] * _rng.uniforms(Z.n_paths, 1, seed, _rng.TAIL)[:, 0]
    minima = None
    if bridge:
        u = _rng.uniforms(Z.n_paths, Z.grid.n_steps, seed, _rng.BRIDGE)
        minima = bridge_minima(Z.paths, Z.grid.times, u, floor=0.0 if nonneg else None)
    X = _future_inf_rows(Z.paths, tail_value, minima)
    return PathEnsemble(Z.grid, X, seed, Z.stream_scheme)


def discretize_path(path, sub):
    """Step function holding the value of the last coarse point; keeps X_T at T."""
    if sub.grid != path.grid:
        raise InvalidArgument("subdivision belongs to a different grid")
    values = np.asarray(path.values)
    out = values[sub.indices[sub.block_of()]]
    out[-1] = values[-1]
    return SamplePath(path.grid, out)
