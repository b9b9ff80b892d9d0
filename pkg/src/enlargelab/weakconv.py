"""Exact Gaussian projections onto discretization filtrations.

F^n_t is generated by the Brownian values at the coarse points up to t.
E(B_s | F^n_t) is the bridge interpolation between the two coarse values
around s, or the last coarse value when s lies past every coarse point <= t.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .models import SQRT_2_OVER_PI


@dataclass(frozen=True)
class ProjectionReport:
    meshes: tuple
    errors: tuple
    predicted: tuple
    ci_halfwidths: tuple
    n_paths: int

    def rows(self):
        return [
            {"mesh": h, "empirical_error": e, "predicted_error": p,
             "n_paths": self.n_paths, "ci_halfwidth": c}
            for h, e, p, c in zip(self.meshes, self.errors, self.predicted, self.ci_halfwidths)
        ]


def _bracket(coarse_times, s, t):
    known = coarse_times[coarse_times <= t + 1e-12]
    if known.size == 0:
        raise InvalidArgument("no coarse point at or before t")
    k = int(np.searchsorted(known, s + 1e-12, side="right")) - 1
    return known, k


def project_bm_onto_discretization(B, sub, s, t):
    """E(B_s | F^n_t) on a single Brownian path."""
    if s > t:
        raise InvalidArgument("need s <= t")
    if sub.grid != B.grid:
        raise InvalidArgument("subdivision belongs to a different grid")
    coarse_times = sub.times
    known, k = _bracket(coarse_times, s, t)
    values = B.values[sub.indices[: known.size]]
    if k < 0:
        raise InvalidArgument("s lies before the first coarse point")
    lo = known[k]
    if np.isclose(lo, s) or k == known.size - 1:
        return float(values[k])
    hi = known[k + 1]
    w = (s - lo) / (hi - lo)
    return float((1 - w) * values[k] + w * values[k + 1])


def predicted_projection_error(lo, s, hi):
    """E|E(B_s | B_lo, B_hi) - B_s| = sqrt(2/pi) sqrt((hi-s)(s-lo)/(hi-lo))."""
    return float(SQRT_2_OVER_PI * np.sqrt((hi - s) * (s - lo) / (hi - lo)))


def weak_convergence_rate(B, meshes, s, t):
    """Empirical mean projection error for uniform coarse grids of each mesh.

    The coarse points are the multiples of each mesh that lie on B's grid;
    ``s`` must fall strictly inside a coarse step (and on the fine grid).
    """
    if s > t:
        raise InvalidArgument("need s <= t")
    grid = B.grid
    Bs = B.paths[:, grid.index_of(s)]
    errors, predicted, halfwidths = [], [], []
    for h in meshes:
        lo = np.floor(s / h + 1e-9) * h
        hi = lo + h
        if np.isclose(lo, s) or hi > t + 1e-12:
            raise InvalidArgument(f"s={s} is not strictly inside a coarse step of mesh {h} below t")
        b_lo = B.paths[:, grid.index_of(lo)]
        b_hi = B.paths[:, grid.index_of(hi)]
        w = (s - lo) / h
        err = np.abs((1 - w) * b_lo + w * b_hi - Bs)
        errors.append(float(err.mean()))
        halfwidths.append(float(1.96 * err.std(ddof=1) / np.sqrt(err.size)))
        predicted.append(predicted_projection_error(lo, s, hi))
    return ProjectionReport(tuple(float(h) for h in meshes), tuple(errors), tuple(predicted),
                            tuple(halfwidths), B.n_paths)
