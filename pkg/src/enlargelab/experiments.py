"""Named Monte Carlo experiments, their configuration and report files.

Each experiment returns a list of :class:`VerificationReport` rows plus a
details dictionary. :func:`run` validates the configuration before any
simulation, then writes ``summary.csv``, ``report.json`` and
``manifest.json`` into the output directory.
"""

import configparser
import dataclasses
import datetime
import os
import re
from dataclasses import dataclass, field

import numpy as np

from . import _rng, io
from .errors import ConfigError, InvalidArgument, UnsupportedModel, UsageError
from .expansion import (compensator_honest_bessel, compensator_honest_transient, compensator_noisy_future,
                        compensator_noisy_future_discretized, compensator_pitman, compensator_reversed_closed,
                        compensator_reversed_discretized, honest_band_term, honest_time_ladders,
                        noisy_signal, noisy_tv_bound, transient_bound_rhs)
from .insider import (insider_drift_signal, market_mpr, novikov_estimate, pnl_samples,
                      stochastic_exponential)
from .models import SQRT_2_OVER_PI, gaussian_density, resolve_model
from .paths import (TailRule, TimeGrid, even_subdivision, future_infimum_ensemble, left_integral,
                    make_uniform_grid, simulate_bessel3, simulate_bm, simulate_diffusion_em)
from .stats_verify import (VerificationReport, drift_regression, expected_recovery_slope, ks_normality,
                           mean_ci, quadratic_variation_paths, slope_recovery, total_variation_paths)
from .weakconv import weak_convergence_rate

QV_TOL = 0.02
SLOPE_K = 3.0
KS_ALPHA = 0.01
REJECT_P = 1e-3
MIN_PATHS = 100


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    model: str = "bm"
    n_paths: int = 10_000
    mesh_exp: int = 12
    seed: int = 20240601
    eps: tuple = ()
    s: float = 0.25
    t: float = 0.35
    T_query: float = 0.75
    t_max: float = 0.45
    blocks: tuple = (4, 8, 16, 32)
    x0: float = 0.0
    strategy: str = "proportional"
    cost: float = 0.0
    out: str = "results"

    def echo(self):
        return dataclasses.asdict(self)


# per-experiment defaults; anything not listed uses the dataclass default
DEFAULTS = {
    "reversed-brownian": {},
    "reversed-diffusion-ou": {"model": "ou(1,1)"},
    "discretized-convergence": {"model": "ou(1,1)", "mesh_exp": 10},
    "pitman": {"model": "bessel3", "s": 0.25, "t": 0.5},
    "honest-bessel": {"model": "bessel3", "mesh_exp": 10, "eps": (0.4, 0.2, 0.1, 0.05)},
    "transient-honest": {"model": "bessel3", "n_paths": 100, "mesh_exp": 10, "eps": (0.4, 0.2, 0.1, 0.05)},
    "noisy-future": {"n_paths": 100_000, "eps": (0.1, 1.0), "s": 0.5, "t": 0.75, "t_max": 0.9},
    "weakconv": {"n_paths": 100_000, "mesh_exp": 0, "s": 0.555, "t": 1.0},
    "girsanov": {"model": "ou(1,1)", "n_paths": 100_000, "mesh_exp": 8, "x0": 1.0, "s": 0.25, "t": 0.5,
                 "T_query": 1.0},
    "insider-pnl": {"n_paths": 100_000, "mesh_exp": 8, "eps": (0.05, 0.1, 0.5, 2.0), "t_max": 0.9},
}

DESCRIPTIONS = {
    "reversed-brownian": "B enlarged with its time reversal: QV, drift regression, KS, total variation",
    "reversed-diffusion-ou": "B enlarged with a reversed OU diffusion: QV, drift regression, KS",
    "discretized-convergence": "blockwise compensators converge to the closed form (BM and OU)",
    "pitman": "Z - 2X for Bessel 3 and its future infimum: QV, KS, E[Z_1]",
    "honest-bessel": "last-passage enlargement of Bessel 3: mean identity, TV bound, trend to Pitman",
    "transient-honest": "transient-diffusion honest compensator equals the Bessel-3 one",
    "noisy-future": "noisy preview of W_1: slope recovery and decomposition checks",
    "weakconv": "projection error onto discretization filtrations vs the bridge prediction",
    "girsanov": "stochastic exponentials and measure-change pricing on OU",
    "insider-pnl": "P&L of a trader with a noisy preview vs an uninformed trader",
}

EXPERIMENTS = tuple(DEFAULTS)


def default_config(name, **overrides):
    if name not in DEFAULTS:
        raise UsageError(f"unknown experiment {name!r}; known: {', '.join(EXPERIMENTS)}")
    values = {**DEFAULTS[name], **{k: v for k, v in overrides.items() if v is not None}}
    return ExperimentConfig(experiment=name, **values)


# ---------------------------------------------------------------------------
# config parsing and validation

_KEY_ALIASES = {"paths": "n_paths", "mesh-exp": "mesh_exp", "t-max": "t_max", "t_query": "T_query",
                "t-query": "T_query", "epsilon": "eps"}
_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}


def _convert(key, raw):
    try:
        if key in ("eps",):
            return tuple(float(v) for v in raw.split(",") if v.strip())
        if key == "blocks":
            return tuple(int(v) for v in raw.split(",") if v.strip())
        if key in ("n_paths", "mesh_exp", "seed"):
            value = float(raw)
            if value != int(value):
                raise ValueError
            return int(value)
        if key in ("s", "t", "T_query", "t_max", "x0", "cost"):
            return float(raw)
    except ValueError:
        raise ConfigError(f"cannot parse {raw!r}", key) from None
    return raw.strip()


def parse_config_text(text):
    """``key = value`` lines (``#`` comments, lists comma-separated) to a field dict."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string("[config]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0]) from None
    out = {}
    for raw_key, raw in parser["config"].items():
        key = _KEY_ALIASES.get(raw_key.strip().lower(), raw_key.strip())
        if key not in _FIELDS:
            raise ConfigError("unknown key", raw_key)
        out[key] = _convert(key, raw)
    return out


def load_config(path=None, experiment=None, **overrides):
    """Config file values, then explicit overrides, on top of experiment defaults."""
    values = {}
    if path is not None:
        with open(path) as fh:
            values = parse_config_text(fh.read())
    name = experiment or values.pop("experiment", None)
    values.pop("experiment", None)
    if name is None:
        raise UsageError("no experiment given")
    values.update({k: v for k, v in overrides.items() if v is not None})
    return default_config(name, **values)


def _need(cond, message, key):
    if not cond:
        raise ConfigError(message, key)


def validate(cfg):
    """Range and name checks; runs before any simulation."""
    name = cfg.experiment
    if name not in DEFAULTS:
        raise UsageError(f"unknown experiment {name!r}")
    _need(isinstance(cfg.n_paths, int) and cfg.n_paths >= MIN_PATHS,
          f"must be an integer >= {MIN_PATHS}", "n_paths")
    _need(isinstance(cfg.seed, int) and 0 <= cfg.seed < 2**63, "must be an integer in [0, 2^63)", "seed")
    if name != "weakconv":
        _need(isinstance(cfg.mesh_exp, int) and 2 <= cfg.mesh_exp <= 14, "must be an integer in [2, 14]",
              "mesh_exp")
    try:
        reg = resolve_model(cfg.model)
    except UnsupportedModel as exc:
        raise ConfigError(str(exc), "model") from None
    if name in ("reversed-diffusion-ou", "discretized-convergence"):
        _need(reg.density is not None, "model needs a closed-form transition density", "model")
    if name in ("pitman", "honest-bessel", "transient-honest"):
        _need(reg.scale is not None, "model needs a scale function (bessel3)", "model")
    if name in ("reversed-brownian", "reversed-diffusion-ou", "discretized-convergence"):
        _need(0 < cfg.t_max < 0.5, "must lie in (0, 0.5)", "t_max")
    if name in ("noisy-future", "insider-pnl"):
        _need(0 < cfg.t_max < 1, "must lie in (0, 1)", "t_max")
    if name in ("reversed-brownian", "reversed-diffusion-ou"):
        _need(0 <= cfg.s < cfg.t <= cfg.t_max, "need 0 <= s < t <= t_max", "s")
    if name in ("pitman", "girsanov"):
        _need(0 <= cfg.s < cfg.t <= 1, "need 0 <= s < t <= 1", "s")
    if name == "noisy-future":
        _need(0 <= cfg.s < cfg.t <= cfg.t_max, "need 0 <= s < t <= t_max", "s")
        _need(cfg.s < cfg.T_query <= 1, "need s < T_query <= 1", "T_query")
    if name == "weakconv":
        _need(0 < cfg.s < cfg.t <= 1, "need 0 < s < t <= 1", "s")
    if name in ("honest-bessel", "transient-honest", "noisy-future", "insider-pnl"):
        _need(len(cfg.eps) >= 1, "needs at least one value", "eps")
        lower_ok = all(e >= 0 for e in cfg.eps) if name in ("noisy-future", "insider-pnl") else all(
            e > 0 for e in cfg.eps)
        _need(lower_ok and all(np.isfinite(cfg.eps)), "values out of range", "eps")
    if name == "discretized-convergence":
        b = cfg.blocks
        _need(len(b) >= 2 and all(x >= 1 for x in b) and all(np.diff(b) > 0),
              "needs >= 2 increasing positive integers", "blocks")
        _need(b[-1] <= 2**cfg.mesh_exp * cfg.t_max, "more blocks than grid steps", "blocks")
    _need(cfg.strategy in ("proportional", "sign"), "must be 'proportional' or 'sign'", "strategy")
    _need(cfg.cost >= 0 and np.isfinite(cfg.cost), "must be >= 0", "cost")
    _need(np.isfinite(cfg.x0), "must be finite", "x0")
    return reg


# ---------------------------------------------------------------------------
# row helpers


def _interval(test, value, lo, hi, expected=float("nan")):
    return VerificationReport(test, float(value), lo=float(lo), hi=float(hi), expected=float(expected))


def _covers(test, value, lo, hi, expected):
    return VerificationReport(test, float(value), lo=float(lo), hi=float(hi), expected=float(expected),
                              kind="covers")


def _slope_zero(test, reg):
    lo, hi = reg.slope_ci(SLOPE_K)
    return _covers(test, reg.slope, lo, hi, 0.0)


def _slope_rejects(test, reg):
    return VerificationReport(test, reg.slope, p_value=reg.slope_p_value, n=reg.n, tolerance=REJECT_P,
                              kind="p-below")


def _mean_covers(test, values, expected, k=SLOPE_K):
    mean, _, se = mean_ci(values)
    return _covers(test, mean, mean - k * se, mean + k * se, expected)


def _qv_rows(M, times_wanted, prefix="qv"):
    qv = quadratic_variation_paths(M.paths)
    rows = []
    for tq in times_wanted:
        k = M.grid.last_index_at_or_before(tq)
        ratio = qv[:, k].mean() / M.grid.times[k]
        rows.append(_interval(f"{prefix}-over-t@{tq:g}", ratio, 1 - QV_TOL, 1 + QV_TOL, 1.0))
    return rows


def _fv_ratio_row(d, test="qv-fv-over-martingale"):
    return _interval(test, _fv_ratio(d), 0.0, 0.01, 0.0)


def _slug(name):
    return re.sub(r"[^a-z0-9.]+", "-", name.lower()).strip("-")


def _fv_ratio(d):
    qa = np.mean(np.sum(np.diff(d.finite_variation.paths, axis=1) ** 2, axis=1))
    qm = np.mean(np.sum(np.diff(d.martingale_part.paths, axis=1) ** 2, axis=1))
    return float(qa / qm)


def _snap(grid, t):
    return float(grid.times[grid.last_index_at_or_before(t)])


def _ks_row(M, a, b, test="ks-increments"):
    a, b = _snap(M.grid, a), _snap(M.grid, b)
    return ks_normality(M.at(b) - M.at(a), b - a, test=test, alpha=KS_ALPHA)


def _unit_grid(cfg):
    return make_uniform_grid(1.0, 2**cfg.mesh_exp)


# ---------------------------------------------------------------------------
# experiments


def _reversed_rows(cfg, X, B, density, label):
    d = compensator_reversed_closed(X, B, density, cfg.t_max)
    M = d.martingale_part
    grid = B.grid
    s, t = _snap(grid, cfg.s), _snap(grid, cfg.t)
    ks_ = grid.index_of(s)
    feature = density.score_x(1.0 - 2.0 * s, X.paths[:, ks_], X.paths[:, len(grid) - 1 - ks_])
    reg_m = drift_regression(M, feature, (s, t))
    reg_b = drift_regression(B, feature, (s, t))
    rows = _qv_rows(M, (0.2, 0.4))
    rows += [_slope_zero("slope-compensated", reg_m), _slope_rejects("slope-uncompensated", reg_b),
             _ks_row(M, 0.2, 0.4), _fv_ratio_row(d)]
    details = {"formula": d.manifest(), "window": [s, t], "model": label,
               "slope_compensated": dataclasses.asdict(reg_m), "slope_uncompensated": dataclasses.asdict(reg_b)}
    return rows, details, d


def exp_reversed_brownian(cfg, reg):
    B = simulate_bm(_unit_grid(cfg), cfg.n_paths, cfg.seed)
    rows, details, d = _reversed_rows(cfg, B, B, gaussian_density(), "bm")
    tv = total_variation_paths(d.finite_variation.paths)
    target = SQRT_2_OVER_PI * (1 - np.sqrt(1 - 2 * cfg.t_max))
    rows.append(_interval("tv-mean", tv.mean(), 0.97 * target, 1.03 * target, target))
    rows.append(_interval("tv-below-phi-integral", tv.mean(), 0.0, 2 * SQRT_2_OVER_PI, 2 * SQRT_2_OVER_PI))
    details["tv_mean"] = float(tv.mean())
    return rows, details


def exp_reversed_ou(cfg, reg):
    grid = _unit_grid(cfg)
    X = simulate_diffusion_em(reg.model, grid, cfg.x0, cfg.n_paths, cfg.seed)
    B = simulate_bm(grid, cfg.n_paths, cfg.seed)
    rows, details, _ = _reversed_rows(cfg, X, B, reg.density, _slug(reg.name))
    return rows, details


def exp_discretized_convergence(cfg, reg):
    grid = _unit_grid(cfg)
    B = simulate_bm(grid, cfg.n_paths, cfg.seed)
    X = simulate_diffusion_em(reg.model, grid, cfg.x0, cfg.n_paths, cfg.seed)
    rows, details = [], {}
    for label, path, density in (("bm", B, gaussian_density()), (_slug(reg.name), X, reg.density)):
        closed = compensator_reversed_closed(path, B, density, cfg.t_max).finite_variation.paths
        levels, tvs = [], []
        for n in cfg.blocks:
            sub = even_subdivision(grid.truncate(cfg.t_max), n)
            A_n = compensator_reversed_discretized(path, B, sub, density).finite_variation.paths
            levels.append(float(np.abs(A_n - closed).max(axis=1).mean()))
            tvs.append(float(total_variation_paths(A_n).mean()))
        prev = np.inf
        for n, lev in zip(cfg.blocks, levels):
            rows.append(_interval(f"sup-distance-n{n}-{label}", lev, 0.0, prev))
            prev = lev
        rows.append(_interval(f"final-over-first-{label}", levels[-1] / levels[0], 0.0, 0.25))
        if label == "bm":
            for n, tv in zip(cfg.blocks, tvs):
                rows.append(_interval(f"tv-n{n}-bm", tv, 0.0, 2 * SQRT_2_OVER_PI, 2 * SQRT_2_OVER_PI))
        details[label] = {"blocks": list(cfg.blocks), "sup_distance": levels, "tv_mean": tvs}
    return rows, details


def _bessel_pair(cfg):
    Z = simulate_bessel3(_unit_grid(cfg), cfg.n_paths, cfg.seed)
    X = future_infimum_ensemble(Z, TailRule.EXACT_BESSEL3, bridge=True, seed=cfg.seed)
    return Z, X


def exp_pitman(cfg, reg):
    Z, X = _bessel_pair(cfg)
    d = compensator_pitman(Z, X)
    M = d.martingale_part
    s, t = _snap(Z.grid, cfg.s), _snap(Z.grid, cfg.t)
    feature = 2 * X.at(s) - Z.at(s)
    reg_m = drift_regression(M, feature, (s, t))
    target = 2 * SQRT_2_OVER_PI
    rows = _qv_rows(M, (1.0,))
    rows += [_ks_row(M, 0.5, 1.0), _slope_zero("slope-compensated", reg_m),
             _interval("mean-Z1", Z.paths[:, -1].mean(), 0.98 * target, 1.02 * target, target)]
    # 2X is increasing but singular: its discrete QV shrinks only like sqrt(mesh), so the
    # FV/martingale QV ratio is reported rather than tested against the smooth-drift threshold
    return rows, {"formula": d.manifest(), "slope_compensated": dataclasses.asdict(reg_m),
                  "qv_fv_over_martingale": _fv_ratio(d)}


def _inverse_integral(Z):
    with np.errstate(divide="ignore"):
        inv = 1.0 / Z.paths
    return left_integral(inv, Z.grid.times)[0]


def exp_honest_bessel(cfg, reg):
    Z, X = _bessel_pair(cfg)
    I = _inverse_integral(Z)
    mean_I, hw_I, _ = mean_ci(I[:, -1])
    pitman_A = compensator_pitman(Z, X).finite_variation.paths
    rows, details = [], {"mean_inverse_integral": mean_I, "eps": {}}
    trend = []
    for eps in cfg.eps:
        ladder = honest_time_ladders(Z, X, eps)
        S, _ = honest_band_term(Z, ladder)
        mean_S, hw_S, _ = mean_ci(S.paths[:, -1])
        rows.append(_interval(f"band-identity-eps{eps:g}", mean_S, mean_I - hw_I - hw_S, mean_I + hw_I + hw_S,
                              mean_I))
        d = compensator_honest_bessel(Z, ladder)
        tv = total_variation_paths(d.finite_variation.paths).mean()
        rows.append(_interval(f"tv-bound-eps{eps:g}", tv, 0.0, 2 * I[:, -1].mean(), 2 * mean_I))
        dist = float(np.abs(d.finite_variation.paths - pitman_A).max(axis=1).mean())
        trend.append((eps, dist))
        details["eps"][f"{eps:g}"] = {"band_mean": mean_S, "tv_mean": float(tv), "clip_count": d.clip_count,
                                      "sup_distance_to_pitman": dist}
    prev = np.inf
    for eps, dist in sorted(trend, reverse=True):
        rows.append(_interval(f"sup-distance-to-pitman-eps{eps:g}", dist, 0.0, prev))
        prev = dist
    return rows, details


def exp_transient_honest(cfg, reg):
    Z, X = _bessel_pair(cfg)
    rhs = transient_bound_rhs(Z, reg.scale).mean()
    rows, details = [], {}
    for eps in cfg.eps:
        ladder = honest_time_ladders(Z, X, eps)
        a = compensator_honest_bessel(Z, ladder).finite_variation.paths
        tr = compensator_honest_transient(Z, reg.scale, ladder)
        gap = float(np.abs(tr.finite_variation.paths - a).max())
        tv = total_variation_paths(tr.finite_variation.paths).mean()
        rows.append(_interval(f"matches-bessel-eps{eps:g}", gap, 0.0, 1e-8, 0.0))
        rows.append(_interval(f"tv-bound-eps{eps:g}", tv, 0.0, 2 * rhs, 2 * rhs))
        details[f"{eps:g}"] = {"sup_gap": gap, "tv_mean": float(tv), "clip_count": tr.clip_count}
    return rows, details


def _symmetric_grid(points):
    pts = {0.0, 1.0}
    for p in points:
        pts |= {float(p), 1.0 - float(p)}
    return TimeGrid(np.array(sorted(pts)))


def exp_noisy_future(cfg, reg):
    rows, details = [], {"slope_recovery": {}, "decomposition": {}}
    coarse = _symmetric_grid([cfg.s, cfg.T_query])
    W = simulate_bm(coarse, cfg.n_paths, cfg.seed)
    V = simulate_bm(coarse, cfg.n_paths, cfg.seed, stream=_rng.NOISE_V)
    for eps in cfg.eps:
        r = slope_recovery(W, V, eps, cfg.s, cfg.T_query)
        target = expected_recovery_slope(eps, cfg.s, cfg.T_query)
        rows.append(_interval(f"recovered-slope-eps{eps:g}", r.slope, 0.98 * target, 1.02 * target, target))
        lo, hi = r.intercept_ci()
        rows.append(_covers(f"intercept-eps{eps:g}", r.intercept, lo, hi, 0.0))
        details["slope_recovery"][f"{eps:g}"] = dataclasses.asdict(r)
    # decomposition checks on a fine grid with a tenth of the paths
    n_fine = max(MIN_PATHS, cfg.n_paths // 10)
    grid = _unit_grid(cfg)
    W = simulate_bm(grid, n_fine, cfg.seed)
    V = simulate_bm(grid, n_fine, cfg.seed, stream=_rng.NOISE_V)
    s, t = _snap(grid, cfg.s), _snap(grid, cfg.t)
    for eps in cfg.eps:
        X = noisy_signal(W, V, eps)
        d = compensator_noisy_future(W, V, eps, t_max=cfg.t_max)
        feature = X.at(s) - W.at(s)
        reg_m = drift_regression(d.martingale_part, feature, (s, t))
        reg_w = drift_regression(W, feature, (s, t))
        rows += _qv_rows(d.martingale_part, (s,), prefix=f"qv-eps{eps:g}")
        rows += [_slope_zero(f"slope-compensated-eps{eps:g}", reg_m),
                 _slope_rejects(f"slope-uncompensated-eps{eps:g}", reg_w)]
        bound = noisy_tv_bound(eps, cfg.t_max)
        tvs = []
        for n in cfg.blocks:
            sub = even_subdivision(grid.truncate(cfg.t_max), n)
            tv = total_variation_paths(compensator_noisy_future_discretized(W, V, eps, sub).finite_variation.paths)
            mean, _, se = mean_ci(tv)
            tvs.append(mean)
            rows.append(_interval(f"tv-n{n}-eps{eps:g}", mean, 0.0, bound + SLOPE_K * se, bound))
        details["decomposition"][f"{eps:g}"] = {"n_paths": n_fine, "tv_bound": bound, "tv_mean": tvs,
                                                "slope_compensated": dataclasses.asdict(reg_m)}
    return rows, details


WEAKCONV_CHECKS = ((0.1, 0.55), (0.01, 0.555))
WEAKCONV_MESHES = (0.1, 0.05, 0.02, 0.01)


def exp_weakconv(cfg, reg):
    B = simulate_bm(make_uniform_grid(1.0, 200), cfg.n_paths, cfg.seed)
    rows, details = [], {}
    for h, s in WEAKCONV_CHECKS:
        rep = weak_convergence_rate(B, [h], s, 1.0)
        pred = rep.predicted[0]
        rows.append(_interval(f"projection-error-h{h:g}", rep.errors[0], 0.97 * pred, 1.03 * pred, pred))
        details[f"h{h:g}"] = rep.rows()
    chain = weak_convergence_rate(B, WEAKCONV_MESHES, cfg.s, cfg.t)
    prev = np.inf
    for h, e in zip(chain.meshes, chain.errors):
        rows.append(_interval(f"refinement-h{h:g}", e, 0.0, prev))
        prev = e
    details["refinement"] = chain.rows()
    return rows, details


def exp_girsanov(cfg, reg):
    grid = _unit_grid(cfg)
    B = simulate_bm(grid, cfg.n_paths, cfg.seed)
    Z = simulate_diffusion_em(reg.model, grid, cfg.x0, cfg.n_paths, cfg.seed)
    U1 = stochastic_exponential(1.0, B)
    U = stochastic_exponential(market_mpr(reg.model, Z), B)
    s, t = _snap(grid, cfg.s), _snap(grid, cfg.t)
    reg_q = drift_regression(Z, Z.at(s), (s, t), weights=U.terminal)
    reg_p = drift_regression(Z, Z.at(s), (s, t))
    rows = [_mean_covers("E[U_T]-theta1", U1.terminal, 1.0),
            _mean_covers("E[U_T]-market", U.terminal, 1.0),
            _mean_covers("E[U_T Z_T]", U.terminal * Z.paths[:, -1], cfg.x0),
            _slope_zero("slope-reweighted", reg_q)]
    nov = novikov_estimate(market_mpr(reg.model, Z), grid)
    details = {"slope_reweighted": dataclasses.asdict(reg_q), "slope_unweighted": dataclasses.asdict(reg_p),
               "novikov": {"estimate": nov.statistic, "ci": [nov.lo, nov.hi], "flags": list(nov.flags)}}
    return rows, details


def exp_insider_pnl(cfg, reg):
    grid = _unit_grid(cfg)
    W = simulate_bm(grid, cfg.n_paths, cfg.seed)
    V = simulate_bm(grid, cfg.n_paths, cfg.seed, stream=_rng.NOISE_V)
    price = simulate_diffusion_em(reg.model, grid, cfg.x0, cfg.n_paths, cfg.seed).truncate(cfg.t_max)
    Wt = W.truncate(cfg.t_max)
    times = Wt.grid.times[None, :]
    b = np.broadcast_to(reg.model.b(times, price.paths), price.paths.shape)
    sig = np.broadcast_to(reg.model.sigma(times, price.paths), price.paths.shape)
    rows, details, means = [], {}, []
    uninformed = pnl_samples(price, b, cfg.strategy, cfg.cost, sig)
    for eps in cfg.eps:
        X = noisy_signal(W, V, eps)
        drift = b + sig * insider_drift_signal(Wt, X, eps)
        w = pnl_samples(price, drift, cfg.strategy, cfg.cost, sig)
        mean, hw, se = mean_ci(w)
        means.append((eps, mean))
        rows.append(_interval(f"insider-positive-eps{eps:g}", mean, SLOPE_K * se, np.inf, 0.0))
        details[f"{eps:g}"] = {"mean": mean, "ci_halfwidth": hw, "stderr": se}
    if not np.any(b):
        mean, hw, _ = mean_ci(uninformed)
        rows.append(_covers("uninformed-covers-zero", mean, mean - hw, mean + hw, 0.0))
    prev = np.inf
    for eps, mean in sorted(means):
        rows.append(_interval(f"monotone-eps{eps:g}", mean, -np.inf, prev))
        prev = mean
    details["uninformed_mean"] = float(uninformed.mean())
    return rows, details


REGISTRY = {
    "reversed-brownian": exp_reversed_brownian,
    "reversed-diffusion-ou": exp_reversed_ou,
    "discretized-convergence": exp_discretized_convergence,
    "pitman": exp_pitman,
    "honest-bessel": exp_honest_bessel,
    "transient-honest": exp_transient_honest,
    "noisy-future": exp_noisy_future,
    "weakconv": exp_weakconv,
    "girsanov": exp_girsanov,
    "insider-pnl": exp_insider_pnl,
}


@dataclass
class RunResult:
    config: ExperimentConfig
    rows: list
    details: dict
    files: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(r["pass"] for r in self.rows)

    @property
    def exit_status(self):
        return 0 if self.passed else 1


def execute(cfg):
    """Validate and run without writing files."""
    reg = validate(cfg)
    try:
        reports, details = REGISTRY[cfg.experiment](cfg, reg)
    except InvalidArgument as exc:
        raise ConfigError(str(exc)) from exc
    return RunResult(cfg, [r.as_row() for r in reports], details)


def run(cfg, write=True):
    """Run an experiment and write its summary, report and manifest."""
    result = execute(cfg)
    if write:
        out = os.path.join(cfg.out, cfg.experiment)
        os.makedirs(out, exist_ok=True)
        summary = io.summary_csv(cfg.experiment, result.rows)
        report = io.to_json({"experiment": cfg.experiment, "rows": result.rows, "details": result.details})
        files = {"summary.csv": summary, "report.json": report}
        for name, text in files.items():
            with open(os.path.join(out, name), "w") as fh:
                fh.write(text)
        manifest = {"config": cfg.echo(), "hashes": {k: io.sha256(v) for k, v in files.items()},
                    "workers": _rng.n_workers(), "passed": result.passed,
                    "created": datetime.datetime.now(datetime.timezone.utc).isoformat()}
        with open(os.path.join(out, "manifest.json"), "w") as fh:
            fh.write(io.to_json(manifest))
        result.files = {k: os.path.join(out, k) for k in (*files, "manifest.json")}
    return result
