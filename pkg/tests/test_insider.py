import numpy as np
import pytest

from enlargelab import _rng
from enlargelab.errors import InvalidArgument
from enlargelab.expansion import noisy_signal
from enlargelab.insider import (insider_drift_signal, insider_mpr, insider_pnl, market_mpr, novikov_estimate,
                                pnl_samples, price_under_measure, stochastic_exponential)
from enlargelab.models import brownian_model, constant_model, ou_model
from enlargelab.paths import PathEnsemble, make_uniform_grid, simulate_bm, simulate_diffusion_em


def _wv(n_paths=2000, n_steps=64, seed=1):
    g = make_uniform_grid(1.0, n_steps)
    return simulate_bm(g, n_paths, seed), simulate_bm(g, n_paths, seed, stream=_rng.NOISE_V)


def test_stochastic_exponential_closed_forms():
    B, _ = _wv(5)
    assert np.all(stochastic_exponential(0.0, B).U.paths == 1.0)
    c = 0.7
    U = stochastic_exponential(c, B)
    np.testing.assert_allclose(U.terminal, np.exp(c * B.paths[:, -1] - 0.5 * c * c), rtol=1e-12)
    assert np.all(U.U.paths[:, 0] == 1) and np.all(U.U.paths > 0)
    with pytest.raises(InvalidArgument):
        stochastic_exponential(np.full(B.paths.shape, np.nan), B)


def test_stochastic_exponential_mean_one():
    B = simulate_bm(make_uniform_grid(1.0, 16), 100_000, 2)
    U = stochastic_exponential(1.0, B)
    for k in (4, 8, 16):
        v = U.U.paths[:, k]
        assert abs(v.mean() - 1) < 3 * v.std() / np.sqrt(v.size)


def test_market_mpr_examples():
    g = make_uniform_grid(1.0, 4)
    Z = PathEnsemble(g, np.ones((2, 5)))
    assert np.all(market_mpr(brownian_model(), Z) == 0)
    assert np.all(market_mpr(constant_model(0.3, 2.0), Z) == pytest.approx(-0.15))
    assert np.all(market_mpr(ou_model(2.0, 1.0), Z) == 2.0)
    with pytest.raises(ZeroDivisionError, match="path 0"):
        market_mpr(constant_model(0.3, 0.0), Z)


def test_insider_mpr_examples():
    W, V = _wv(10)
    Wt = W.truncate(0.9)
    X = noisy_signal(W, V, 0.5)
    s = Wt.grid.times
    np.testing.assert_allclose(insider_mpr(brownian_model(), Wt, X, 0.5),
                               (X.paths[:, : len(s)] - Wt.paths) / (1.25 * (1 - s)))
    assert np.all(insider_mpr(brownian_model(), Wt, PathEnsemble(W.grid, W.paths), 0.5) == 0)
    X0 = noisy_signal(W, PathEnsemble(W.grid, np.zeros_like(W.paths)), 0.0)
    X1 = noisy_signal(W, PathEnsemble(W.grid, np.zeros_like(W.paths)), 1.0)
    np.testing.assert_allclose(insider_mpr(brownian_model(), Wt, X1, 1.0),
                               insider_mpr(brownian_model(), Wt, X0, 0.0) / 2)
    with pytest.raises(InvalidArgument):
        insider_mpr(brownian_model(), W, X, 0.5)


def test_novikov_examples():
    g = make_uniform_grid(1.0, 100)
    assert novikov_estimate(np.zeros((50, 101)), g).statistic == 1.0
    rep = novikov_estimate(np.ones((50, 101)), g)
    assert rep.statistic == pytest.approx(np.exp(0.5)) and rep.passed
    huge = novikov_estimate(np.full((10, 101), 100.0), g)
    assert not huge.passed and "overflow" in huge.flags[0]


def test_novikov_instability_near_pole():
    g = make_uniform_grid(1.0, 1000)
    W = simulate_bm(g, 20_000, 3)
    V = simulate_bm(g, 20_000, 3, stream=_rng.NOISE_V)
    X = noisy_signal(W, V, 0.1)
    est = {}
    for t_max in (0.5, 0.99):
        Wt = W.truncate(t_max)
        est[t_max] = novikov_estimate(insider_drift_signal(Wt, X, 0.1), Wt.grid)
    assert est[0.5].passed
    assert not est[0.99].passed
    assert est[0.99].statistic > 10 * est[0.5].statistic


def test_price_under_measure():
    g = make_uniform_grid(1.0, 64)
    B = simulate_bm(g, 50_000, 5)
    Z = simulate_diffusion_em(ou_model(1.0, 1.0), g, 1.0, 50_000, 5)
    U = stochastic_exponential(market_mpr(ou_model(1.0, 1.0), Z), B)
    one = price_under_measure(lambda p: np.ones(p.shape[0]), U, Z)
    assert one.lo <= 1.0 <= one.hi + 0.02
    z = price_under_measure(lambda p: p[:, -1], U, Z)
    assert abs(z.statistic - 1.0) < 1.5 * (z.hi - z.lo)
    # the insider's measure prices the same claim differently
    W, V = _wv(50_000, 64, 6)
    Wt = W.truncate(0.9)
    X = noisy_signal(W, V, 0.1)
    U_m = stochastic_exponential(market_mpr(brownian_model(), Wt), Wt)
    U_i = stochastic_exponential(insider_mpr(brownian_model(), Wt, X, 0.1), Wt)
    payoff = lambda p: np.maximum(p[:, -1], 0.0)  # noqa: E731
    pm, pi = price_under_measure(payoff, U_m, Wt), price_under_measure(payoff, U_i, Wt)
    assert pm.hi < pi.lo or pi.hi < pm.lo


def test_insider_pnl_examples():
    W, V = _wv(100_000, 128, 7)
    Wt = W.truncate(0.9)
    zero = insider_pnl(Wt, np.zeros_like(Wt.paths))
    assert zero["insider"].mean == 0.0 and zero["uninformed"].mean == 0.0
    rep = insider_pnl(Wt, insider_drift_signal(Wt, noisy_signal(W, V, 0.1), 0.1))
    assert rep["insider"].mean > 3 * rep["insider"].stderr
    un = rep["uninformed"]
    assert un.mean - un.ci_halfwidth <= 0 <= un.mean + un.ci_halfwidth
    # expected gain of the proportional strategy is E int drift^2 = log(1/(1-t)) / (1+eps^2)
    assert rep["insider"].mean == pytest.approx(np.log(10) / 1.01, rel=0.05)


def test_insider_pnl_costs_and_strategies():
    W, V = _wv(2000, 64, 8)
    Wt = W.truncate(0.9)
    drift = insider_drift_signal(Wt, noisy_signal(W, V, 0.5), 0.5)
    free = pnl_samples(Wt, drift, "sign", 0.0)
    costly = pnl_samples(Wt, drift, "sign", 0.01)
    assert np.all(costly <= free)
    with pytest.raises(InvalidArgument):
        pnl_samples(Wt, drift, "martingale")
    with pytest.raises(InvalidArgument):
        insider_pnl(Wt, drift, cost=-1)
    # uninformed trader with a constant known drift earns it
    g = make_uniform_grid(1.0, 64)
    Z = simulate_diffusion_em(constant_model(0.5, 1.0), g, 0.0, 5000, 9)
    rep = insider_pnl(Z, np.zeros_like(Z.paths), market_drift=0.5)
    assert rep["uninformed"].mean == pytest.approx(0.25, abs=4 * rep["uninformed"].stderr)
