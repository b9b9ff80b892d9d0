import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from enlargelab import _rng
from enlargelab.errors import InvalidArgument
from enlargelab.expansion import compensator_reversed_closed
from enlargelab.models import gaussian_density
from enlargelab.paths import PathEnsemble, SamplePath, make_uniform_grid, simulate_bm
from enlargelab.stats_verify import (VerificationReport, drift_regression, expected_recovery_slope, ks_normality,
                                     ols, quadratic_variation, quadratic_variation_paths, slope_recovery,
                                     total_variation)


def test_quadratic_variation_examples():
    g = make_uniform_grid(1.0, 5)
    qv = quadratic_variation(SamplePath(g, 0.3 * np.arange(6)))
    assert qv.values[-1] == pytest.approx(5 * 0.09)
    assert np.all(quadratic_variation(SamplePath(g, [2.0] * 6)).values == 0)


def test_bm_quadratic_variation():
    B = simulate_bm(make_uniform_grid(1.0, 2**12), 10_000, 4)
    mean_qv = quadratic_variation_paths(B.paths)[:, -1].mean()
    assert 0.99 <= mean_qv <= 1.01


def test_total_variation_examples():
    g = make_uniform_grid(1.0, 10)
    assert total_variation(SamplePath(g, g.times)) == pytest.approx(1.0)
    assert total_variation(SamplePath(make_uniform_grid(1.0, 2), [0, 1, 0])) == 2
    assert total_variation(SamplePath(g, np.sqrt(g.times))) == pytest.approx(1.0)


def test_ols_against_scipy_linregress():
    rng = np.random.default_rng(0)
    x = rng.normal(size=500)
    y = 0.7 * x + 0.2 + rng.normal(size=500)
    ours = ols(y, x)
    ref = stats.linregress(x, y)
    assert ours.slope == pytest.approx(ref.slope)
    assert ours.intercept == pytest.approx(ref.intercept)
    assert ours.slope_se == pytest.approx(ref.stderr)
    assert ours.intercept_se == pytest.approx(ref.intercept_stderr)
    assert ours.r2 == pytest.approx(ref.rvalue**2)
    with pytest.raises(InvalidArgument):
        ols(y, np.ones(500))


def test_weighted_ols_reduces_to_plain_with_unit_weights():
    rng = np.random.default_rng(1)
    x = rng.normal(size=300)
    y = x + rng.normal(size=300)
    a, b = ols(y, x, robust=True), ols(y, x, weights=np.ones(300))
    assert a.slope == pytest.approx(b.slope) and a.slope_se == pytest.approx(b.slope_se)


def test_drift_regression_independent_feature_and_missing_drift():
    B = simulate_bm(make_uniform_grid(1.0, 1024), 10_000, 6)
    fresh = simulate_bm(make_uniform_grid(1.0, 1024), 10_000, 6, stream=_rng.NOISE_V).paths[:, -1]
    lo, hi = drift_regression(B, fresh, (0.25, 0.5)).slope_ci()
    assert lo <= 0 <= hi
    s, t = 0.25, 0.349609375
    feature = B.at(0.75) - B.at(0.25)
    raw = drift_regression(B, feature, (s, t))
    assert raw.slope > 0 and raw.slope_p_value < 1e-3
    assert raw.slope == pytest.approx((t - s) / 0.5, abs=0.02)
    M = compensator_reversed_closed(B, B, gaussian_density()).martingale_part
    comp = drift_regression(M, feature, (s, t))
    assert abs(comp.slope) < 3 * comp.slope_se
    assert abs(comp.slope) < abs(raw.slope)
    with pytest.raises(InvalidArgument):
        drift_regression(B, feature, (0.5, 0.25))


def test_ks_statistic_against_scipy():
    x = np.random.default_rng(5).normal(scale=2.0, size=1000)
    rep = ks_normality(x, 4.0)
    ref = stats.kstest(x, "norm", args=(0, 2.0), method="asymp")
    assert rep.statistic == pytest.approx(ref.statistic, abs=1e-12)
    assert rep.p_value == pytest.approx(ref.pvalue, rel=1e-6)


def test_ks_calibration_and_power():
    passes = sum(ks_normality(np.random.default_rng(k).normal(size=10_000), 1.0).passed for k in range(100))
    assert passes >= 95
    u = np.random.default_rng(0).uniform(-np.sqrt(3), np.sqrt(3), 10_000)
    assert ks_normality(u, 1.0).p_value < 1e-6


def test_ks_degenerate_and_small():
    assert ks_normality(np.zeros(200), 1.0).statistic == pytest.approx(0.5)
    with pytest.raises(InvalidArgument):
        ks_normality(np.zeros(99), 1.0)


def test_slope_recovery():
    assert expected_recovery_slope(0.1, 0.5, 0.75) == pytest.approx(0.49505, abs=1e-5)
    g = make_uniform_grid(1.0, 4)
    W = simulate_bm(g, 20_000, 2)
    V = simulate_bm(g, 20_000, 2, stream=_rng.NOISE_V)
    r = slope_recovery(W, V, 0.0, 0.0, 1.0)
    assert r.slope == pytest.approx(1.0, abs=1e-12)
    r = slope_recovery(W, V, 0.1, 0.5, 0.75)
    assert abs(r.slope - expected_recovery_slope(0.1, 0.5, 0.75)) < 4 * r.slope_se


def test_report_pass_is_pure_function_of_fields():
    assert VerificationReport("a", 1.0, lo=0.5, hi=1.5).passed
    assert not VerificationReport("a", 2.0, lo=0.5, hi=1.5).passed
    assert VerificationReport("a", 0.3, lo=-1, hi=1, expected=0.0, kind="covers").passed
    assert VerificationReport("a", 0.1, p_value=0.5, tolerance=0.01, kind="p-above").passed
    assert VerificationReport("a", 0.1, p_value=1e-4, tolerance=1e-3, kind="p-below").passed
    assert not VerificationReport("a", 0.0, kind="no-flags", flags=("x",)).passed
    row = VerificationReport("k", 0.1, p_value=0.2, tolerance=0.01, kind="p-above").as_row()
    assert row["statistic"] == 0.2 and row["pass"]


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=2, max_size=40))
def test_variation_properties(values):
    p = SamplePath(make_uniform_grid(1.0, len(values) - 1), values)
    qv = quadratic_variation(p).values
    assert np.all(np.diff(qv) >= 0)
    tv = total_variation(p)
    assert tv >= abs(values[-1] - values[0]) - 1e-9
    # sum of squares is at most (max increment) * (sum of absolute increments)
    assert qv[-1] <= np.max(np.abs(np.diff(values))) * tv + 1e-9


def test_regression_deterministic_reduction():
    B = simulate_bm(make_uniform_grid(1.0, 16), 1000, 1)
    a = drift_regression(B, B.paths, (0.25, 0.5))
    b = drift_regression(PathEnsemble(B.grid, B.paths.copy()), B.paths.copy(), (0.25, 0.5))
    assert a == b
