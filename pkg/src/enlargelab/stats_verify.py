"""Martingale diagnostics: variations, drift regressions and normality tests."""

from dataclasses import dataclass

import numpy as np
from scipy.stats import kstwobign, norm

from .errors import InvalidArgument
from .paths import SamplePath

KS_MIN_SAMPLE = 100


@dataclass(frozen=True)
class VerificationReport:
    """One test outcome; ``passed`` depends only on statistic, bounds and kind."""

    test: str
    statistic: float
    lo: float = float("nan")
    hi: float = float("nan")
    p_value: float = float("nan")
    n: int = 0
    tolerance: float = float("nan")
    expected: float = float("nan")
    kind: str = "interval"
    flags: tuple = ()

    @property
    def passed(self):
        if self.kind == "interval":
            return bool(self.lo <= self.statistic <= self.hi)
        if self.kind == "covers":
            return bool(self.lo <= self.expected <= self.hi)
        if self.kind == "p-above":
            return bool(self.p_value > self.tolerance)
        if self.kind == "p-below":
            return bool(self.p_value < self.tolerance)
        if self.kind == "no-flags":
            return not self.flags
        raise ValueError(f"unknown test kind {self.kind!r}")

    def as_row(self):
        """Summary row; p-value tests report the p-value against its rejection bound."""
        if self.kind == "p-above":
            return {"test": self.test, "statistic": self.p_value, "lo": self.tolerance, "hi": 1.0,
                    "expected": self.expected, "pass": self.passed}
        if self.kind == "p-below":
            return {"test": self.test, "statistic": self.p_value, "lo": 0.0, "hi": self.tolerance,
                    "expected": self.expected, "pass": self.passed}
        return {"test": self.test, "statistic": self.statistic, "lo": self.lo, "hi": self.hi,
                "expected": self.expected, "pass": self.passed}


@dataclass(frozen=True)
class RegressionResult:
    slope: float
    intercept: float
    slope_se: float
    intercept_se: float
    r2: float
    n: int

    def slope_ci(self, k=3.0):
        return self.slope - k * self.slope_se, self.slope + k * self.slope_se

    def intercept_ci(self, k=1.96):
        return self.intercept - k * self.intercept_se, self.intercept + k * self.intercept_se

    @property
    def slope_p_value(self):
        """Two-sided normal p-value of slope = 0."""
        if self.slope_se == 0:
            return 0.0 if self.slope != 0 else 1.0
        return float(2 * norm.sf(abs(self.slope) / self.slope_se))


def quadratic_variation(path):
    """Running sum of squared increments."""
    values = np.asarray(path.values, dtype=float)
    qv = np.zeros_like(values)
    np.cumsum(np.diff(values) ** 2, out=qv[1:])
    return SamplePath(path.grid, qv)


def quadratic_variation_paths(paths):
    """Per-path running QV of an (n_paths, n_times) array."""
    qv = np.zeros_like(paths)
    np.cumsum(np.diff(paths, axis=1) ** 2, axis=1, out=qv[:, 1:])
    return qv


def total_variation(A):
    return float(np.sum(np.abs(np.diff(np.asarray(A.values, dtype=float)))))


def total_variation_paths(paths):
    return np.sum(np.abs(np.diff(paths, axis=1)), axis=1)


def ols(y, x, weights=None, robust=False):
    """Least squares of y on (1, x); sandwich standard errors when ``robust``."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    n = y.size
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    sw = w.sum()
    xbar = np.dot(w, x) / sw
    ybar = np.dot(w, y) / sw
    xc = x - xbar
    sxx = np.dot(w, xc * xc)
    if not sxx > 1e-300 * max(1.0, sw):
        raise InvalidArgument("feature has zero variance")
    slope = np.dot(w, xc * (y - ybar)) / sxx
    intercept = ybar - slope * xbar
    resid = y - intercept - slope * x
    if robust or weights is not None:
        # HC0 sandwich, also valid for random weights
        slope_var = np.sum((w * xc * resid) ** 2) / sxx**2
        inf_int = w * (resid / sw - xbar * xc * resid / sxx)
        intercept_var = np.sum(inf_int**2)
    else:
        sigma2 = np.dot(resid, resid) / (n - 2)
        slope_var = sigma2 / sxx
        intercept_var = sigma2 * (1.0 / n + xbar**2 / sxx)
    sst = np.dot(w, (y - ybar) ** 2)
    r2 = 1.0 - np.dot(w, resid**2) / sst if sst > 0 else 0.0
    return RegressionResult(float(slope), float(intercept), float(np.sqrt(slope_var)),
                            float(np.sqrt(intercept_var)), float(r2), int(n))


def drift_regression(M, feature, window, weights=None):
    """OLS of M_t - M_s on a G_s-measurable feature across paths.

    ``feature`` is one value per path, or a (n_paths, n_times) array read at s.
    Under the martingale hypothesis the slope is 0.
    """
    s, t = window
    if not s < t:
        raise InvalidArgument("window needs s < t")
    feature = np.asarray(feature, dtype=float)
    if feature.ndim == 2:
        feature = feature[:, M.grid.index_of(s)]
    y = M.at(t) - M.at(s)
    return ols(y, feature, weights=weights)


def ks_statistic(sample, cdf):
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    F = cdf(x)
    upper = np.arange(1, n + 1) / n - F
    lower = F - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))


def ks_normality(increments, expected_variance, test="ks-normality", alpha=0.01):
    """Kolmogorov-Smirnov test against N(0, expected_variance), asymptotic p-value."""
    x = np.asarray(increments, dtype=float).ravel()
    if x.size < KS_MIN_SAMPLE:
        raise InvalidArgument(f"KS test needs at least {KS_MIN_SAMPLE} values")
    if not expected_variance > 0:
        raise InvalidArgument("expected_variance must be positive")
    sd = np.sqrt(expected_variance)
    D = ks_statistic(x, lambda v: norm.cdf(v / sd))
    p = float(kstwobign.sf(np.sqrt(x.size) * D))
    return VerificationReport(test, D, p_value=p, n=x.size, tolerance=alpha, kind="p-above")


def mean_ci(values, k=1.96):
    """(mean, halfwidth, stderr) of a sample."""
    v = np.asarray(values, dtype=float)
    se = float(v.std(ddof=1) / np.sqrt(v.size)) if v.size > 1 else float("inf")
    return float(v.mean()), k * se, se


def expected_recovery_slope(eps, t, T_query):
    return (T_query - t) / ((1 + eps**2) * (1 - t))


def slope_recovery(W, V, eps, t, T_query):
    """Regress W_T - W_t on X_t - W_t for the noisy signal X_t = W_1 + eps V_{1-t}."""
    from .expansion import noisy_signal

    if not t < T_query <= 1:
        raise InvalidArgument("need t < T_query <= 1")
    X = noisy_signal(W, V, eps)
    return ols(W.at(T_query) - W.at(t), X.at(t) - W.at(t))
