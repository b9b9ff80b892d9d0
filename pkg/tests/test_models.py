import numpy as np
import pytest
from scipy.integrate import quad

from enlargelab.errors import InvalidArgument, UnsupportedModel
from enlargelab.models import (DiffusionModel, bessel3_scale, brownian_model, brownian_phi, gaussian_density,
                               ou_density, ou_model, resolve_model, reversed_drift)

DENSITIES = [gaussian_density(), ou_density(1.0, 1.0), ou_density(2.0, 0.5)]


def _fd_score(density, t, x, y, h=1e-5):
    return (np.log(density.pi(t, x + h, y)) - np.log(density.pi(t, x - h, y))) / (2 * h)


def test_gaussian_score_examples():
    g = gaussian_density()
    assert g.score_x(2, 1, 3) == 1.0
    assert g.score_x(0.7, 0.3, 0.3) == 0.0
    assert abs(g.score_x(0.5, 0.0, 1.0) - _fd_score(g, 0.5, 0.0, 1.0)) < 1e-6
    with pytest.raises(InvalidArgument):
        g.score_x(0.0, 0, 1)
    with pytest.raises(InvalidArgument):
        g.pi(-1.0, 0, 1)


def test_ou_score_examples():
    d = ou_density(1.0, 1.0)
    t, x = 0.3, 0.5
    assert d.score_x(t, x, x * np.exp(-t)) == pytest.approx(0.0, abs=1e-15)
    assert abs(d.score_x(0.3, 0.5, 0.2) - _fd_score(d, 0.3, 0.5, 0.2)) < 1e-6
    sigma = 1.3
    small = ou_density(1e-8, sigma)
    bm = gaussian_density()
    assert small.score_x(0.4, 0.2, 0.9) == pytest.approx(bm.score_x(sigma**2 * 0.4, 0.2, 0.9), rel=1e-4)
    with pytest.raises(InvalidArgument):
        ou_density(0.0, 1.0)
    with pytest.raises(InvalidArgument):
        d.pi(0.0, 0, 0)


@pytest.mark.parametrize("density", DENSITIES, ids=lambda d: d.name)
@pytest.mark.parametrize("t,x", [(0.1, 0.0), (0.5, 1.0), (2.0, -0.7)])
def test_density_normalised(density, t, x):
    total, _ = quad(lambda y: density.pi(t, x, y), -np.inf, np.inf, epsabs=1e-10)
    assert abs(total - 1.0) < 1e-6


@pytest.mark.parametrize("density", DENSITIES, ids=lambda d: d.name)
def test_score_matches_finite_differences(density):
    rng = np.random.default_rng(4)
    for t, x, y in zip(rng.uniform(0.05, 2, 100), rng.normal(size=100), rng.normal(size=100)):
        exact = density.score_x(t, x, y)
        assert abs(exact - _fd_score(density, t, x, y)) <= 1e-5 * max(1.0, abs(exact))


@pytest.mark.parametrize("density", DENSITIES[:2], ids=lambda d: d.name)
@pytest.mark.parametrize("s,t,x,y", [(0.2, 0.3, 0.0, 0.4), (0.5, 0.5, 1.0, -1.0), (0.1, 1.0, 0.3, 0.3),
                                     (1.0, 0.2, -0.5, 0.1), (0.7, 0.9, 2.0, 0.0)])
def test_chapman_kolmogorov(density, s, t, x, y):
    lhs, _ = quad(lambda z: density.pi(s, x, z) * density.pi(t, z, y), -np.inf, np.inf, epsabs=1e-12)
    assert lhs == pytest.approx(density.pi(s + t, x, y), rel=1e-7)


def test_brownian_phi():
    phi = brownian_phi()
    assert phi.phi(1.0) == pytest.approx(0.7978845608)
    assert phi.phi(0.25) == pytest.approx(2 * np.sqrt(2 / np.pi))
    numeric, _ = quad(phi.phi, 0, 1)
    assert phi.integral_0_1 == pytest.approx(numeric, rel=1e-8)
    assert phi.integral_0_1 == pytest.approx(1.59577, abs=1e-5)
    with pytest.raises(InvalidArgument):
        phi.phi(0.0)


def test_bessel3_scale():
    s = bessel3_scale().s
    assert s(2.0) / s(1.0) == 0.5
    assert s(1.0) == -1.0
    assert s(1.0) < s(2.0)
    xs = np.logspace(-8, 8, 50)
    assert np.all(np.diff(s(xs)) > 0) and np.all(s(xs) < 0)
    assert s(1e-12) < -1e11 and s(1e12) > -1e-11
    assert bessel3_scale().s_inverse(s(3.0)) == pytest.approx(3.0)
    with pytest.raises(InvalidArgument):
        s(0.0)


def test_reversed_drift_examples():
    assert reversed_drift(brownian_model(), 0.3) == 0.0
    geometric = DiffusionModel(lambda t, x: 0 * x, lambda t, x: x, lambda x: 1.0 + 0 * x)
    assert reversed_drift(geometric, 2.0) == 2.0
    assert reversed_drift(ou_model(2.0, 1.0), 1.0) == -2.0
    with pytest.raises(UnsupportedModel):
        reversed_drift(DiffusionModel(lambda t, x: x, lambda t, x: 1.0), 1.0)


def test_registry():
    assert resolve_model("bm").density is not None
    ou = resolve_model("ou(2, 0.5)")
    assert ou.model.b(0, 1.0) == -2.0 and ou.density.name == "ou(2,0.5)"
    assert resolve_model("bessel3").scale is not None
    for bad in ("heston", "ou(1)", "ou(a,b)", "", "bm(1)"):
        with pytest.raises(UnsupportedModel):
            resolve_model(bad)
