"""Diffusion models, closed-form transition densities and their x-scores."""

import re
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import InvalidArgument, UnsupportedModel

SQRT_2_OVER_PI = np.sqrt(2.0 / np.pi)


@dataclass(frozen=True)
class DiffusionModel:
    """dX = b(t, X) dt + sigma(t, X) dB; coefficients are vectorised in x."""

    b: Callable
    sigma: Callable
    sigma_prime: Optional[Callable] = None
    name: str = "diffusion"


@dataclass(frozen=True)
class TransitionDensity:
    """pi(t, x, y) and the log-derivative (1/pi) d pi/dx, both vectorised."""

    pi: Callable
    score_x: Callable
    name: str = "density"


@dataclass(frozen=True)
class DriftBound:
    phi: Callable
    integral_0_1: float


@dataclass(frozen=True)
class ScaleFunction:
    s: Callable
    s_inverse: Optional[Callable] = None


def _check_elapsed(t):
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise InvalidArgument("elapsed time must be positive")
    return t


def gaussian_density():
    def pi(t, x, y):
        t = _check_elapsed(t)
        return np.exp(-((y - x) ** 2) / (2 * t)) / np.sqrt(2 * np.pi * t)

    def score_x(t, x, y):
        t = _check_elapsed(t)
        return (y - x) / t

    return TransitionDensity(pi, score_x, "bm")


def ou_density(theta, sigma):
    """Transition density of dX = -theta X dt + sigma dB."""
    if not (theta > 0 and sigma > 0):
        raise InvalidArgument("theta and sigma must be positive")

    def moments(t):
        t = _check_elapsed(t)
        decay = np.exp(-theta * t)
        var = -sigma**2 * np.expm1(-2 * theta * t) / (2 * theta)
        return decay, var

    def pi(t, x, y):
        decay, var = moments(t)
        return np.exp(-((y - x * decay) ** 2) / (2 * var)) / np.sqrt(2 * np.pi * var)

    def score_x(t, x, y):
        decay, var = moments(t)
        return decay * (y - x * decay) / var

    return TransitionDensity(pi, score_x, f"ou({theta:g},{sigma:g})")


def brownian_phi():
    def phi(x):
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0):
            raise InvalidArgument("phi is defined for positive arguments")
        return SQRT_2_OVER_PI / np.sqrt(x)

    return DriftBound(phi, 2 * SQRT_2_OVER_PI)


def bessel3_scale():
    """s(x) = -1/x: negative, increasing, -inf at 0+ and 0 at infinity."""

    def s(x):
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0):
            raise InvalidArgument("scale function needs x > 0")
        return -1.0 / x

    def s_inverse(y):
        return -1.0 / np.asarray(y, dtype=float)

    return ScaleFunction(s, s_inverse)


def reversed_drift(model, x):
    """Drift sigma'(x) sigma(x) + b(x) of the time-reversed diffusion."""
    if model.sigma_prime is None:
        raise UnsupportedModel(f"model {model.name!r} has no sigma_prime")
    return model.sigma_prime(x) * model.sigma(0.0, x) + model.b(0.0, x)


def brownian_model():
    return DiffusionModel(lambda t, x: 0.0 * x, lambda t, x: 1.0 + 0.0 * x, lambda x: 0.0 * x, "bm")


def constant_model(mu, sigma):
    return DiffusionModel(lambda t, x: mu + 0.0 * x, lambda t, x: sigma + 0.0 * x,
                          lambda x: 0.0 * x, f"const({mu:g},{sigma:g})")


def ou_model(theta, sigma):
    return DiffusionModel(lambda t, x: -theta * x, lambda t, x: sigma + 0.0 * x,
                          lambda x: 0.0 * x, f"ou({theta:g},{sigma:g})")


def bessel3_model():
    return DiffusionModel(lambda t, x: 1.0 / x, lambda t, x: 1.0 + 0.0 * x,
                          lambda x: 0.0 * x, "bessel3")


@dataclass(frozen=True)
class RegisteredModel:
    name: str
    model: DiffusionModel
    density: Optional[TransitionDensity] = None
    scale: Optional[ScaleFunction] = None


_NAME = re.compile(r"^\s*([a-z0-9]+)\s*(?:\(([^)]*)\))?\s*$")


def resolve_model(spec):
    """Look up ``"bm"``, ``"ou(theta,sigma)"`` or ``"bessel3"``."""
    m = _NAME.match(spec or "")
    if not m:
        raise UnsupportedModel(f"cannot parse model name {spec!r}")
    name, raw_args = m.group(1), m.group(2)
    try:
        args = [float(a) for a in raw_args.split(",")] if raw_args else []
    except ValueError:
        raise UnsupportedModel(f"non-numeric model parameters in {spec!r}") from None
    if name == "bm" and not args:
        return RegisteredModel("bm", brownian_model(), gaussian_density())
    if name == "ou" and len(args) == 2:
        theta, sigma = args
        return RegisteredModel(f"ou({theta:g},{sigma:g})", ou_model(theta, sigma), ou_density(theta, sigma))
    if name == "bessel3" and not args:
        return RegisteredModel("bessel3", bessel3_model(), scale=bessel3_scale())
    raise UnsupportedModel(f"unknown model {spec!r}")


MODEL_NAMES = ("bm", "ou(theta,sigma)", "bessel3")
