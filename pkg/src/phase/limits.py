"""
Limit laws of the scaled edge density.

Off the critical point the fluctuation of the edge density around a
maximizer with quadratic constant c is Gaussian with density proportional to
exp(-c x^2); at the critical point it has density proportional to
exp(-a y^4) with a = 81/64. These closed forms (and quadrature versions of
them) are the targets the exact sums and the sampler are compared with.
"""

import math

from scipy.integrate import quad
from scipy.special import gamma

from src.core.exceptions import raise_domain_error
from src.phase.solver import CRITICAL_QUARTIC


def _check_positive(value: float, name: str) -> None:
    if not value > 0:
        raise_domain_error(f"{name} must be positive", parameter=name, value=value)


def gaussian_abs_moment(quadratic: float) -> float:
    """E|X| for density proportional to exp(-c x^2): 1/sqrt(pi c)."""
    _check_positive(quadratic, "quadratic")
    return 1.0 / math.sqrt(math.pi * quadratic)


def quartic_abs_moment(quartic: float = CRITICAL_QUARTIC) -> float:
    """E|Y| for density proportional to exp(-a y^4): sqrt(pi) a^(-1/4) / Gamma(1/4)."""
    _check_positive(quartic, "quartic")
    return math.sqrt(math.pi) * quartic ** -0.25 / gamma(0.25)


def quartic_kurtosis() -> float:
    """E Y^4 / (E Y^2)^2 for the quartic law; independent of a."""
    return gamma(1.25) * gamma(0.25) / gamma(0.75) ** 2


def quartic_variance(quartic: float = CRITICAL_QUARTIC) -> float:
    _check_positive(quartic, "quartic")
    return quartic ** -0.5 * gamma(0.75) / gamma(0.25)


def _quartic_expectation(fn, quartic: float, tilt: float = 0.0) -> float:
    # weight is negligible past this bound
    bound = (8.0 + abs(tilt) ** (1.0 / 3.0)) * quartic ** -0.25
    norm, _ = quad(lambda y: math.exp(-quartic * y**4), -bound, bound, limit=200)
    value, _ = quad(
        lambda y: fn(y) * math.exp(tilt * y - quartic * y**4), -bound, bound, points=[0.0], limit=200
    )
    return value / norm


def quartic_mgf(t: float, quartic: float = CRITICAL_QUARTIC) -> float:
    """E exp(t Y) for the quartic law, by quadrature."""
    _check_positive(quartic, "quartic")
    return _quartic_expectation(lambda y: 1.0, quartic, tilt=t)


def quartic_abs_moment_quadrature(quartic: float = CRITICAL_QUARTIC) -> float:
    _check_positive(quartic, "quartic")
    return _quartic_expectation(abs, quartic)


def quartic_kurtosis_quadrature(quartic: float = CRITICAL_QUARTIC) -> float:
    _check_positive(quartic, "quartic")
    second = _quartic_expectation(lambda y: y * y, quartic)
    fourth = _quartic_expectation(lambda y: y**4, quartic)
    return fourth / second**2


def gaussian_mgf(t: float, variance: float) -> float:
    """E exp(t X) for a centred normal with the given variance."""
    _check_positive(variance, "variance")
    return math.exp(0.5 * variance * t * t)
