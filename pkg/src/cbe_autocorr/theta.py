"""The Theta_nu law on the unit disk.

A variable is Theta_nu distributed (nu > 1) when its density is proportional
to ``(1 - |z|^2)^((nu - 3)/2)``. These are the laws of the Verblunsky
coefficients of the circular beta ensemble.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError
from .special import log_gamma

_BELOW_ONE = np.nextafter(1.0, 0.0)

__all__ = [
    "check_order",
    "theta_from_uniforms",
    "sample_theta",
    "theta_moment",
    "abs_moments",
    "expected_power_product",
]


def check_order(nu: float) -> float:
    nu = float(nu)
    if not nu > 1.0 or math.isnan(nu):
        raise DomainError(f"Theta order must satisfy nu > 1, got {nu!r}")
    return nu


def theta_from_uniforms(nu, u_radial, u_angle):
    """Map uniforms on [0, 1) to Theta_nu variates by inverse CDF.

    ``|alpha|^2 = 1 - U**(2/(nu-1))`` and ``arg(alpha) = 2 pi U'``. Broadcasts
    over array arguments (``nu`` may vary elementwise).
    """
    nu = np.asarray(nu, dtype=float)
    s = 1.0 - np.power(u_radial, 2.0 / (nu - 1.0))
    # for nu near 1, s can round to exactly 1
    radius = np.minimum(np.sqrt(s), _BELOW_ONE)
    return radius * np.exp(2j * np.pi * np.asarray(u_angle))


def sample_theta(nu: float, rng: np.random.Generator, size=None):
    """Draw Theta_nu variates, consuming exactly two uniforms per variate.

    The uniforms are drawn as one block of shape ``(2, *size)``: the first
    slice drives the radius and the second the angle.
    """
    nu = check_order(nu)
    shape = () if size is None else (size if isinstance(size, tuple) else (size,))
    u = rng.random((2,) + shape)
    alpha = theta_from_uniforms(nu, u[0], u[1])
    return complex(alpha) if size is None else alpha


def theta_moment(nu: float, p: int, q: int) -> complex:
    """Exact ``E{alpha^p conj(alpha)^q}`` for alpha ~ Theta_nu."""
    nu = check_order(nu)
    if p < 0 or q < 0:
        raise DomainError("moment orders must be nonnegative")
    if p != q:
        return 0j
    value = 1.0
    for j in range(1, p + 1):
        # 2^p p! / ((nu+1)(nu+3)...(nu+2p-1)) built one factor at a time
        value *= 2.0 * j / (nu + 2 * j - 1)
    return complex(value)


def abs_moments(nu: float, pmax: int) -> np.ndarray:
    """Return ``[E|alpha|^0, E|alpha|^2, ..., E|alpha|^(2 pmax)]``."""
    nu = check_order(nu)
    out = np.ones(pmax + 1)
    for j in range(1, pmax + 1):
        out[j] = out[j - 1] * 2.0 * j / (nu + 2 * j - 1)
    return out


def expected_power_product(nu: float, lam: int, mu: int) -> float:
    """``E{(1 - alpha)^lam (1 - conj(alpha))^mu}`` for integer ``lam, mu >= 0``.

    Evaluated as the Gamma ratio
    ``G(lam + mu + h) G(h) / (G(lam + h) G(mu + h))`` with ``h = (nu + 1)/2``.
    """
    nu = check_order(nu)
    if int(lam) != lam or int(mu) != mu or lam < 0 or mu < 0:
        raise DomainError(f"lam and mu must be nonnegative integers, got {lam!r}, {mu!r}")
    lam, mu = sorted((int(lam), int(mu)))  # bitwise symmetric in (lam, mu)
    h = 0.5 * (nu + 1.0)
    return math.exp(
        log_gamma(lam + mu + h) + log_gamma(h) - log_gamma(lam + h) - log_gamma(mu + h)
    )
