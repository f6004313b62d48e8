"""Closed-form reference values used to check the three computational routes."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import DomainError, RangeError
from .special import bessel_j_normalized, log_gamma

__all__ = ["MomentValue", "two_point_closed_form", "single_point_moment_finite_n"]

_SQRT_PI = math.sqrt(math.pi)


def two_point_closed_form(beta: float, w: complex, y: complex) -> complex:
    """Limiting two-point autocorrelation in terms of a Bessel function.

    With ``u = w - conj(y)`` and ``nu = 2/beta - 1/2`` the limit is
    ``sqrt(pi) e^{-iu/2} u^{-nu} J_nu(u/2)``, evaluated without fractional
    powers as ``sqrt(pi) 4^{-nu} e^{-iu/2} jhat_nu(u/2)``.
    """
    if not beta > 0 or not math.isfinite(beta):
        raise DomainError(f"beta must be positive and finite, got {beta!r}")
    u = complex(w) - complex(y).conjugate()
    if abs(u) > 100.0:
        raise RangeError(f"|w - conj(y)| = {abs(u):.6g} exceeds 100")
    nu = 2.0 / beta - 0.5
    return _SQRT_PI * 4.0 ** (-nu) * cmath.exp(-0.5j * u) * bessel_j_normalized(nu, u / 2)


@dataclass(frozen=True)
class MomentValue:
    """A positive real kept in log space; ``value`` is None on overflow."""

    log_value: float
    value: float | None

    def __float__(self) -> float:
        if self.value is None:
            raise OverflowError(f"moment exp({self.log_value}) overflows a double")
        return self.value


def single_point_moment_finite_n(beta: float, n: int, lam: float) -> MomentValue:
    """``E|Z_n(z)|^{2 lam}`` on the unit circle, via the Selberg Gamma product."""
    if not beta > 0 or not math.isfinite(beta):
        raise DomainError(f"beta must be positive and finite, got {beta!r}")
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    if not lam >= 0 or not math.isfinite(lam):
        raise DomainError(f"lambda must be finite and nonnegative, got {lam!r}")
    total = 0.0
    for ell in range(int(n)):
        a = 0.5 * beta * ell + 1.0
        total += log_gamma(2 * lam + a) + log_gamma(a) - 2.0 * log_gamma(lam + a)
    try:
        value = math.exp(total)
    except OverflowError:
        value = None
    return MomentValue(total, value)
