"""Log-Gamma on the positive reals and the normalized Bessel series.

``bessel_j_normalized`` evaluates the entire function

    jhat_nu(z) = sum_m (-1)^m (z/2)^(2m) / (m! Gamma(nu + m + 1)),

so that ``J_nu(z) = (z/2)**nu * jhat_nu(z)``. Working with ``jhat`` keeps every
caller free of fractional powers and branch cuts.
"""

from __future__ import annotations

import cmath
import math

import mpmath

from .errors import DomainError, RangeError

__all__ = ["log_gamma", "gamma_ratio", "bessel_j_normalized", "BESSEL_MAX_ABS_Z"]

BESSEL_MAX_ABS_Z = 50.0

_EPS = 2.0**-52
# Stop once a term is this small relative to the running sum.
_TERM_RTOL = 1e-17
_MAX_TERMS = 2000


def log_gamma(x: float) -> float:
    """Return ``ln Gamma(x)`` for finite ``x > 0``."""
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"log_gamma requires a finite positive argument, got {x!r}")
    return math.lgamma(x)


def gamma_ratio(a: float, b: float) -> float:
    """Return ``Gamma(a) / Gamma(b)`` for positive ``a`` and ``b``."""
    return math.exp(log_gamma(a) - log_gamma(b))


def _series_double(nu: float, w: complex) -> tuple[complex, float]:
    # w = -(z/2)**2; returns (sum, largest term magnitude)
    term = complex(math.exp(-log_gamma(nu + 1.0)))
    total = term
    biggest = abs(term)
    for m in range(_MAX_TERMS):
        term *= w / ((m + 1) * (nu + m + 1))
        total += term
        a = abs(term)
        if a > biggest:
            biggest = a
        if a < _TERM_RTOL * (abs(total) + 1.0) and m + 1 > abs(w):
            return total, biggest
    raise RangeError(f"Bessel series did not converge for nu={nu}, w={w}")


def _series_mp(nu: float, z: complex, dps: int) -> complex:
    with mpmath.workdps(dps):
        w = -(mpmath.mpc(z) / 2) ** 2
        nu_mp = mpmath.mpf(nu)
        term = 1 / mpmath.gamma(nu_mp + 1)
        total = term
        tiny = mpmath.mpf(10) ** (-dps)
        m = 0
        while True:
            term *= w / ((m + 1) * (nu_mp + m + 1))
            total += term
            m += 1
            if abs(term) < tiny * (abs(total) + 1) and m > abs(w):
                break
        return complex(total)


def bessel_j_normalized(nu: float, z: complex) -> complex:
    """Evaluate ``jhat_nu(z) = (z/2)**(-nu) * J_nu(z)`` by its power series.

    Valid for ``nu >= -1/2`` and ``|z| <= 50``. The series is summed in double
    precision when its largest term is small enough for the cancellation to be
    harmless; otherwise it is re-summed with enough extra decimal digits to
    absorb the cancellation.
    """
    nu = float(nu)
    z = complex(z)
    if not math.isfinite(nu) or nu < -0.5:
        raise DomainError(f"bessel_j_normalized requires nu >= -1/2, got {nu!r}")
    if not cmath.isfinite(z):
        raise DomainError(f"bessel_j_normalized requires finite z, got {z!r}")
    if abs(z) > BESSEL_MAX_ABS_Z:
        raise RangeError(f"|z|={abs(z):.6g} exceeds the series regime |z| <= {BESSEL_MAX_ABS_Z}")
    total, biggest = _series_double(nu, -(z * z) / 4.0)
    # absolute rounding error of the double sum is roughly biggest * eps * terms
    if biggest * _EPS * 64 <= 1e-14 * max(1.0, abs(total)):
        return total
    extra = math.ceil(math.log10(biggest)) if biggest > 1.0 else 0
    return _series_mp(nu, z, 20 + extra)
