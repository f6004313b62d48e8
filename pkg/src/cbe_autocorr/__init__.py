"""Autocorrelations of the characteristic polynomial of the circular beta ensemble.

Three independent routes are provided: Monte Carlo sampling of Verblunsky
coefficients (:mod:`.szego`), exact finite-n transfer-matrix products
(:mod:`.block`) and the microscopic-limit ODE (:mod:`.limit`), together with
closed-form references (:mod:`.oracles`).
"""

from .block import exact_autocorr
from .errors import CBEError, DomainError, NumericError, RangeError
from .limit import limit_autocorr, limit_single_point
from .oracles import single_point_moment_finite_n, two_point_closed_form
from .szego import mc_autocorr

__all__ = [
    "CBEError",
    "DomainError",
    "NumericError",
    "RangeError",
    "exact_autocorr",
    "limit_autocorr",
    "limit_single_point",
    "mc_autocorr",
    "single_point_moment_finite_n",
    "two_point_closed_form",
]

__version__ = "0.1.0"
