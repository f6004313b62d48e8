"""Microscopic limit: the singular ODE on a block and the limiting autocorrelation.

On ``G_R^r`` the limit object solves

    Psi'(t) = ((2/(beta t)) Delta + V) Psi(t),   t^(-sigma) Psi(t) -> ones,

with ``sigma = 2 r (R-r) / beta``. Writing ``Psi(t) = t^sigma sum_k Psi_k t^k``
gives ``Psi_0 = ones`` and

    Psi_{k+1} = (k + 1 + (2/beta)(r(R-r) - Delta))^{-1} V Psi_k.

Because ``r(R-r) - Delta`` is positive semi-definite, the resolvent has norm at
most ``1/(k+1)`` and ``|Psi_k| <= |V|^k / k! |ones|``, which gives a certified
truncation rule.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .block import BlockIndex, adjacency, build_block, potential_diagonal
from .errors import DomainError, NumericError, RangeError
from .special import log_gamma

__all__ = [
    "T_MAX",
    "PsiSolution",
    "psi_series",
    "psi_eval",
    "psi_integrate_check",
    "limit_constant_C",
    "limit_autocorr",
    "limit_autocorr_solution",
    "limit_single_point",
]

T_MAX = 2.0
MAX_TERMS = 500
LIMIT_TOL = 1e-12


@dataclass(frozen=True)
class PsiSolution:
    block: BlockIndex
    beta: float
    x: tuple[complex, ...]
    sigma: float
    coeffs: np.ndarray  # (K+1, dim)
    truncation_K: int
    tol: float

    def __call__(self, t: float) -> np.ndarray:
        return psi_eval(self, t)


@lru_cache(maxsize=64)
def _delta_eigh(R: int, r: int):
    block = build_block(R, r)
    evals, evecs = np.linalg.eigh(adjacency(block).entries)
    return evals, evecs


def _sigma(beta: float, R: int, r: int) -> float:
    return 2.0 * r * (R - r) / beta


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not beta > 0 or not math.isfinite(beta):
        raise DomainError(f"beta must be positive and finite, got {beta!r}")
    return beta


def _log_tail_bound(vnorm: float, K: int, t: float) -> float:
    # sum_{k>K} (t|V|)^k / k!  <=  e^{t|V|} (t|V|)^{K+1} / (K+1)!
    a = t * vnorm
    if a == 0.0:
        return -math.inf
    return a + (K + 1) * math.log(a) - math.lgamma(K + 2)


def psi_series(block: BlockIndex, beta: float, x: Sequence[complex], tol: float = 1e-13) -> PsiSolution:
    """Power-series coefficients of ``Psi`` certified on ``0 < t <= T_MAX``.

    Terms are added until the factorial tail bound at ``t = T_MAX`` drops
    below ``tol``; this also certifies the series at ``t = 1``.
    """
    beta = _check_beta(beta)
    if not 1e-16 < tol < 1e-6:
        raise DomainError(f"tol must lie in (1e-16, 1e-6), got {tol!r}")
    vdiag = potential_diagonal(block, x)
    vnorm = float(np.max(np.abs(vdiag)))
    R, r = block.R, block.r
    evals, evecs = _delta_eigh(R, r)
    shift = (2.0 / beta) * (r * (R - r) - evals)  # eigenvalues of the PSD part
    shift = np.maximum(shift, 0.0)

    coeffs = [np.ones(block.dim, dtype=complex)]
    K = 0
    log_tol = math.log(tol)
    while _log_tail_bound(vnorm, K, T_MAX) >= log_tol:
        if K >= MAX_TERMS:
            raise NumericError(f"Psi series needs more than {MAX_TERMS} terms (|V|={vnorm:.3g})")
        rhs = evecs.T @ (vdiag * coeffs[-1])
        coeffs.append(evecs @ (rhs / (K + 1 + shift)))
        K += 1
    return PsiSolution(
        block=block,
        beta=beta,
        x=tuple(complex(v) for v in np.asarray(x, dtype=complex)),
        sigma=_sigma(beta, R, r),
        coeffs=np.array(coeffs),
        truncation_K=K,
        tol=float(tol),
    )


def psi_eval(sol: PsiSolution, t: float) -> np.ndarray:
    """Evaluate ``Psi(t) = t^sigma sum_k Psi_k t^k`` for ``0 < t <= T_MAX``."""
    t = float(t)
    if not 0.0 < t <= T_MAX:
        raise RangeError(f"t={t!r} is outside the certified range (0, {T_MAX}]")
    acc = np.zeros(sol.coeffs.shape[1], dtype=complex)
    for c in sol.coeffs[::-1]:  # Horner
        acc = acc * t + c
    return t**sol.sigma * acc


def _rk4_log_time(M_const, vdiag, psi, s0, s1, steps):
    # dPsi/ds = (M_const + e^s V) Psi with s = ln t
    h = (s1 - s0) / steps
    for j in range(steps):
        s = s0 + j * h
        e0, em, e1 = math.exp(s), math.exp(s + 0.5 * h), math.exp(s + h)
        k1 = M_const @ psi + e0 * vdiag * psi
        p = psi + 0.5 * h * k1
        k2 = M_const @ p + em * vdiag * p
        p = psi + 0.5 * h * k2
        k3 = M_const @ p + em * vdiag * p
        p = psi + h * k3
        k4 = M_const @ p + e1 * vdiag * p
        psi = psi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return psi


def psi_integrate_check(
    block: BlockIndex,
    beta: float,
    x: Sequence[complex],
    t0: float = 0.05,
    t1: float = 1.0,
    rel_step: float = 1e-4,
) -> np.ndarray:
    """Integrate the ODE from ``t0`` to ``t1`` with classical RK4.

    The start value comes from the series at ``t0``. The system is advanced
    in ``s = ln t``, which removes the ``1/t`` coefficient; the step in ``s``
    is at most ``rel_step * (t1 - t0)``, so the step in ``t`` is
    ``rel_step * (t1 - t0) * t`` and is finest at ``t0``.
    """
    beta = _check_beta(beta)
    if not 0.0 < t0 < t1 <= T_MAX:
        raise DomainError(f"need 0 < t0 < t1 <= {T_MAX}, got t0={t0!r}, t1={t1!r}")
    h_max = rel_step * (t1 - t0)
    if h_max <= 1e-12:
        raise NumericError("integration step underflow")
    s0, s1 = math.log(t0), math.log(t1)
    steps = max(1, math.ceil((s1 - s0) / h_max))
    psi0 = psi_eval(psi_series(block, beta, x, tol=1e-15), t0)
    M_const = (2.0 / beta) * adjacency(block).entries.astype(complex)
    vdiag = potential_diagonal(block, x)
    return _rk4_log_time(M_const, vdiag, psi0, s0, s1, steps)


def limit_constant_C(beta: float, R: int, r: int) -> float:
    """``prod_{p=1}^r Gamma(2p/beta) / Gamma(2(R-r+p)/beta)``."""
    beta = _check_beta(beta)
    if int(R) != R or int(r) != r or not 0 <= r <= R:
        raise DomainError(f"need integers 0 <= r <= R, got R={R!r}, r={r!r}")
    g = 2.0 / beta
    log_c = sum(log_gamma(g * p) - log_gamma(g * (R - r + p)) for p in range(1, r + 1))
    return math.exp(log_c)


def limit_autocorr_solution(
    beta: float, w: Sequence[complex], y: Sequence[complex], tol: float = LIMIT_TOL
) -> tuple[complex, PsiSolution]:
    """Like :func:`limit_autocorr` but also return the series solution used."""
    beta = _check_beta(beta)
    w = [complex(v) for v in w]
    y = [complex(v) for v in y]
    R, r = len(w) + len(y), len(y)
    if R == 0:
        raise DomainError("at least one of w, y must be non-empty")
    block = build_block(R, r)
    x = w + [v.conjugate() for v in y]
    sol = psi_series(block, beta, x, tol=tol)
    psi1 = psi_eval(sol, 1.0)
    phase = cmath.exp(0.5j * (sum(v.conjugate() for v in y) - sum(w)))
    value = complex(limit_constant_C(beta, R, r) * phase * psi1.sum() / math.comb(R, r))
    return value, sol


def limit_autocorr(beta: float, w: Sequence[complex], y: Sequence[complex]) -> complex:
    """``lim n^{-2r(R-r)/beta} E{prod Z_n(e^{i w_j/n}) prod conj Z_n(e^{i y_k/n})}``.

    ``r = len(y)`` and ``R = len(w) + len(y)``. The value is
    ``C e^{(i/2)(sum conj y - sum w)} <ones, Psi(1)> / binom(R, r)``.
    """
    return limit_autocorr_solution(beta, w, y)[0]


def limit_single_point(beta: float, r: int) -> float:
    """``lim n^{-2r^2/beta} E|Z_n|^{2r}``, i.e. the constant for ``R = 2r``."""
    if int(r) != r or r < 0:
        raise DomainError(f"r must be a nonnegative integer, got {r!r}")
    return limit_constant_C(beta, 2 * r, r)
