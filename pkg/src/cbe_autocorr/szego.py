"""Verblunsky parameters, the Szego recurrence and Monte Carlo autocorrelations.

A draw from the circular beta ensemble of size ``n`` is encoded by independent
``alpha_k ~ Theta_{beta(k+1)+1}`` (``k = 0..n-2``) and a uniform angle ``eta``.
The characteristic polynomial is recovered from the Szego recurrence

    Phi_{k+1}  = z Phi_k - conj(alpha_k) Phi*_k
    Phi*_{k+1} = Phi*_k - alpha_k z Phi_k,      Phi_0 = Phi*_0 = 1,

as ``Z_n(z) = z^(1-n) Phi_{n-1}(z) - exp(-i eta) z^(-n) Phi*_{n-1}(z)``.

Random numbers
--------------
Every draw consumes ``2n - 1`` uniforms laid out as
``[radial_0..radial_{n-2}, angle_0..angle_{n-2}, eta]``. Monte Carlo sample
``i`` lives in block ``b = i // SAMPLE_BLOCK`` whose generator is seeded by
``(seed, b)``; it is row ``i % SAMPLE_BLOCK`` of that block's uniform matrix.
Each sample is therefore a pure function of ``(seed, i)`` and the estimate
does not depend on how blocks are spread over workers.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DomainError, NumericError, RangeError
from .theta import theta_from_uniforms

__all__ = [
    "SAMPLE_BLOCK",
    "MAX_N",
    "VerblunskyDraw",
    "SzegoState",
    "MCEstimate",
    "block_rng",
    "draw_verblunsky",
    "szego_step",
    "evaluate_char_poly",
    "char_poly_batch",
    "mc_autocorr",
]

SAMPLE_BLOCK = 1024
MAX_N = 100_000
# |z| = e^{-Im x} for |x| <= 1
_ABS_Z_MIN, _ABS_Z_MAX = math.exp(-1.0), math.e


@dataclass(frozen=True)
class VerblunskyDraw:
    beta: float
    n: int
    alphas: np.ndarray  # shape (n-1,), complex, |alpha_k| < 1
    eta: float

    def __post_init__(self):
        if len(self.alphas) != self.n - 1:
            raise DomainError(f"expected {self.n - 1} Verblunsky coefficients, got {len(self.alphas)}")


class SzegoState(NamedTuple):
    phi: complex
    phi_star: complex
    k: int


@dataclass(frozen=True)
class MCEstimate:
    mean: complex
    stderr_re: float
    stderr_im: float
    num_samples: int
    seed: int


def _check_beta_n(beta: float, n: int) -> None:
    if not beta > 0 or not math.isfinite(beta):
        raise DomainError(f"beta must be positive and finite, got {beta!r}")
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    if n > MAX_N:
        raise RangeError(f"n={n} exceeds the supported maximum {MAX_N}")


def _theta_orders(beta: float, n: int) -> np.ndarray:
    return beta * np.arange(1, n) + 1.0


def block_rng(seed: int, block: int) -> np.random.Generator:
    """Generator for sample block ``block`` under master seed ``seed``."""
    return np.random.default_rng([int(seed), int(block)])


def _draws_from_uniforms(beta: float, n: int, u: np.ndarray):
    m = n - 1
    alphas = theta_from_uniforms(_theta_orders(beta, n), u[..., :m], u[..., m : 2 * m])
    eta = 2.0 * np.pi * u[..., 2 * m]
    return alphas, eta


def draw_verblunsky(beta: float, n: int, rng: np.random.Generator) -> VerblunskyDraw:
    """Sample one parameter set for the size-``n`` circular beta ensemble."""
    _check_beta_n(beta, n)
    u = rng.random(2 * n - 1)
    alphas, eta = _draws_from_uniforms(beta, n, u)
    return VerblunskyDraw(beta=float(beta), n=int(n), alphas=np.asarray(alphas), eta=float(eta))


def szego_step(state: SzegoState, alpha: complex, z: complex) -> SzegoState:
    zphi = z * state.phi
    return SzegoState(
        zphi - alpha.conjugate() * state.phi_star,
        state.phi_star - alpha * zphi,
        state.k + 1,
    )


def _check_point(z: complex) -> complex:
    z = complex(z)
    if z == 0:
        raise DomainError("Z_n cannot be evaluated at z = 0")
    if not _ABS_Z_MIN <= abs(z) <= _ABS_Z_MAX:
        raise RangeError(f"|z|={abs(z):.6g} is outside the stable envelope [1/e, e]")
    return z


def evaluate_char_poly(draw: VerblunskyDraw, z: complex) -> complex:
    """Evaluate ``Z_n(z)`` for one parameter set by the Szego recurrence."""
    z = _check_point(z)
    state = SzegoState(1 + 0j, 1 + 0j, 0)
    for alpha in draw.alphas:
        state = szego_step(state, complex(alpha), z)
        if not (cmath.isfinite(state.phi) and cmath.isfinite(state.phi_star)):
            raise NumericError(f"non-finite Szego iterate at step k={state.k}")
    n = draw.n
    value = z ** (1 - n) * state.phi - cmath.exp(-1j * draw.eta) * z ** (-n) * state.phi_star
    if not cmath.isfinite(value):
        raise NumericError(f"non-finite value of Z_n after k={state.k} steps")
    return value


def char_poly_batch(alphas: np.ndarray, eta: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Evaluate ``Z_n`` for a batch of draws at several points.

    ``alphas`` has shape ``(S, n-1)``, ``eta`` shape ``(S,)`` and ``z`` shape
    ``(R,)``; the result has shape ``(S, R)``.
    """
    S, m = alphas.shape
    n = m + 1
    z = np.asarray(z, dtype=complex)[None, :]
    phi = np.ones((S, z.shape[1]), dtype=complex)
    phi_star = np.ones_like(phi)
    for k in range(m):
        a = alphas[:, k : k + 1]
        zphi = z * phi
        phi, phi_star = zphi - np.conj(a) * phi_star, phi_star - a * zphi
    return z ** (1 - n) * phi - np.exp(-1j * eta)[:, None] * z ** (-n) * phi_star


def _block_values(beta, n, points, n_w, seed, block, count, first_index):
    u = block_rng(seed, block).random((SAMPLE_BLOCK, 2 * n - 1))[:count]
    alphas, eta = _draws_from_uniforms(beta, n, u)
    alphas = np.asarray(alphas).reshape(count, n - 1)
    zvals = char_poly_batch(alphas, np.asarray(eta).reshape(count), points)
    if not np.isfinite(zvals).all():
        bad = int(np.nonzero(~np.isfinite(zvals).all(axis=1))[0][0])
        draw = VerblunskyDraw(beta, n, alphas[bad], float(np.atleast_1d(eta)[bad]))
        try:
            for z in points:
                evaluate_char_poly(draw, z)
        except NumericError as exc:
            raise NumericError(f"sample {first_index + bad}: {exc}") from exc
        raise NumericError(f"sample {first_index + bad}: non-finite value of Z_n")
    vals = np.prod(zvals[:, :n_w], axis=1) * np.prod(np.conj(zvals[:, n_w:]), axis=1)
    return vals


def mc_autocorr(
    beta: float,
    n: int,
    w: Sequence[complex],
    y: Sequence[complex],
    num_samples: int,
    seed: int,
    workers: int = 1,
) -> MCEstimate:
    """Monte Carlo estimate of ``E{prod_j Z_n(e^{i w_j/n}) prod_k conj Z_n(e^{i y_k/n})}``.

    Standard errors are reported separately for the real and imaginary parts.
    The result is bit-identical for a given ``(seed, num_samples)`` whatever
    the value of ``workers``.
    """
    _check_beta_n(beta, n)
    w = [complex(v) for v in w]
    y = [complex(v) for v in y]
    if not w and not y:
        raise DomainError("at least one of w, y must be non-empty")
    if int(num_samples) != num_samples or num_samples < 2:
        raise DomainError(f"num_samples must be an integer >= 2, got {num_samples!r}")
    if int(seed) != seed or seed < 0:
        raise DomainError(f"seed must be a nonnegative integer, got {seed!r}")
    points = np.array([cmath.exp(1j * x / n) for x in w + y])
    for z in points:
        _check_point(z)

    nblocks = -(-num_samples // SAMPLE_BLOCK)

    def job(b):
        count = min(SAMPLE_BLOCK, num_samples - b * SAMPLE_BLOCK)
        return _block_values(beta, n, points, len(w), seed, b, count, b * SAMPLE_BLOCK)

    if workers > 1 and nblocks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(nblocks)))
    else:
        parts = [job(b) for b in range(nblocks)]
    vals = np.concatenate(parts)
    mean = complex(vals.mean())
    se_re = float(vals.real.std(ddof=1) / math.sqrt(num_samples))
    se_im = float(vals.imag.std(ddof=1) / math.sqrt(num_samples))
    return MCEstimate(mean, se_re, se_im, int(num_samples), int(seed))
