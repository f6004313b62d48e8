"""Transfer operators on one connected component of the flip graph.

States are strings in ``{1,2}^R`` with exactly ``r`` ones, enumerated in
lexicographic order. The expected R-fold tensor power of the one-step Szego
matrix leaves the span of each such component invariant; on it the operator
factorizes as ``A_k(0) @ diag(exp(V/n))`` where ``A_k(0)`` has entries
``E|alpha_k|^(2p)`` (``p`` = number of up-flips between the two states).

The exact finite-n autocorrelation is read off the product
``A_{n-2} ... A_0`` applied to the all-ones vector.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import DomainError, NumericError
from .theta import abs_moments

__all__ = [
    "MAX_R",
    "BlockIndex",
    "BlockOperator",
    "build_block",
    "adjacency",
    "potential",
    "perron_row_sum",
    "transfer_block_zero",
    "transfer_block",
    "product_apply",
    "exact_autocorr",
]

MAX_R = 12


@dataclass(frozen=True)
class BlockIndex:
    R: int
    r: int
    states: tuple[tuple[int, ...], ...]
    rank: dict = field(compare=False, repr=False)

    @property
    def dim(self) -> int:
        return len(self.states)

    def unrank(self, pos: int) -> tuple[int, ...]:
        return self.states[pos]

    @cached_property
    def ones_mask(self) -> np.ndarray:
        """Boolean array ``(dim, R)``: True where the state has a 1."""
        return np.array(self.states, dtype=np.int8).reshape(self.dim, self.R) == 1

    @cached_property
    def flip_count(self) -> np.ndarray:
        """Number of up-flips ``p`` between each pair of states."""
        m = self.ones_mask.astype(np.int64)
        # coordinates with a 1 in the row state and a 2 in the column state
        return m @ (1 - m).T


@dataclass(frozen=True)
class BlockOperator:
    block: BlockIndex
    entries: np.ndarray

    def __post_init__(self):
        d = self.block.dim
        if self.entries.shape != (d, d):
            raise DomainError(f"operator shape {self.entries.shape} does not match block dimension {d}")


def build_block(R: int, r: int) -> BlockIndex:
    """Enumerate ``G_R^r`` lexicographically (``1 < 2``)."""
    if int(R) != R or int(r) != r or not 0 <= r <= R or not 1 <= R <= MAX_R:
        raise DomainError(f"need 0 <= r <= R and 1 <= R <= {MAX_R}, got R={R!r}, r={r!r}")
    R, r = int(R), int(r)
    states = sorted(
        tuple(1 if q in ones else 2 for q in range(R)) for ones in combinations(range(R), r)
    )
    states = tuple(states)
    return BlockIndex(R, r, states, {s: i for i, s in enumerate(states)})


def adjacency(block: BlockIndex) -> BlockOperator:
    """0/1 matrix joining states that differ by one up-flip and one down-flip."""
    return BlockOperator(block, (block.flip_count == 1).astype(float))


def _check_x(block: BlockIndex, x: Sequence[complex]) -> np.ndarray:
    x = np.asarray(x, dtype=complex).reshape(-1)
    if x.shape[0] != block.R:
        raise DomainError(f"expected {block.R} evaluation points, got {x.shape[0]}")
    return x


def potential_diagonal(block: BlockIndex, x: Sequence[complex]) -> np.ndarray:
    x = _check_x(block, x)
    signs = np.where(block.ones_mask, -1.0, 1.0)  # (-1)^{i_q}
    return 0.5j * (signs @ x)


def potential(block: BlockIndex, x: Sequence[complex]) -> BlockOperator:
    """Diagonal operator with entries ``(i/2) sum_q (-1)^{i_q} x_q``."""
    return BlockOperator(block, np.diag(potential_diagonal(block, x)))


def perron_row_sum(beta: float, R: int, r: int, k: int) -> float:
    """Common row sum (Perron eigenvalue) of ``A_k(0)`` on ``G_R^r``."""
    h = 1.0 + 0.5 * beta * (k + 1)
    return math.exp(
        math.lgamma(R + h) + math.lgamma(h) - math.lgamma(R - r + h) - math.lgamma(r + h)
    )


def _check_beta_k(beta: float, k: int) -> None:
    if not beta > 0 or not math.isfinite(beta):
        raise DomainError(f"beta must be positive and finite, got {beta!r}")
    if int(k) != k or k < 0:
        raise DomainError(f"k must be a nonnegative integer, got {k!r}")


def _zero_entries(block: BlockIndex, beta: float, k: int) -> np.ndarray:
    pmax = min(block.r, block.R - block.r)
    moments = abs_moments(beta * (k + 1) + 1.0, pmax)
    return moments[block.flip_count]


def transfer_block_zero(block: BlockIndex, beta: float, k: int) -> BlockOperator:
    """``A_k(0)``: entries ``E|alpha_k|^(2p)`` with ``alpha_k ~ Theta_{beta(k+1)+1}``."""
    _check_beta_k(beta, k)
    return BlockOperator(block, _zero_entries(block, beta, k))


def transfer_block(
    block: BlockIndex, beta: float, k: int, x: Sequence[complex], n: int
) -> BlockOperator:
    """``A_k(x/n) = A_k(0) @ diag(exp(V/n))``."""
    _check_beta_k(beta, k)
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    phase = np.exp(potential_diagonal(block, x) / n)
    return BlockOperator(block, _zero_entries(block, beta, k) * phase[None, :])


def product_apply(block: BlockIndex, beta: float, x: Sequence[complex], n: int) -> np.ndarray:
    """Return ``A_{n-2}(x/n) ... A_0(x/n) @ ones``."""
    _check_beta_k(beta, 0)
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    phase = np.exp(potential_diagonal(block, x) / n)
    v = np.ones(block.dim, dtype=complex)
    pmax = min(block.r, block.R - block.r)
    flips = block.flip_count
    for k in range(n - 1):
        moments = abs_moments(beta * (k + 1) + 1.0, pmax)
        v = moments[flips] @ (phase * v)
        if not np.isfinite(v).all():
            raise NumericError(f"transfer product overflowed at k={k}")
    return v


def _endpoint_phases(block: BlockIndex, x: np.ndarray, n: int) -> np.ndarray:
    # prod over ones of e^{-i(n+1)x/2n} times prod over twos of e^{-i(n-1)x/2n}
    plus = np.exp(-0.5j * (n + 1) * x / n)
    minus = np.exp(-0.5j * (n - 1) * x / n)
    return np.prod(np.where(block.ones_mask, plus[None, :], minus[None, :]), axis=1)


def exact_autocorr(beta: float, n: int, w: Sequence[complex], y: Sequence[complex]) -> complex:
    """Exact ``E{prod_j Z_n(e^{i w_j/n}) prod_k conj Z_n(e^{i y_k/n})}``.

    Expanding each factor of ``Z_n`` in the two components of the tensor
    recursion and averaging over ``eta`` keeps exactly the states with ``r``
    ones, where ``r = len(y)``.
    """
    w = [complex(v) for v in w]
    y = [complex(v) for v in y]
    R, r = len(w) + len(y), len(y)
    if R == 0:
        return 1 + 0j
    block = build_block(R, r)
    x = np.array(w + [v.conjugate() for v in y], dtype=complex)
    v = product_apply(block, beta, x, n)
    prefactor = cmath.exp(1j * sum(yk.conjugate() for yk in y))
    return complex(prefactor * np.dot(_endpoint_phases(block, x, n), v))
