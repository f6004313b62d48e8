import cmath
import math
from collections import defaultdict
from itertools import permutations

import numpy as np
import pytest

from cbe_autocorr.block import (
    adjacency,
    build_block,
    exact_autocorr,
    perron_row_sum,
    potential,
    product_apply,
    transfer_block,
    transfer_block_zero,
)
from cbe_autocorr.errors import DomainError
from cbe_autocorr.limit import limit_constant_C
from cbe_autocorr.oracles import single_point_moment_finite_n
from cbe_autocorr.theta import theta_moment


# --- brute-force oracle: expand in the Verblunsky variables -----------------
#
# A polynomial is a dict mapping exponent tuples to coefficients. Variables are
# (alpha_0, conj alpha_0, ..., alpha_{n-2}, conj alpha_{n-2}, eps, conj eps)
# with eps = e^{-i eta}.


def _mul(p, q):
    out = defaultdict(complex)
    for ea, ca in p.items():
        for eb, cb in q.items():
            out[tuple(a + b for a, b in zip(ea, eb))] += ca * cb
    return dict(out)


def _add(p, q, scale=1.0):
    out = defaultdict(complex, p)
    for e, c in q.items():
        out[e] += scale * c
    return dict(out)


def _const(c, nvars):
    return {(0,) * nvars: complex(c)}


def _var(i, nvars):
    e = [0] * nvars
    e[i] = 1
    return {tuple(e): 1 + 0j}


def _char_poly_symbolic(n, z):
    nvars = 2 * (n - 1) + 2
    phi, phi_star = _const(1, nvars), _const(1, nvars)
    for k in range(n - 1):
        a, abar = _var(2 * k, nvars), _var(2 * k + 1, nvars)
        zphi = {e: z * c for e, c in phi.items()}
        phi, phi_star = _add(zphi, _mul(abar, phi_star), -1), _add(phi_star, _mul(a, zphi), -1)
    eps = _var(nvars - 2, nvars)
    first = {e: c * z ** (1 - n) for e, c in phi.items()}
    second = {e: c * z ** (-n) for e, c in _mul(eps, phi_star).items()}
    return _add(first, second, -1)


def _conjugate(p):
    # complex conjugate: swap each (v, conj v) pair of exponents
    out = {}
    for e, c in p.items():
        swapped = []
        for i in range(0, len(e), 2):
            swapped += [e[i + 1], e[i]]
        out[tuple(swapped)] = c.conjugate()
    return out


def brute_force_autocorr(beta, n, w, y):
    total = _const(1, 2 * (n - 1) + 2)
    for wj in w:
        total = _mul(total, _char_poly_symbolic(n, cmath.exp(1j * wj / n)))
    for yk in y:
        total = _mul(total, _conjugate(_char_poly_symbolic(n, cmath.exp(1j * yk / n))))
    value = 0j
    for e, c in total.items():
        if e[-2] != e[-1]:
            continue  # eta average
        term = c
        for k in range(n - 1):
            term *= theta_moment(beta * (k + 1) + 1, e[2 * k], e[2 * k + 1])
        value += term
    return value


class TestBlockIndex:
    def test_two_one(self):
        b = build_block(2, 1)
        assert b.states == ((1, 2), (2, 1))
        assert b.dim == 2

    def test_empty_ones(self):
        assert build_block(3, 0).states == ((2, 2, 2),)

    def test_binomial_dimension(self):
        for R in range(1, 9):
            for r in range(R + 1):
                assert build_block(R, r).dim == math.comb(R, r)

    def test_rank_unrank(self):
        b = build_block(6, 3)
        assert list(b.states) == sorted(b.states)
        for i, s in enumerate(b.states):
            assert b.rank[s] == i and b.unrank(i) == s
            assert s.count(1) == 3

    @pytest.mark.parametrize("R,r", [(0, 0), (13, 2), (3, 4), (3, -1)])
    def test_domain(self, R, r):
        with pytest.raises(DomainError):
            build_block(R, r)


class TestAdjacencyPotential:
    def test_two_point(self):
        assert np.array_equal(adjacency(build_block(2, 1)).entries, [[0, 1], [1, 0]])

    def test_extreme_blocks(self):
        assert np.array_equal(adjacency(build_block(4, 0)).entries, [[0.0]])
        assert np.array_equal(adjacency(build_block(4, 4)).entries, [[0.0]])

    def test_definition(self):
        b = build_block(5, 2)
        D = adjacency(b).entries
        for i, s in enumerate(b.states):
            for j, t in enumerate(b.states):
                differ = sum(a != c for a, c in zip(s, t))
                assert D[i, j] == (1.0 if differ == 2 and sum(s) == sum(t) else 0.0)

    @pytest.mark.parametrize("r", range(6))
    def test_row_sums(self, r):
        D = adjacency(build_block(5, r)).entries
        assert np.array_equal(D, D.T)
        assert np.all(D.sum(axis=1) == r * (5 - r))

    def test_potential_zero(self):
        assert np.array_equal(potential(build_block(3, 1), [0, 0, 0]).entries, np.zeros((3, 3)))

    def test_potential_two_point(self):
        x1, x2 = 0.3 + 0.1j, -1.2
        V = potential(build_block(2, 1), [x1, x2]).entries
        assert V[0, 0] == pytest.approx(0.5j * (x2 - x1))
        assert V[1, 1] == pytest.approx(0.5j * (x1 - x2))
        assert V[0, 1] == 0 and V[1, 0] == 0

    def test_potential_balanced_constant(self):
        V = potential(build_block(4, 2), [0.7] * 4).entries
        assert np.allclose(V, 0, atol=1e-15)

    def test_potential_length(self):
        with pytest.raises(DomainError):
            potential(build_block(3, 1), [0.0, 1.0])


class TestTransfer:
    @pytest.mark.parametrize("beta,k", [(2.0, 0), (0.7, 4), (3.0, 11)])
    def test_two_point_matrix(self, beta, k):
        nu = beta * (k + 1) + 1
        A = transfer_block_zero(build_block(2, 1), beta, k).entries
        assert np.allclose(A, [[1, 2 / (nu + 1)], [2 / (nu + 1), 1]], rtol=1e-15)

    @pytest.mark.parametrize("R,r", [(3, 1), (4, 2), (6, 3), (5, 0)])
    @pytest.mark.parametrize("beta", [0.5, 2.0])
    def test_row_sum_is_gamma_ratio(self, R, r, beta):
        for k in (0, 5):
            A = transfer_block_zero(build_block(R, r), beta, k).entries
            assert np.allclose(A, A.T)
            assert np.all(A > 0) and np.all(np.diag(A) == 1)
            assert np.allclose(A.sum(axis=1), perron_row_sum(beta, R, r, k), rtol=1e-13)

    def test_large_k_asymptotics(self):
        beta, b = 2.0, build_block(4, 2)
        D = adjacency(b).entries
        errs = []
        for k in (100, 200, 400):
            A = transfer_block_zero(b, beta, k).entries
            errs.append(np.max(np.abs(A - np.eye(b.dim) - 2 / (beta * (k + 1)) * D)))
        # O(k^-2): doubling k quarters the remainder
        assert errs[0] / errs[1] == pytest.approx(4, rel=0.05)
        assert errs[1] / errs[2] == pytest.approx(4, rel=0.05)

    def test_x_zero(self):
        b = build_block(3, 1)
        assert np.array_equal(
            transfer_block(b, 1.5, 2, [0, 0, 0], 10).entries, transfer_block_zero(b, 1.5, 2).entries
        )

    def test_scalar_blocks(self):
        x, n = 0.8 - 0.1j, 7
        A1 = transfer_block(build_block(1, 1), 2.0, 3, [x], n).entries
        A2 = transfer_block(build_block(1, 0), 2.0, 3, [x], n).entries
        assert A1[0, 0] == pytest.approx(cmath.exp(-0.5j * x / n))
        assert A2[0, 0] == pytest.approx(cmath.exp(0.5j * x / n))

    def test_right_multiplication(self):
        b = build_block(3, 2)
        x = [0.3, -0.2 + 0.5j, 1.0]
        A = transfer_block(b, 1.2, 1, x, 5).entries
        expected = transfer_block_zero(b, 1.2, 1).entries @ np.diag(np.exp(np.diag(potential(b, x).entries) / 5))
        assert np.allclose(A, expected, rtol=1e-14)
        assert abs(np.linalg.det(A)) > 0


class TestProduct:
    def test_x_zero_is_perron_product(self):
        beta, R, r, n = 1.3, 4, 1, 40
        v = product_apply(build_block(R, r), beta, [0] * R, n)
        expected = np.prod([perron_row_sum(beta, R, r, k) for k in range(n - 1)])
        assert np.allclose(v, expected, rtol=1e-12)

    def test_n_one_returns_ones(self):
        assert np.array_equal(product_apply(build_block(3, 1), 2.0, [1, 2, 3], 1), np.ones(3))

    @pytest.mark.parametrize("beta,R,r", [(1.0, 2, 1), (2.0, 4, 2), (2.0, 3, 1), (1.0, 4, 1)])
    def test_gamma_product_asymptotics(self, beta, R, r):
        sigma = 2 * r * (R - r) / beta
        C = limit_constant_C(beta, R, r)

        def err(n):
            log_prod = sum(math.log(perron_row_sum(beta, R, r, k)) for k in range(n - 1))
            return abs(math.comb(R, r) * math.exp(log_prod - sigma * math.log(n)) - C)

        for n in (1000, 2000):
            assert 1.7 <= err(n) / err(2 * n) <= 2.3

    def test_scaled_product_tends_to_C(self):
        beta, R, r = 2.0, 2, 1
        b = build_block(R, r)
        C = limit_constant_C(beta, R, r)
        errs = []
        for n in (100, 1000):
            v = product_apply(b, beta, [0, 0], n)
            errs.append(np.max(np.abs(n ** (-2 * r * (R - r) / beta) * math.comb(R, r) * v - C)))
        assert errs[1] < errs[0] / 5

    def test_norm_growth(self):
        beta, R, r = 1.5, 3, 1
        sigma = 2 * r * (R - r) / beta
        b = build_block(R, r)
        ratios = [
            np.linalg.norm(product_apply(b, beta, [0.5, -0.3, 1.0], n)) / n**sigma for n in (50, 100, 200, 400)
        ]
        assert max(ratios) / min(ratios) < 1.5


class TestExactAutocorr:
    @pytest.mark.parametrize(
        "beta,n,w,y",
        [
            (2.0, 2, [0.4], [-0.9]),
            (1.3, 3, [0.4 + 0.3j], [1.1]),
            (0.8, 3, [0.2, -0.5], [0.7]),
            (2.5, 4, [1.0], [0.5 - 0.2j]),
            (1.0, 2, [0.3, 0.1], [0.2, -0.4]),
            (3.0, 3, [0.9, 0.1, -0.2], []),
        ],
    )
    def test_brute_force_expansion(self, beta, n, w, y):
        ref = brute_force_autocorr(beta, n, w, y)
        assert exact_autocorr(beta, n, w, y) == pytest.approx(ref, rel=1e-12, abs=1e-13)

    def test_r_zero_is_one(self):
        for w in ([0.3], [1.0, -2.0 + 0.5j], [0.1, 0.2, 0.3]):
            assert exact_autocorr(1.7, 25, w, []) == pytest.approx(1.0, abs=1e-12)

    def test_beta_two_second_moment(self):
        for n in (1, 7, 30, 100):
            assert exact_autocorr(2.0, n, [0.0], [0.0]) == pytest.approx(n + 1, rel=1e-14)

    @pytest.mark.parametrize("beta", [1.0, 2.0, 4.0])
    @pytest.mark.parametrize("r", [1, 2])
    def test_selberg_product(self, beta, r):
        for n in (1, 10, 50, 100):
            ref = float(single_point_moment_finite_n(beta, n, r))
            assert exact_autocorr(beta, n, [0.0] * r, [0.0] * r) == pytest.approx(ref, rel=1e-10)

    def test_permutation_invariance(self):
        w, y = [0.3, -1.1 + 0.2j, 0.8], [0.5, -0.4]
        base = exact_autocorr(1.4, 20, w, y)
        for pw in permutations(w):
            for py in permutations(y):
                assert abs(exact_autocorr(1.4, 20, list(pw), list(py)) - base) <= 1e-12 * abs(base)

    def test_conjugation_symmetry(self):
        w, y = [0.3, 1.2], [-0.7, 0.4]
        a = exact_autocorr(2.3, 15, w, y)
        b = exact_autocorr(2.3, 15, y, w)
        assert abs(a - b.conjugate()) <= 1e-12 * abs(a)
