import cmath
import math

import mpmath
import numpy as np
import pytest

from cbe_autocorr.block import adjacency, build_block, exact_autocorr, potential_diagonal
from cbe_autocorr.errors import DomainError, RangeError
from cbe_autocorr.limit import (
    T_MAX,
    limit_autocorr,
    limit_autocorr_solution,
    limit_constant_C,
    limit_single_point,
    psi_eval,
    psi_integrate_check,
    psi_series,
)
from cbe_autocorr.oracles import two_point_closed_form


def bessel_pair(beta, w, y, t):
    """Two-point solution written with mpmath Bessel functions."""
    u = complex(w) - complex(y).conjugate()
    nu = 2 / beta - 0.5
    z = u * t / 2
    j0 = complex(mpmath.besselj(nu, z))
    j1 = complex(mpmath.besselj(nu + 1, z))
    c = math.sqrt(t) * math.gamma(nu + 1) * complex(mpmath.power(4 / u, nu))
    return c * np.array([j0 - 1j * j1, j0 + 1j * j1])


def residual(sol, t, h):
    """Central-difference residual of t Psi' = (2/beta) Delta Psi + t V Psi."""
    D = adjacency(sol.block).entries
    V = potential_diagonal(sol.block, sol.x)
    dpsi = (sol(t + h) - sol(t - h)) / (2 * h)
    p = sol(t)
    return np.max(np.abs(t * dpsi - (2 / sol.beta) * D @ p - t * V * p)) / max(1.0, np.max(np.abs(p)))


class TestPsiSeries:
    def test_zero_potential_truncates_immediately(self):
        sol = psi_series(build_block(4, 2), 2.0, [0, 0, 0, 0])
        assert sol.truncation_K == 0
        assert np.allclose(sol(0.7), 0.7**sol.sigma)

    @pytest.mark.parametrize("x", [[0.4, -1.0], [0.3 + 0.2j, 1.5, -0.7j]])
    def test_r_zero_is_exponential(self, x):
        sol = psi_series(build_block(len(x), 0), 1.7, x)
        for t in (0.2, 1.0, 2.0):
            assert sol(t)[0] == pytest.approx(cmath.exp(0.5j * sum(x) * t), rel=1e-13)

    @pytest.mark.parametrize("beta", [0.6, 1.3, 2.0, 4.0])
    def test_two_point_bessel_vector(self, beta):
        w, y = 0.7 + 0.2j, -0.4 + 0.1j
        sol = psi_series(build_block(2, 1), beta, [w, y.conjugate()])
        for t in (0.1, 0.5, 1.0, 2.0):
            ref = bessel_pair(beta, w, y, t)
            assert np.max(np.abs(sol(t) - ref)) <= 1e-12 * max(1, np.max(np.abs(ref)))

    def test_small_t_behaviour(self):
        sol = psi_series(build_block(3, 1), 1.0, [0.5, -0.2, 1.0])
        for t in (1e-3, 1e-5):
            assert np.allclose(sol(t) / t**sol.sigma, 1.0, atol=5 * t)

    @pytest.mark.parametrize("beta", [0.7, 2.0])
    @pytest.mark.parametrize("R,r", [(3, 1), (4, 2), (5, 2)])
    def test_ode_residual(self, beta, R, r):
        rng = np.random.default_rng(R * 10 + r)
        x = rng.uniform(-2, 2, R) + 1j * rng.uniform(-0.5, 0.5, R)
        sol = psi_series(build_block(R, r), beta, x)
        for t in (0.3, 1.0, 1.8):
            res = [residual(sol, t, h) for h in (1e-3, 1e-4)]
            # the central difference is O(h^2), so the residual drops ~100x
            assert res[1] < 2e-5
            assert res[1] < res[0] / 50 or res[1] < 1e-9

    @pytest.mark.parametrize("R,r,x", [(2, 1, [1.0, 1.0]), (3, 1, [0.5, -1.2, 0.3 + 0.2j]), (4, 2, [1, -1, 0.5, 2])])
    def test_residual_at_one(self, R, r, x):
        sol = psi_series(build_block(R, r), 2.0, x)
        D = adjacency(sol.block).entries
        V = potential_diagonal(sol.block, sol.x)
        h = 1e-4
        dpsi = (sol(1 + h) - sol(1 - h)) / (2 * h)
        p = sol(1.0)
        assert np.max(np.abs(dpsi - (2 / 2.0) * D @ p - V * p)) <= 1e-6

    def test_scaling_identity(self):
        # Psi_{c x}(t) = c^{-sigma} Psi_x(c t)
        b, beta, x, c = build_block(3, 1), 1.5, np.array([0.4, -0.9, 0.2]), 2.0
        base = psi_series(b, beta, x)
        scaled = psi_series(b, beta, c * x)
        assert np.allclose(scaled(0.5), c ** (-base.sigma) * base(1.0), rtol=1e-12)

    def test_range(self):
        sol = psi_series(build_block(2, 1), 2.0, [1.0, 0.5])
        for t in (0.0, -1.0, T_MAX * 1.01):
            with pytest.raises(RangeError):
                psi_eval(sol, t)

    def test_tolerance_domain(self):
        with pytest.raises(DomainError):
            psi_series(build_block(2, 1), 2.0, [1.0, 0.5], tol=1e-3)


class TestIntegrateCheck:
    def test_r_zero(self):
        x = [0.6, -0.1 + 0.3j]
        psi = psi_integrate_check(build_block(2, 0), 1.2, x, t0=0.1, t1=1.0)
        assert psi[0] == pytest.approx(cmath.exp(0.5j * sum(x)), rel=1e-10)

    def test_zero_potential(self):
        sol_psi = psi_integrate_check(build_block(3, 1), 2.0, [0, 0, 0], t0=0.05, t1=1.0)
        assert np.allclose(sol_psi, 1.0, rtol=1e-10)

    def test_matches_series(self):
        b, beta, x = build_block(4, 2), 0.9, [1.0, -0.5, 0.3 + 0.4j, -1.2]
        psi = psi_integrate_check(b, beta, x)
        assert np.allclose(psi, psi_series(b, beta, x)(1.0), rtol=1e-10)

    def test_bad_interval(self):
        with pytest.raises(DomainError):
            psi_integrate_check(build_block(2, 1), 2.0, [0.1, 0.2], t0=1.0, t1=0.5)


class TestConstants:
    def test_values(self):
        assert limit_constant_C(2.0, 2, 1) == pytest.approx(1.0)
        assert limit_constant_C(1.0, 2, 1) == pytest.approx(math.gamma(2) / math.gamma(4))
        assert limit_constant_C(3.0, 5, 0) == 1.0

    def test_beta_two_barnes_values(self):
        # for beta = 2 the single-point constant is G(r+1)^2 / G(2r+1)
        assert limit_single_point(2.0, 1) == pytest.approx(1.0)
        assert limit_single_point(2.0, 2) == pytest.approx(1 / 12)
        assert limit_single_point(2.0, 3) == pytest.approx(1 / 8640)

    def test_domain(self):
        with pytest.raises(DomainError):
            limit_constant_C(2.0, 2, 3)
        with pytest.raises(DomainError):
            limit_constant_C(0.0, 2, 1)


class TestLimitAutocorr:
    def test_at_origin_equals_single_point_constant(self):
        for beta in (1.0, 2.0, 4.0):
            assert limit_autocorr(beta, [0, 0], [0, 0]) == pytest.approx(limit_single_point(beta, 2), rel=1e-12)

    def test_r_zero_is_one(self):
        assert limit_autocorr(2.0, [0.3, -1.0 + 0.2j], []) == pytest.approx(1.0, abs=1e-14)

    @pytest.mark.parametrize("beta", [0.5, 1.0, 2.0, 4.0])
    def test_two_point_oracle(self, beta):
        for w, y in [(1.0, -1.0), (0.3 + 0.2j, 2.0), (-3.0, 0.5 - 0.4j)]:
            ref = two_point_closed_form(beta, w, y)
            assert abs(limit_autocorr(beta, [w], [y]) - ref) <= 1e-12 * max(1, abs(ref))

    def test_sine_kernel(self):
        for x in (0.5, 2.0, 7.0):
            ref = cmath.exp(-1j * x) * math.sin(x) / x
            assert limit_autocorr(2.0, [x], [-x]) == pytest.approx(ref, abs=1e-13)

    def test_conjugation_symmetry(self):
        w, y = [0.3, 1.1], [-0.8, 0.2]
        assert limit_autocorr(1.4, w, y) == pytest.approx(limit_autocorr(1.4, y, w).conjugate(), rel=1e-12)

    def test_smooth_in_beta(self):
        w, y = [0.5, -0.3], [0.9]
        betas = np.linspace(0.5, 4.0, 36)
        vals = np.array([limit_autocorr(b, w, y) for b in betas])
        second = np.abs(vals[2:] - 2 * vals[1:-1] + vals[:-2])
        assert np.max(second) < 0.05 * np.max(np.abs(vals))

    def test_finite_n_convergence(self):
        beta, w, y = 2.0, [0.6, -0.2], [1.0]
        R, r = 3, 1
        lim = limit_autocorr(beta, w, y)
        errs = []
        for n in (50, 200, 800):
            scaled = exact_autocorr(beta, n, w, y) * n ** (-2 * r * (R - r) / beta)
            errs.append(abs(scaled - lim))
        assert errs[0] > errs[1] > errs[2]
        assert errs[2] < 0.01 * abs(lim)

    def test_solution_is_returned(self):
        value, sol = limit_autocorr_solution(2.0, [1.0], [-1.0])
        assert sol.block.R == 2 and sol.truncation_K > 0
        assert value == pytest.approx(limit_autocorr(2.0, [1.0], [-1.0]))

    def test_empty(self):
        with pytest.raises(DomainError):
            limit_autocorr(2.0, [], [])
