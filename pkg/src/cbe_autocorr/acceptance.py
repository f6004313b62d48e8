"""Executable acceptance criteria.

Each ``criterion_*`` function runs one check at its pinned tolerance and
returns a :class:`CriterionResult`. ``run_all`` is used both by the pytest
acceptance module and by ``cbe-autocorr selftest``.
"""

from __future__ import annotations

import cmath
import math
import time
from dataclasses import dataclass
from itertools import product

import numpy as np

from .block import (
    adjacency,
    build_block,
    exact_autocorr,
    perron_row_sum,
    transfer_block_zero,
)
from .limit import (
    limit_autocorr,
    limit_single_point,
    psi_eval,
    psi_integrate_check,
    psi_series,
)
from .oracles import single_point_moment_finite_n, two_point_closed_form
from .szego import draw_verblunsky, evaluate_char_poly, mc_autocorr
from .theta import sample_theta, theta_from_uniforms, theta_moment


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.number:2d} {self.name}: {self.detail} ({self.seconds:.2f}s)"


def _timed(number, name):
    def wrap(fn):
        def run() -> CriterionResult:
            t0 = time.perf_counter()
            passed, detail = fn()
            return CriterionResult(number, name, bool(passed), detail, time.perf_counter() - t0)

        run.__name__ = fn.__name__
        run.number = number
        return run

    return wrap


@_timed(1, "two-point ODE vs Bessel")
def criterion_two_point_bessel():
    t0 = time.perf_counter()
    worst = 0.0
    for beta, x in product([0.5, 1, 2, 3.7, 4], [0.1, 0.5, 1, 2, 5]):
        ref = two_point_closed_form(beta, x, -x)
        err = abs(limit_autocorr(beta, [x], [-x]) - ref) / (1 + abs(ref))
        worst = max(worst, err)
    elapsed = time.perf_counter() - t0
    return worst <= 1e-9 and elapsed < 1.0, f"max scaled err {worst:.2e} (tol 1e-9), {elapsed:.3f}s (< 1s)"


@_timed(2, "beta=2 sinc law")
def criterion_sinc_law():
    worst = 0.0
    for x in [0.5, 1, 3]:
        ref = cmath.exp(-1j * x) * math.sin(x) / x
        worst = max(worst, abs(limit_autocorr(2, [x], [-x]) - ref))
    return worst <= 1e-10, f"max abs err {worst:.2e} (tol 1e-10)"


@_timed(3, "single-point constants")
def criterion_single_point_constants():
    worst = 0.0
    for r, beta in product([1, 2, 3], [0.5, 1, 2, 4]):
        g = 2.0 / beta
        ref = math.exp(
            sum(math.lgamma(g * p) - math.lgamma(g * (r + p)) for p in range(1, r + 1))
        )
        val = limit_autocorr(beta, [0.0] * r, [0.0] * r)
        worst = max(worst, abs(val - ref) / ref)
        worst = max(worst, abs(limit_single_point(beta, r) - ref) / ref)
    return worst <= 1e-12, f"max rel err {worst:.2e} (tol 1e-12)"


@_timed(4, "finite-n exact vs Selberg product")
def criterion_exact_vs_selberg():
    worst = 0.0
    for beta, r, n in product([1, 2, 4], [1, 2], [1, 2, 3, 5, 10, 25, 50, 100]):
        ref = float(single_point_moment_finite_n(beta, n, r))
        val = exact_autocorr(beta, n, [0.0] * r, [0.0] * r)
        worst = max(worst, abs(val - ref) / ref)
    worst_b2 = 0.0
    for n in range(1, 101):
        val = exact_autocorr(2, n, [0.0], [0.0])
        worst_b2 = max(worst_b2, abs(val - (n + 1)) / (n + 1))
    ok = worst <= 1e-10 and worst_b2 <= 1e-13
    return ok, f"max rel err {worst:.2e} (tol 1e-10); beta=2 n+1 rel err {worst_b2:.2e}"


@_timed(5, "convergence to the limit")
def criterion_convergence():
    t0 = time.perf_counter()
    lim = limit_autocorr(2, [1.0], [1.0])
    errs = [abs(exact_autocorr(2, n, [1.0], [1.0]) / n - lim) for n in (250, 500, 1000, 2000)]
    elapsed = time.perf_counter() - t0
    monotone = all(a > b for a, b in zip(errs, errs[1:]))
    rel = errs[-1] / abs(lim)
    ok = monotone and rel <= 0.02 and elapsed < 5.0
    return ok, f"errors {', '.join(f'{e:.2e}' for e in errs)}; rel at n=2000 {rel:.2e} (<= 2%), {elapsed:.2f}s"


@_timed(6, "Monte Carlo vs exact")
def criterion_mc_vs_exact():
    t0 = time.perf_counter()
    parts = []
    ok = True
    for beta in [1, 2, 4]:
        est = mc_autocorr(beta, 30, [1.0], [-1.0], 200_000, 1)
        ex = exact_autocorr(beta, 30, [1.0], [-1.0])
        zr = (est.mean.real - ex.real) / est.stderr_re
        zi = (est.mean.imag - ex.imag) / est.stderr_im
        ok &= abs(zr) <= 4 and abs(zi) <= 4
        parts.append(f"beta={beta}: z=({zr:+.2f},{zi:+.2f})")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 30.0
    return ok, "; ".join(parts) + f", {elapsed:.2f}s"


@_timed(7, "Perron identities")
def criterion_perron():
    worst_a = worst_vec = worst_d = 0.0
    min_psd = math.inf
    exact_delta = True
    for R in range(1, 7):
        for r in range(R + 1):
            block = build_block(R, r)
            ones = np.ones(block.dim)
            delta = adjacency(block).entries
            # integer identity Delta @ ones == r(R-r) ones, exactly
            exact_delta &= bool(
                np.array_equal(delta.astype(np.int64) @ np.ones(block.dim, np.int64), np.full(block.dim, r * (R - r)))
            )
            dev = np.linalg.eigvalsh(delta)
            worst_d = max(worst_d, abs(dev[-1] - r * (R - r)))
            min_psd = min(min_psd, np.linalg.eigvalsh(r * (R - r) * np.eye(block.dim) - delta)[0])
            for beta, k in product([0.5, 1, 2, 4], [0, 3, 10]):
                a0 = transfer_block_zero(block, beta, k).entries
                evals, evecs = np.linalg.eigh(a0)
                rowsum = perron_row_sum(beta, R, r, k)
                top = evals[np.argmax(np.abs(evals))]
                worst_a = max(worst_a, abs(top - rowsum) / rowsum)
                worst_vec = max(worst_vec, np.max(np.abs(a0 @ ones - rowsum * ones)) / rowsum)
    ok = worst_a <= 1e-12 and worst_vec <= 1e-12 and exact_delta and worst_d <= 1e-12 and min_psd >= -1e-12
    return ok, (
        f"A_k(0) top eig rel err {worst_a:.2e}, eigvec residual {worst_vec:.2e}; "
        f"Delta chi exact={exact_delta}, eig err {worst_d:.1e}; min eig of r(R-r)-Delta {min_psd:.1e}"
    )


def random_solver_cases(count: int = 20, seed: int = 20240611):
    rng = np.random.default_rng(seed)
    cases = []
    for _ in range(count):
        beta = float(rng.uniform(0.5, 4.0))
        R = int(rng.integers(1, 5))
        r = int(rng.integers(0, R + 1))
        radius = rng.uniform(0, 3, R)
        x = radius * np.exp(1j * rng.uniform(0, 2 * np.pi, R))
        cases.append((beta, R, r, x))
    return cases


@_timed(8, "series vs RK4 cross-check")
def criterion_solver_cross_check():
    worst = 0.0
    for beta, R, r, x in random_solver_cases():
        block = build_block(R, r)
        a = psi_eval(psi_series(block, beta, x), 1.0)
        b = psi_integrate_check(block, beta, x)
        worst = max(worst, np.linalg.norm(a - b) / np.linalg.norm(a))
    return worst <= 1e-8, f"max rel err {worst:.2e} over 20 cases (tol 1e-8)"


@_timed(9, "scaling symmetry")
def criterion_scaling():
    worst = 0.0
    for beta, R, r, x in random_solver_cases(seed=7):
        block = build_block(R, r)
        psi1 = psi_eval(psi_series(block, beta, x), 1.0)
        sigma = 2.0 * r * (R - r) / beta
        for lam in (0.5, 2.0):
            scaled = psi_eval(psi_series(block, beta, x / lam), lam)
            worst = max(worst, np.linalg.norm(scaled - lam**sigma * psi1) / np.linalg.norm(psi1))
    return worst <= 1e-9, f"max rel err {worst:.2e} (tol 1e-9)"


def tensor_expectation_mc(R: int, nu: float, num_samples: int, seed: int, chunk: int = 100_000):
    """Monte Carlo mean and standard error of ``E{A(0) (x) ... (x) A(0)}``.

    ``A(0) = [[1, -alpha], [-conj(alpha), 1]]`` with ``alpha ~ Theta_nu``;
    full ``2^R x 2^R`` tensor space, states in lexicographic order.
    """
    rng = np.random.default_rng(seed)
    dim = 2**R
    s1 = np.zeros((dim, dim), complex)
    s2re = np.zeros((dim, dim))
    s2im = np.zeros((dim, dim))
    done = 0
    while done < num_samples:
        m = min(chunk, num_samples - done)
        alpha = sample_theta(nu, rng, m)
        one = np.ones(m, complex)
        A = np.stack([np.stack([one, -alpha], -1), np.stack([-np.conj(alpha), one], -1)], -2)
        T = A
        for _ in range(R - 1):
            T = np.einsum("sij,skl->sikjl", T, A).reshape(m, T.shape[1] * 2, T.shape[2] * 2)
        s1 += T.sum(0)
        s2re += (T.real**2).sum(0)
        s2im += (T.imag**2).sum(0)
        done += m
    mean = s1 / num_samples
    var_re = np.maximum(s2re / num_samples - mean.real**2, 0) * num_samples / (num_samples - 1)
    var_im = np.maximum(s2im / num_samples - mean.imag**2, 0) * num_samples / (num_samples - 1)
    return mean, np.sqrt(var_re / num_samples), np.sqrt(var_im / num_samples)


@_timed(10, "tensor-expectation oracle")
def criterion_tensor_oracle():
    worst_z = 0.0
    for R, (beta, k) in product([1, 2, 3], [(2.0, 0), (1.0, 2)]):
        nu = beta * (k + 1) + 1
        mean, se_re, se_im = tensor_expectation_mc(R, nu, 1_000_000, seed=100 * R + k)
        states = [tuple(s) for s in product((1, 2), repeat=R)]
        expected = np.zeros((2**R, 2**R))
        for r in range(R + 1):
            block = build_block(R, r)
            a0 = transfer_block_zero(block, beta, k).entries
            pos = [states.index(s) for s in block.states]
            expected[np.ix_(pos, pos)] = a0
        diff = mean - expected
        z_re = np.abs(diff.real) / np.maximum(se_re, 1e-300)
        z_im = np.abs(diff.imag) / np.maximum(se_im, 1e-300)
        # entries with zero variance must match to roundoff
        z_re[se_re == 0] = np.where(np.abs(diff.real[se_re == 0]) <= 1e-12, 0.0, np.inf)
        z_im[se_im == 0] = np.where(np.abs(diff.imag[se_im == 0]) <= 1e-12, 0.0, np.inf)
        worst_z = max(worst_z, z_re.max(), z_im.max())
    return worst_z <= 5.0, f"max |z| over all entries {worst_z:.2f} (<= 5 SE)"


def _z_score(samples: np.ndarray, expected: float) -> float:
    err = abs(samples.mean() - expected)
    se = samples.std(ddof=1) / math.sqrt(samples.size)
    if se == 0:
        # constant samples (p = q = 0, or imaginary part of |alpha|^2p)
        return 0.0 if err <= 1e-12 else math.inf
    return err / se


@_timed(11, "Theta sampler moments")
def criterion_theta_moments():
    worst_z = 0.0
    for idx, nu in enumerate([1.5, 2, 3, 9]):
        rng = np.random.default_rng(1000 + idx)
        u = rng.random((2, 1_000_000))
        alpha = theta_from_uniforms(nu, u[0], u[1])
        conj = np.conj(alpha)
        for p, q in product(range(4), range(4)):
            vals = alpha**p * conj**q
            exact = theta_moment(nu, p, q)
            for part, ex in ((vals.real, exact.real), (vals.imag, exact.imag)):
                worst_z = max(worst_z, _z_score(part, ex))
    return worst_z <= 5.0, f"max |z| {worst_z:.2f} over p,q <= 3 and 4 orders (<= 5 SE)"


@_timed(12, "conjugation identity")
def criterion_conjugation():
    rng = np.random.default_rng(12)
    n = 50
    worst = 0.0
    for _ in range(100):
        draw = draw_verblunsky(2.0, n, rng)
        x = rng.uniform(0, 1) * cmath.exp(2j * math.pi * rng.uniform())
        lhs = evaluate_char_poly(draw, cmath.exp(1j * x)).conjugate()
        rhs = -cmath.exp(1j * draw.eta + 1j * n * x.conjugate()) * evaluate_char_poly(
            draw, cmath.exp(1j * x.conjugate())
        )
        worst = max(worst, abs(lhs - rhs) / abs(lhs))
    return worst <= 1e-10, f"max rel err {worst:.2e} over 100 draws (tol 1e-10)"


CRITERIA = [
    criterion_two_point_bessel,
    criterion_sinc_law,
    criterion_single_point_constants,
    criterion_exact_vs_selberg,
    criterion_convergence,
    criterion_mc_vs_exact,
    criterion_perron,
    criterion_solver_cross_check,
    criterion_scaling,
    criterion_tensor_oracle,
    criterion_theta_moments,
    criterion_conjugation,
]


def run_all(echo=print) -> list[CriterionResult]:
    results = []
    for crit in CRITERIA:
        res = crit()
        if echo is not None:
            echo(res.line())
        results.append(res)
    return results
