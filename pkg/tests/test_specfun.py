"""Special-function kernels against closed forms and an mpmath oracle.

Frozen golden values were produced with mpmath at 30 digits; closed-form
identities (half-integer Bessel, beta reductions) are written out inline.
"""

import math

import numpy as np
import pytest

from rosenlab.errors import AccuracyError, DomainError, ParameterError
from rosenlab.specfun import (
    EvalOptions,
    bessel_j,
    bessel_k,
    digamma_fn,
    gamma_fn,
    hermite_poly,
    hyp1f2,
    incomplete_beta,
    y_d_kernel,
)


def test_gamma_goldens():
    assert gamma_fn(1.0) == pytest.approx(1.0, rel=1e-12)
    assert gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-12)
    # mpmath oracle
    assert gamma_fn(0.25) == pytest.approx(3.6256099082219083, rel=1e-12)


def test_gamma_recurrence_grid():
    for x in np.linspace(0.1, 10.0, 67):
        lhs = gamma_fn(x + 1.0)
        rhs = x * gamma_fn(x)
        assert abs(lhs - rhs) < 1e-10 * abs(rhs)


def test_gamma_domain():
    for bad in (0.0, -1.0, -0.5):
        with pytest.raises(DomainError):
            gamma_fn(bad)


def test_digamma_goldens():
    # recurrence psi(x+1) = psi(x) + 1/x
    assert digamma_fn(2.0) == pytest.approx(digamma_fn(1.0) + 1.0, abs=1e-10)
    # Euler-Mascheroni and the half-argument identity, mpmath oracle
    assert digamma_fn(1.0) == pytest.approx(-0.5772156649015329, abs=1e-10)
    assert digamma_fn(0.5) == pytest.approx(-1.9635100260214235, abs=1e-10)
    with pytest.raises(DomainError):
        digamma_fn(0.0)


def test_bessel_j_goldens():
    assert bessel_j(0.0, 0.0) == pytest.approx(1.0, abs=1e-14)
    assert bessel_j(1.0, 0.0) == 0.0
    # J_{1/2}(z) = sqrt(2/(pi z)) sin z
    assert bessel_j(0.5, math.pi / 2) == pytest.approx(2.0 / math.pi, rel=1e-12)
    # mpmath oracle, past the series/asymptotic crossover logic
    assert bessel_j(2.5, 7.3) == pytest.approx(-0.3008494315874998, rel=1e-12)


def test_bessel_j_half_integer_grid():
    # closed form sqrt(2/(pi z)) sin z on both sides of the branch switch
    for z in np.concatenate([np.linspace(0.05, 18.0, 41), np.linspace(21.0, 80.0, 23)]):
        want = math.sqrt(2.0 / (math.pi * z)) * math.sin(z)
        assert bessel_j(0.5, z) == pytest.approx(want, rel=1e-10, abs=1e-12)


def test_bessel_j_domain():
    with pytest.raises(DomainError):
        bessel_j(0.5, -1.0)
    with pytest.raises(DomainError):
        bessel_j(-0.6, 1.0)


def test_bessel_k_goldens():
    assert bessel_k(0.5, 1.0) == pytest.approx(math.sqrt(math.pi / 2) * math.exp(-1.0), rel=1e-12)
    assert bessel_k(0.5, 2.0) == pytest.approx(math.sqrt(math.pi / 4) * math.exp(-2.0), rel=1e-12)
    # mpmath oracle
    assert bessel_k(1.7, 0.4) == pytest.approx(6.663513485250149, rel=1e-12)


def test_bessel_k_symmetry_exact():
    for nu in (0.1, 0.3, 0.9, 1.6):
        for z in (0.2, 1.0, 5.0, 30.0):
            assert bessel_k(-nu, z) == bessel_k(nu, z)


def test_bessel_k_domain():
    for bad in (0.0, -1.0):
        with pytest.raises(DomainError):
            bessel_k(0.5, bad)


def test_incomplete_beta_goldens():
    assert incomplete_beta(1.0, 2.3, 0.7) == pytest.approx(1.0, abs=1e-12)
    assert incomplete_beta(0.37, 1.0, 1.0) == pytest.approx(0.37, abs=1e-12)
    # I_mu(1, 1/2) = 1 - sqrt(1 - mu)
    assert incomplete_beta(0.75, 1.0, 0.5) == pytest.approx(0.5, abs=1e-12)
    # mpmath oracle
    assert incomplete_beta(0.3, 2.5, 0.7) == pytest.approx(0.029814024845250471, rel=1e-12)


def test_incomplete_beta_monotone_in_mu():
    mus = np.linspace(0.01, 1.0, 40)
    vals = [incomplete_beta(m, 1.5, 2.0) for m in mus]
    assert all(b >= a - 1e-14 for a, b in zip(vals, vals[1:]))
    assert vals[-1] == pytest.approx(1.0, abs=1e-12)


def test_incomplete_beta_domain():
    with pytest.raises(DomainError):
        incomplete_beta(1.5, 1.0, 1.0)
    with pytest.raises(DomainError):
        incomplete_beta(0.5, -1.0, 1.0)


def test_hyp1f2_goldens():
    assert hyp1f2(0.7, 1.1, 2.3, 0.0) == 1.0
    # mpmath oracle values
    assert hyp1f2(1.0, 1.0, 1.0, 1.0) == pytest.approx(2.2795853023360672, rel=1e-12)
    assert hyp1f2(0.3, 0.5, 1.3, -0.25) == pytest.approx(0.8899256194415786, rel=1e-12)


def test_hyp1f2_large_argument():
    # cancellation-heavy regime; compensated summation must hold the line
    assert hyp1f2(0.3, 0.5, 1.3, -400.0) == pytest.approx(0.06869548306990676, rel=1e-10)
    assert hyp1f2(1.2, 0.8, 2.1, 30.0) == pytest.approx(2571.3164963109986, rel=1e-10)


def test_hyp1f2_errors():
    with pytest.raises(DomainError):
        hyp1f2(1.0, -2.0, 1.0, 0.5)
    with pytest.raises(AccuracyError):
        hyp1f2(1.0, 1.0, 1.0, 1e6, EvalOptions(max_terms=32))


def test_eval_options_gates():
    with pytest.raises(ParameterError):
        EvalOptions(rel_tol=1e-2)
    with pytest.raises(ParameterError):
        EvalOptions(rel_tol=0.0)
    with pytest.raises(ParameterError):
        EvalOptions(max_terms=8)


def test_hermite_poly_goldens():
    assert hermite_poly(2, 0.0) == -1.0
    assert hermite_poly(3, 2.0) == 2.0
    # explicit coefficients: H5(w) = w^5 - 10 w^3 + 15 w
    w = 1.5
    assert hermite_poly(5, w) == pytest.approx(w**5 - 10 * w**3 + 15 * w, rel=1e-13)
    with pytest.raises(DomainError):
        hermite_poly(-1, 0.0)


def test_hermite_poly_matches_recurrence_grid():
    # numpy's probabilists' basis as an independent evaluator
    from numpy.polynomial import hermite_e

    for k in range(11):
        coeffs = np.zeros(k + 1)
        coeffs[k] = 1.0
        for w in np.linspace(-4.0, 4.0, 17):
            want = hermite_e.hermeval(w, coeffs)
            assert hermite_poly(k, w) == pytest.approx(want, rel=1e-11, abs=1e-11)


def test_gauss_hermite_orthogonality():
    # E H_j H_k = delta_jk k! under the standard normal weight
    nodes, weights = np.polynomial.hermite_e.hermegauss(120)
    weights = weights / np.sqrt(2.0 * np.pi)
    for j in range(11):
        hj = np.array([hermite_poly(j, w) for w in nodes])
        for k in range(j, 11):
            hk = np.array([hermite_poly(k, w) for w in nodes])
            got = float(np.sum(weights * hj * hk))
            want = math.factorial(k) if j == k else 0.0
            assert abs(got - want) < 1e-8 * max(1.0, want)


def test_y_d_kernel_limits_and_reductions():
    for d in (1, 2, 3, 4):
        assert y_d_kernel(d, 0.0) == 1.0
    assert y_d_kernel(1, math.pi) == pytest.approx(-1.0, abs=1e-12)
    assert y_d_kernel(3, math.pi) == pytest.approx(0.0, abs=1e-12)


def test_y_d_kernel_closed_forms_grid():
    # Y_1 = cos, Y_3 = sinc
    for z in np.linspace(0.0, 40.0, 83):
        assert abs(y_d_kernel(1, z) - math.cos(z)) < 1e-10
        want = 1.0 if z == 0.0 else math.sin(z) / z
        assert abs(y_d_kernel(3, z) - want) < 1e-10
