"""Hermite expansions, rank detection, Parseval bookkeeping.

Gauss-Hermite quadrature converges slowly for the kinked |w| functionals,
so their coefficient tolerances sit near 1e-4; polynomial functionals are
held to 1e-10.
"""

import math

import numpy as np
import pytest

from rosenlab.errors import ParameterError, RankError
from rosenlab.hermite import (
    functional_catalog,
    hermite_coefficients,
    hermite_rank,
    parseval_defect,
    truncated_eval,
)

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


def test_h2_coefficients_exact():
    exp = hermite_coefficients(functional_catalog("h2"), 6)
    assert exp.coeffs[2] == pytest.approx(2.0, abs=1e-10)
    for j in (0, 1, 3, 4, 5, 6):
        assert abs(exp.coeffs[j]) < 1e-10


def test_square_coefficients():
    exp = hermite_coefficients(lambda w: w * w, 6)
    assert exp.coeffs[0] == pytest.approx(1.0, abs=1e-10)
    assert exp.coeffs[2] == pytest.approx(2.0, abs=1e-10)
    for j in (1, 3, 4, 5, 6):
        assert abs(exp.coeffs[j]) < 1e-10


def test_abs_coefficients():
    # E|w| = sqrt(2/pi); absolute-moment identities give C4 = -C0
    exp = hermite_coefficients(np.abs, 6)
    assert exp.coeffs[0] == pytest.approx(SQRT_2_OVER_PI, abs=2e-4)
    assert exp.coeffs[2] == pytest.approx(SQRT_2_OVER_PI, abs=2e-4)
    assert exp.coeffs[4] == pytest.approx(-SQRT_2_OVER_PI, abs=2e-4)
    # odd coefficients vanish for even G
    for j in (1, 3, 5):
        assert abs(exp.coeffs[j]) < 1e-10


def test_rank_detection():
    assert hermite_coefficients(lambda w: w, 4).rank == 1
    assert hermite_coefficients(functional_catalog("abs-centered"), 4).rank == 2
    assert hermite_coefficients(functional_catalog("h2"), 4).rank == 2
    exp = hermite_coefficients(lambda w: w**3, 5)
    assert exp.rank == 1  # E w^3 H_1 = 3


def test_rank_undetected():
    exp = hermite_coefficients(lambda w: np.ones_like(w), 4)
    with pytest.raises(RankError):
        hermite_rank(exp)


def test_rank_tolerance_override():
    exp = hermite_coefficients(functional_catalog("h2"), 4)
    # an absurdly large tolerance swallows every coefficient
    with pytest.raises(RankError):
        hermite_rank(exp, tol=100.0)


def test_parseval_defect_h2():
    exp = hermite_coefficients(functional_catalog("h2"), 4)
    assert abs(parseval_defect(functional_catalog("h2"), exp)) < 1e-10


def test_parseval_defect_abs():
    exp = hermite_coefficients(np.abs, 4)
    want = 1.0 - (2.0 / math.pi + 1.0 / math.pi + 1.0 / (12.0 * math.pi))
    assert parseval_defect(np.abs, exp) == pytest.approx(want, abs=1e-4)


def test_parseval_defect_monotone_in_order():
    defects = []
    for J in (2, 4, 6, 8):
        exp = hermite_coefficients(np.abs, J)
        defects.append(parseval_defect(np.abs, exp))
    assert all(b <= a + 1e-12 for a, b in zip(defects, defects[1:]))
    assert all(d >= -1e-8 for d in defects)


def test_truncated_eval():
    exp = hermite_coefficients(functional_catalog("h2"), 4)
    assert truncated_eval(exp, 0.0) == pytest.approx(-1.0, abs=1e-9)
    exp = hermite_coefficients(lambda w: w * w, 4)
    assert truncated_eval(exp, 2.0) == pytest.approx(4.0, abs=1e-9)
    exp = hermite_coefficients(np.abs, 12)
    assert truncated_eval(exp, 1.0) == pytest.approx(1.0, abs=0.05)


def test_quadrature_order_gates():
    with pytest.raises(ParameterError):
        hermite_coefficients(np.abs, 6, quad_order=8)


def test_catalog():
    assert hermite_coefficients(functional_catalog("square"), 2).coeffs[0] == pytest.approx(1.0, abs=1e-10)
    g = functional_catalog("abs-centered")
    w = np.array([-1.5, 0.0, 2.0])
    assert np.allclose(g(w), np.abs(w) - SQRT_2_OVER_PI)
    with pytest.raises(ParameterError):
        functional_catalog("cubic")


def test_bivariate_moment_identity():
    # E H_k(x) H_m(y) = delta_km k! rho^k for jointly Gaussian (x, y)
    from rosenlab.specfun import hermite_poly

    n = 10**6
    rng = np.random.default_rng(99)
    z1 = rng.standard_normal(n)
    z2 = rng.standard_normal(n)
    for rho in (0.3, 0.7):
        x = z1
        y = rho * z1 + math.sqrt(1.0 - rho * rho) * z2
        hx = {k: np.polynomial.hermite_e.hermeval(x, np.eye(5)[k]) for k in range(1, 5)}
        hy = {k: np.polynomial.hermite_e.hermeval(y, np.eye(5)[k]) for k in range(1, 5)}
        # the scalar kernel agrees with numpy's basis on spot checks
        assert hermite_poly(3, 1.25) == pytest.approx(
            float(np.polynomial.hermite_e.hermeval(1.25, np.eye(5)[3])), rel=1e-12
        )
        for k in range(1, 5):
            for m in range(k, 5):
                prod = hx[k] * hy[m]
                got = float(prod.mean())
                se = float(prod.std(ddof=1)) / math.sqrt(n)
                want = math.factorial(k) * rho**k if k == m else 0.0
                assert abs(got - want) < 3.0 * se


def test_expansion_invariants():
    exp = hermite_coefficients(np.abs, 8)
    # Parseval sum never exceeds the second moment by more than tolerance
    total = sum(c * c / math.factorial(j) for j, c in enumerate(exp.coeffs))
    assert total <= 1.0 + 1e-8
    assert exp.order == 8
    assert len(exp.coeffs) == 9
