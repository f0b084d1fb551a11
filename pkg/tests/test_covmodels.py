"""Covariance families, spectral densities, and long-memory parameter extraction."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from rosenlab.covmodels import (
    LongMemoryParams,
    _qr_value,
    c2_constant,
    cauchy,
    covariance_eval,
    isotropic_measure,
    linnik,
    local_global,
    lrd_params,
    model_from_json,
    model_to_json,
    qr_diagnostic,
    residual_exponent_fit,
    slowly_varying_remainder,
    spectral_density,
    spectral_leading,
)
from rosenlab.errors import (
    DegenerateFitError,
    DomainError,
    ParameterError,
    RegimeError,
    UnsupportedModelError,
)


def test_covariance_eval_goldens():
    m = cauchy(1, 0.1)
    assert covariance_eval(m, 0.0) == 1.0
    assert covariance_eval(m, 1.0) == pytest.approx(2.0**-0.1, rel=1e-14)
    lg = local_global(1, 0.4, 0.25)
    assert covariance_eval(lg, 1.0) == pytest.approx(0.25 / 0.65, rel=1e-12)


def test_covariance_eval_vector_and_range():
    r = np.linspace(0.0, 50.0, 200)
    for m in (cauchy(2, 0.3), linnik(1, 1.5, 0.2), local_global(1, 0.3, 0.5)):
        b = covariance_eval(m, r)
        assert b.shape == r.shape
        assert np.all(b <= 1.0 + 1e-14) and np.all(b >= -1.0)
        assert b[0] == 1.0


def test_local_global_branch_continuity():
    for alpha, theta in ((0.4, 0.25), (0.2, 0.7), (0.45, 0.05)):
        m = local_global(1, alpha, theta)
        below = covariance_eval(m, 1.0 - 1e-13)
        above = covariance_eval(m, 1.0 + 1e-13)
        assert abs(below - above) < 1e-12


def test_model_constructors_reject_bad_parameters():
    with pytest.raises(ParameterError):
        cauchy(1, -0.1)
    with pytest.raises(ParameterError):
        linnik(1, 2.5, 0.1)
    with pytest.raises(ParameterError):
        local_global(3, 0.4, 0.25)
    with pytest.raises(ParameterError):
        local_global(1, 0.4, 1.5)  # theta beyond (3-d)/2


def test_lrd_params_goldens():
    p = lrd_params(cauchy(1, 0.2))
    assert p.alpha == pytest.approx(0.4)
    assert p.upsilon == pytest.approx(0.6)
    assert p.q_max == pytest.approx(0.1)

    p = lrd_params(cauchy(4, 0.5))
    assert p.alpha == pytest.approx(1.0)
    assert p.upsilon == pytest.approx(2.0)
    assert p.q_max == pytest.approx(1.0)

    p = lrd_params(linnik(2, 7.0 / 4.0, 1.0 / 3.0))
    assert p.alpha == pytest.approx(7.0 / 12.0)
    assert p.upsilon == pytest.approx(17.0 / 12.0)

    p = lrd_params(local_global(1, 0.4, 0.25))
    assert p.upsilon == pytest.approx(0.6)
    assert p.q_max == pytest.approx(0.1)
    # slowly varying part is theta/(theta+alpha) past the knee
    assert p.slowly_varying(2.0) == pytest.approx(0.25 / 0.65, rel=1e-12)


def test_lrd_params_regime_gates():
    with pytest.raises(RegimeError):
        lrd_params(cauchy(1, 0.3))  # needs theta < d/4
    with pytest.raises(RegimeError):
        lrd_params(linnik(1, 1.5, 0.4))  # sigma * theta >= d/2


def test_c2_constant_goldens():
    assert c2_constant(1, 0.5) == pytest.approx(1.0 / math.sqrt(2.0 * math.pi), rel=1e-12)
    for d in (1, 2, 3):
        assert c2_constant(d, d / 2.0) == pytest.approx((2.0 * math.pi) ** (-d / 2.0), rel=1e-12)
    assert c2_constant(3, 1.0) == pytest.approx(1.0 / (2.0 * math.pi**2), rel=1e-12)
    with pytest.raises(DomainError):
        c2_constant(1, 1.5)


def test_cauchy_spectral_closed_form_d2():
    # K_{1/2} collapses the Bessel form to exp(-lam)/(2 pi lam)
    m = cauchy(2, 0.5)
    for lam in np.linspace(0.1, 10.0, 34):
        want = math.exp(-lam) / (2.0 * math.pi * lam)
        assert spectral_density(m, lam) == pytest.approx(want, rel=1e-10)


def test_linnik_sigma2_coincides_with_cauchy():
    for lam in (0.1, 0.5, 1.0, 3.0):
        a = spectral_density(linnik(2, 2.0, 0.4), lam)
        b = spectral_density(cauchy(2, 0.4), lam)
        assert abs(a / b - 1.0) < 1e-6


def test_linnik_spectral_positive_and_decaying():
    m = linnik(1, 1.5, 0.2)
    vals = [spectral_density(m, lam) for lam in np.geomspace(1e-3, 50.0, 12)]
    assert all(v > 0.0 for v in vals)
    assert vals[0] > vals[-1]


def test_local_global_leading_term():
    # relative error of the origin asymptote is O(lam^upsilon), upsilon = 0.6
    m = local_global(1, 0.4, 0.5)
    p = lrd_params(m)
    for lam in (0.01, 0.003):
        f = spectral_density(m, lam)
        lead = spectral_leading(p, lam)
        assert abs(f / lead - 1.0) < lam**0.6


def test_local_global_d2_spectral_unsupported():
    with pytest.raises(UnsupportedModelError):
        spectral_density(local_global(2, 0.3, 0.25), 0.5)


def test_spectral_density_positive_grid():
    for m in (cauchy(1, 0.2), cauchy(2, 0.5), linnik(2, 1.75, 1.0 / 3.0), local_global(1, 0.4, 0.5)):
        for lam in np.geomspace(1e-4, 100.0, 9):
            assert spectral_density(m, lam) > 0.0
    with pytest.raises(DomainError):
        spectral_density(cauchy(1, 0.2), 0.0)


def test_spectral_leading_forms():
    p = lrd_params(cauchy(1, 0.2))
    c2 = c2_constant(1, 0.4)
    assert spectral_leading(p, 1.0) == pytest.approx(c2 * p.slowly_varying(1.0), rel=1e-12)
    lam = 0.01
    want = c2 * lam**-0.6 * (1.0 + lam**2) ** -0.2
    assert spectral_leading(p, lam) == pytest.approx(want, rel=1e-12)
    # synthetic exact-power model: L == 1
    ps = LongMemoryParams(1, 0.4, lambda t: 1.0, 0.1, 0.6)
    assert spectral_leading(ps, 0.25) == pytest.approx(c2_constant(1, 0.4) * 0.25**-0.6, rel=1e-12)


def test_fourier_pair_consistency_d1():
    # invert the spectral density numerically and reconstruct the covariance
    m = cauchy(1, 0.2)
    f = lambda lam: spectral_density(m, lam)
    for r in (0.5, 5.0):
        a1, _ = quad(lambda lam: f(lam) * math.cos(lam * r), 1e-300, 1.0, limit=400)
        a2, _ = quad(f, 1.0, 1000.0, weight="cos", wvar=r, limit=2000)
        got = 2.0 * (a1 + a2)
        assert abs(got - covariance_eval(m, r)) < 1e-6


def test_spectral_tail_bounds():
    # lam^d f stays bounded for Cauchy, lam^(d+sigma) f for Linnik
    m = cauchy(1, 0.2)
    tail = [lam * spectral_density(m, lam) for lam in np.geomspace(10.0, 1000.0, 7)]
    assert max(tail) < 10.0 * tail[0] + 1.0
    ml = linnik(1, 1.5, 0.2)
    tail = [lam**2.5 * spectral_density(ml, lam) for lam in np.geomspace(10.0, 1000.0, 7)]
    assert max(tail) < 10.0 * tail[0] + 1.0


def test_asymptotic_covariance_form():
    # r^alpha B(r) / L(r) -> 1 (Assumption-1 shape of all three families)
    for m in (cauchy(1, 0.2), linnik(2, 1.75, 1.0 / 3.0), local_global(1, 0.4, 0.5)):
        p = lrd_params(m)
        r = 1e4
        ratio = r**p.alpha * covariance_eval(m, r) / p.slowly_varying(r)
        assert ratio == pytest.approx(1.0, abs=1e-3)


def test_residual_exponent_fit_recovers_upsilon():
    grid = np.geomspace(1e-4, 10**-2.5, 10)
    got = residual_exponent_fit(cauchy(1, 0.2), grid)
    assert got == pytest.approx(0.6, abs=0.05)
    got = residual_exponent_fit(local_global(1, 0.4, 0.5), grid)
    assert got == pytest.approx(0.6, abs=0.05)


def test_residual_exponent_fit_gates():
    m = cauchy(1, 0.2)
    with pytest.raises(ParameterError):
        residual_exponent_fit(m, np.geomspace(1e-4, 1e-3, 5))
    with pytest.raises(ParameterError):
        residual_exponent_fit(m, np.geomspace(1e-3, 0.5, 10))


def test_slowly_varying_remainder():
    r_grid = np.geomspace(1.0, 2000.0, 40)
    t_grid = np.linspace(1.0, 50.0, 20)
    assert slowly_varying_remainder(lambda t: 3.0, 1.0, r_grid, t_grid) == 0.0
    L = lrd_params(cauchy(1, 0.2)).slowly_varying
    sup = slowly_varying_remainder(L, 1.9, r_grid, t_grid)
    assert 0.0 < sup < 1.0
    # log is the canonical counterexample: r^q log(t)/log(r) is unbounded in r
    small = slowly_varying_remainder(np.log, 0.2, np.geomspace(1e3, 1e4, 30), t_grid)
    large = slowly_varying_remainder(np.log, 0.2, np.geomspace(1e8, 1e9, 30), t_grid)
    assert large > 2.0 * small


def test_isotropic_measure():
    m = cauchy(2, 0.5)
    assert isotropic_measure(m, 0.0) == 0.0
    # closed-form inner integral: 1 - exp(-1)
    assert isotropic_measure(m, 1.0) == pytest.approx(1.0 - math.exp(-1.0), rel=1e-8)
    # total spectral mass is B(0) = 1
    assert isotropic_measure(m, 1000.0) == pytest.approx(1.0, abs=1e-3)


def test_qr_diagnostic_tends_to_one():
    m = cauchy(1, 0.2)
    vals = [qr_diagnostic(m, r, 1.0, 2.0) for r in (10.0, 100.0, 1000.0, 10000.0)]
    gaps = [abs(v - 1.0) for v in vals]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 5e-3


def test_qr_exact_power_is_identically_one():
    # with f equal to its own asymptote every factor cancels
    p = LongMemoryParams(1, 0.4, lambda t: 1.0, 0.1, 0.6)
    c2 = c2_constant(1, 0.4)
    f = lambda u: c2 * u ** (0.4 - 1.0)
    for r in (3.0, 77.0, 5000.0):
        assert _qr_value(f, p, r, 1.0, 2.0) == pytest.approx(1.0, rel=1e-12)


def test_model_json_round_trip():
    for m in (cauchy(2, 0.5), linnik(1, 1.5, 0.2), local_global(1, 0.4, 0.25)):
        assert model_from_json(model_to_json(m)) == m
    with pytest.raises(ParameterError):
        model_from_json('{"family": "matern", "d": 1}')
    with pytest.raises(ParameterError):
        model_from_json('{"family": "cauchy", "d": 1}')
