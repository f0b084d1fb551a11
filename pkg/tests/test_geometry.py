"""Observation windows: volumes, transforms, distance laws, reduction identity."""

import math

import numpy as np
import pytest
from scipy import integrate

from rosenlab.errors import DomainError, IntegrabilityError, ParameterError
from rosenlab.geometry import (
    ball,
    ball_ft_radial,
    diameter,
    distance_integral,
    distance_pdf,
    indicator_ft,
    rectangle,
    set_from_json,
    set_to_json,
    uniform_sample,
    volume,
)


def test_volume_goldens():
    assert volume(ball(2), 1.0) == pytest.approx(math.pi, rel=1e-14)
    assert volume(rectangle([-1.0, -1.0], [1.0, 1.0]), 3.0) == pytest.approx(36.0, rel=1e-14)
    assert volume(ball(3), 1.0) == pytest.approx(4.0 * math.pi / 3.0, rel=1e-14)


def test_volume_homothety():
    for w in (ball(2, 0.7), rectangle([-0.3, -1.0], [0.4, 2.0])):
        assert volume(w, 5.0) == pytest.approx(5.0 ** w.dimension * volume(w, 1.0), rel=1e-13)


def test_diameter():
    assert diameter(ball(2), 1.0) == 2.0
    assert diameter(rectangle([-1.0, -1.0], [1.0, 1.0]), 1.0) == pytest.approx(2.0 * math.sqrt(2.0))
    for w in (ball(3, 1.3), rectangle([-1.0], [1.0])):
        assert diameter(w, 5.0) == pytest.approx(5.0 * diameter(w, 1.0))


def test_rectangle_needs_interior_origin():
    with pytest.raises(ParameterError):
        rectangle([0.0], [1.0])
    with pytest.raises(ParameterError):
        rectangle([-1.0, 0.5], [1.0, 1.0])


def test_indicator_ft_at_zero_is_volume():
    for w in (ball(1), ball(2, 2.0), ball(3), rectangle([-1.0, -0.5], [1.0, 0.5])):
        got = indicator_ft(w, np.zeros(w.dimension))
        assert complex(got).real == pytest.approx(volume(w), rel=1e-12)
        assert abs(complex(got).imag) < 1e-12


def test_indicator_ft_goldens():
    # J_{3/2} half-integer reduction gives 4/pi for the unit d=3 ball at |x| = pi
    got = indicator_ft(ball(3), np.array([math.pi, 0.0, 0.0]))
    assert got == pytest.approx(4.0 / math.pi, rel=1e-12)
    # sinc zero for the unit interval
    got = indicator_ft(rectangle([-1.0], [1.0]), np.array([math.pi]))
    assert abs(complex(got)) < 1e-12


def test_indicator_ft_ball_real_even_bounded():
    w = ball(2)
    rng = np.random.default_rng(1)
    for _ in range(50):
        x = rng.normal(size=2) * 5.0
        v1 = indicator_ft(w, x)
        v2 = indicator_ft(w, -x)
        assert abs(complex(v1).imag) < 1e-12
        assert complex(v1).real == pytest.approx(complex(v2).real, abs=1e-12)
        assert abs(complex(v1)) <= volume(w) + 1e-12


def test_indicator_ft_rect_matches_quadrature():
    # direct 2-d quadrature of the oscillatory integral as an independent oracle
    w = rectangle([-1.0, -0.5], [1.0, 0.5])
    x = np.array([0.9, -1.7])

    re, _ = integrate.dblquad(
        lambda v, u: math.cos(x[0] * u + x[1] * v), -1.0, 1.0, -0.5, 0.5
    )
    im, _ = integrate.dblquad(
        lambda v, u: math.sin(x[0] * u + x[1] * v), -1.0, 1.0, -0.5, 0.5
    )
    got = complex(indicator_ft(w, x))
    assert got.real == pytest.approx(re, abs=1e-9)
    assert got.imag == pytest.approx(im, abs=1e-9)


def test_indicator_ft_series_switch_is_continuous():
    # the near-origin series branch must meet the closed form
    w = ball(2)
    for nrm in (0.99e-4, 1.01e-4):
        x = np.array([nrm, 0.0])
        assert indicator_ft(w, x) == pytest.approx(volume(w), rel=1e-7)


def test_ball_ft_radial_matches_indicator_ft():
    w = ball(2, 1.0)
    for z in (0.0, 0.3, 2.0, 11.5):
        want = complex(indicator_ft(w, np.array([z, 0.0]))).real
        got = float(np.asarray(ball_ft_radial(w, np.array([z]))).ravel()[0])
        assert got == pytest.approx(want, abs=1e-12)


def test_spherical_l2_decay_exponent():
    # octave-averaged |K|^2 must fall at least like z^-(d+1)
    for d in (1, 2, 3):
        w = ball(d)
        edges = np.geomspace(10.0, 1000.0, 13)
        mids, means = [], []
        for lo, hi in zip(edges[:-1], edges[1:]):
            z = np.linspace(lo, hi, 400)
            k2 = np.asarray(ball_ft_radial(w, z), dtype=float) ** 2
            mids.append(math.sqrt(lo * hi))
            means.append(float(k2.mean()))
        slope = np.polyfit(np.log(mids), np.log(means), 1)[0]
        assert -slope >= d + 1 - 0.1


def test_distance_pdf_triangular_law():
    # |U - V| for U, V uniform on an interval of length 2
    w = ball(1)
    z = np.linspace(0.0, 2.0, 2001)
    got = distance_pdf(w, 1.0, z)
    want = 1.0 - z / 2.0
    assert float(np.max(np.abs(got - want))) < 1e-10


def test_distance_pdf_normalization():
    for d in (1, 2, 3):
        w = ball(d)
        total, err = integrate.quad(lambda z: float(distance_pdf(w, 1.0, z)), 0.0, 2.0, limit=200)
        assert abs(total - 1.0) < 1e-8
        assert err < 1e-8


def test_distance_pdf_support_and_homothety():
    w = ball(2)
    assert distance_pdf(w, 1.0, 2.5) == 0.0
    assert distance_pdf(w, 3.0, 7.0) == 0.0
    for z in (0.3, 0.9, 1.7):
        lhs = float(distance_pdf(w, 3.0, 3.0 * z))
        rhs = float(distance_pdf(w, 1.0, z)) / 3.0
        assert lhs == pytest.approx(rhs, abs=1e-10)


def test_distance_pdf_rectangle_is_a_density():
    # MC-histogram route: coarse checks only, the estimator is approximate
    w = rectangle([-1.0, -1.0], [1.0, 1.0])
    z = np.linspace(0.0, diameter(w, 1.0), 600)
    vals = np.array([float(distance_pdf(w, 1.0, t)) for t in z])
    assert np.all(vals >= 0.0)
    total = np.trapezoid(vals, z)
    assert total == pytest.approx(1.0, abs=0.02)
    assert distance_pdf(w, 1.0, diameter(w, 1.0) + 0.1) == 0.0


def test_uniform_sample_membership_and_centroid():
    w = ball(2)
    pts = uniform_sample(w, 2.0, 40000, seed=7)
    assert pts.shape == (40000, 2)
    assert np.all(np.linalg.norm(pts, axis=1) <= 2.0 + 1e-12)
    # per-coordinate variance is R^2/(d+2) = 1 at R=2, d=2
    se = math.sqrt(1.0 / 40000)
    assert np.all(np.abs(pts.mean(axis=0)) < 3 * se)

    rect = rectangle([-1.0, -0.5], [1.0, 0.5])
    pts = uniform_sample(rect, 1.0, 10000, seed=8)
    assert np.all(pts[:, 0] >= -1.0) and np.all(pts[:, 0] <= 1.0)
    assert np.all(pts[:, 1] >= -0.5) and np.all(pts[:, 1] <= 0.5)


def test_uniform_sample_deterministic():
    w = ball(3)
    a = uniform_sample(w, 1.0, 100, seed=11)
    b = uniform_sample(w, 1.0, 100, seed=11)
    c = uniform_sample(w, 1.0, 100, seed=12)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_pairwise_distance_histogram_matches_pdf():
    w = ball(2)
    n = 60000
    pts = uniform_sample(w, 1.0, 2 * n, seed=21)
    dist = np.linalg.norm(pts[:n] - pts[n:], axis=1)
    edges = np.linspace(0.0, 2.0, 11)
    counts, _ = np.histogram(dist, edges)
    zf = np.linspace(0.0, 2.0, 4001)
    pdf = np.asarray(distance_pdf(w, 1.0, zf), dtype=float)
    for i, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
        mask = (zf >= lo) & (zf <= hi)
        p = np.trapezoid(pdf[mask], zf[mask])
        se = math.sqrt(max(p * (1 - p), 1e-12) / n)
        assert abs(counts[i] / n - p) < 3 * se + 1e-3


def test_distance_integral_normalization():
    for w, r in ((ball(2), 1.0), (rectangle([-0.5], [0.5]), 2.0)):
        got = distance_integral(w, r, lambda z: np.ones_like(z))
        want = volume(w) ** 2 * r ** (2 * w.dimension)
        assert got == pytest.approx(want, rel=1e-8)


def test_distance_integral_interval_closed_form():
    # int int |u-v|^(-1/2) over the unit square of side 1 equals 8/3
    w = rectangle([-0.5], [0.5])
    got = distance_integral(w, 1.0, lambda z: z ** -0.5)
    assert got == pytest.approx(8.0 / 3.0, rel=1e-9)


def test_distance_integral_monte_carlo_cross_check():
    w = ball(2)
    exponent = -0.3
    got = distance_integral(w, 1.0, lambda z: z**exponent)
    n = 10**6
    pts = uniform_sample(w, 1.0, 2 * n, seed=33)
    vals = np.linalg.norm(pts[:n] - pts[n:], axis=1) ** exponent
    scale = volume(w) ** 2
    mc = scale * float(vals.mean())
    se = scale * float(vals.std(ddof=1)) / math.sqrt(n)
    assert abs(got - mc) < 3 * se


def test_distance_integral_flags_divergence():
    w = rectangle([-0.5], [0.5])
    with pytest.raises(IntegrabilityError):
        distance_integral(w, 1.0, lambda z: z**-1.2)
    w2 = ball(2)
    with pytest.raises(IntegrabilityError):
        distance_integral(w2, 1.0, lambda z: z**-2.4)


def test_set_json_round_trip():
    for w in (ball(2, 1.5), rectangle([-1.0, -0.5], [1.0, 0.5])):
        assert set_from_json(set_to_json(w)) == w
    with pytest.raises(ParameterError):
        set_from_json('{"shape": "cone", "R": 1.0}')
    with pytest.raises(ParameterError):
        set_from_json('{"shape": "rect", "a": [-1.0]}')


def test_scale_factor_gate():
    with pytest.raises(DomainError):
        volume(ball(2), -1.0)
    with pytest.raises(DomainError):
        distance_pdf(ball(2), 0.0, 0.5)
