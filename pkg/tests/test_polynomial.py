import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from svtkit.errors import ConstructionError
from svtkit.polynomial import (EvenPolynomial, ThresholdSpec, _combine,
                               build_sign_approx, build_threshold,
                               load_polynomial, save_polynomial,
                               verify_threshold)

SPEC = ThresholdSpec(0.5, 0.7, 0.1, 0.1, 0.01)


def test_eval_constant_and_square():
    one = EvenPolynomial.from_even_coeffs([1.0])
    assert one(0.7) == 1.0
    sq = EvenPolynomial.from_even_coeffs([0.0, 1.0])
    assert abs(sq(-0.5) - 0.25) < 1e-15


def test_eval_matches_naive_monomial_sum(rng):
    coeffs = rng.normal(size=5)  # degree 8
    P = EvenPolynomial.from_even_coeffs(coeffs)
    xs = rng.uniform(-1, 1, size=100)
    naive = sum(c * xs ** (2 * r) for r, c in enumerate(coeffs))
    assert_allclose(P(xs), naive, rtol=1e-13)


def test_evenness_is_structural(rng):
    P = build_threshold(SPEC)
    xs = rng.uniform(-1, 1, size=1000)
    assert np.all(P(xs) == P(-xs))


def test_oddness_is_structural(rng):
    P = build_sign_approx(0.5, 0.1)
    xs = rng.uniform(-2, 2, size=1000)
    assert np.all(P(xs) == -P(-xs))
    assert P(0.0) == 0.0


def test_sign_approx_boxes_hold_on_grid():
    eta, xi = 0.5, 0.1
    P = build_sign_approx(eta, xi)
    xs = np.linspace(-2, 2, 10_000)
    vals = P(xs)
    assert np.abs(vals).max() <= 1 + 1e-9
    assert vals[xs >= eta].min() >= 1 - xi - 1e-9
    assert vals[xs <= -eta].max() <= -1 + xi + 1e-9


def test_sign_approx_degree_bound():
    # measured implementation constant: degree <= C log(1/xi) / eta, C = 6
    eta, xi = 0.25, 0.01
    P = build_sign_approx(eta, xi)
    assert P.degree <= 6.0 * math.log(1.0 / xi) / eta


def test_sign_approx_validates_parameters():
    with pytest.raises(ValueError):
        build_sign_approx(0.0, 0.1)
    with pytest.raises(ValueError):
        build_sign_approx(0.5, 0.7)


def test_sign_approx_cap_raises():
    with pytest.raises(ConstructionError):
        build_sign_approx(0.001, 0.001, degree_cap=64)


def test_threshold_certifies_on_grid():
    P = build_threshold(SPEC)
    report = verify_threshold(P, SPEC)
    assert report.passed
    assert report.bound_violation <= 1e-9
    assert report.plateau_violation <= 1e-9
    assert report.outer_violation <= 1e-9


def test_threshold_plateau_midpoint():
    P = build_threshold(SPEC)
    mid = (SPEC.t1 + SPEC.t2) / 2
    assert P(mid) >= 1 - SPEC.chi


def test_threshold_outer_at_zero():
    P = build_threshold(SPEC)
    assert 0 <= P(0.0) <= SPEC.chi


def test_threshold_sup_norm_bound():
    xs = np.linspace(-1, 1, 20_001)
    for chi in (0.2, 0.05, 0.01):
        P = build_threshold(ThresholdSpec(0.4, 0.6, 0.15, 0.15, chi))
        assert np.abs(P(xs)).max() <= 1 + 1e-9


def test_verify_threshold_rejects_wrong_polynomials():
    sq = EvenPolynomial.from_even_coeffs([0.0, 1.0])
    report = verify_threshold(sq, SPEC)
    assert not report.passed
    assert report.plateau_violation > 0.5  # 0.6^2 = 0.36 << 0.99
    one = EvenPolynomial.from_even_coeffs([1.0])
    assert verify_threshold(one, SPEC).outer_violation > 0.9


def test_verify_threshold_grid_floor():
    with pytest.raises(ValueError):
        verify_threshold(EvenPolynomial.from_even_coeffs([1.0]), SPEC, grid=10)


def test_combination_intermediate_bounds():
    # before symmetrization: Q in [1-xi, 1] on the plateau and
    # [0, 3 xi / 2] on the outer regions
    xi = SPEC.chi / 3.0
    p1 = build_sign_approx(SPEC.theta1 / 2, xi)
    q = _combine(p1, p1, SPEC, xi)
    plateau = q(np.linspace(SPEC.t1, SPEC.t2, 4000))
    assert plateau.min() >= 1 - xi - 1e-9 and plateau.max() <= 1 + 1e-9
    outer = np.concatenate([
        q(np.linspace(0.0, SPEC.t1 - SPEC.theta1, 4000)),
        q(np.linspace(SPEC.t2 + SPEC.theta2, 1.0, 4000))])
    assert outer.min() >= -1e-9 and outer.max() <= 1.5 * xi + 1e-9


def test_threshold_degree_monotone_in_chi():
    degrees = [build_threshold(ThresholdSpec(0.5, 0.7, 0.1, 0.1, chi)).degree
               for chi in (0.3, 0.1, 0.03, 0.01)]
    assert degrees == sorted(degrees)


def test_threshold_spec_validation():
    with pytest.raises(ValueError):
        ThresholdSpec(0.7, 0.5, 0.1, 0.1, 0.01)  # t1 > t2
    with pytest.raises(ValueError):
        ThresholdSpec(0.05, 0.7, 0.1, 0.1, 0.01)  # theta1 > t1
    with pytest.raises(ValueError):
        ThresholdSpec(0.5, 0.95, 0.1, 0.1, 0.01)  # t2 > 1 - theta2
    with pytest.raises(ValueError):
        ThresholdSpec(0.5, 0.7, 0.1, 0.1, 1.5)
    # degenerate single-point plateau is allowed (scan edge case)
    ThresholdSpec(0.5, 0.5, 0.5, 0.25, 0.1)


def test_degenerate_plateau_builds():
    spec = ThresholdSpec(0.5, 0.5, 0.5, 0.25, 0.1)
    P = build_threshold(spec)
    assert verify_threshold(P, spec).passed


def test_monomial_conversion_round_trip(rng):
    coeffs = rng.normal(size=4)
    P = EvenPolynomial.from_even_coeffs(coeffs)
    assert_allclose(P.monomial_even(), coeffs, atol=1e-12)


def test_monomial_conversion_warns_at_high_degree():
    P = build_threshold(SPEC)
    assert P.degree > 30
    with pytest.warns(UserWarning, match="ill-conditioned"):
        P.monomial_even()


def test_polynomial_file_round_trip(tmp_path, rng):
    P = EvenPolynomial.from_even_coeffs(rng.normal(size=4))
    path = tmp_path / "p.poly"
    save_polynomial(path, P)
    Q = load_polynomial(path)
    assert Q.degree == P.degree
    assert_allclose(Q.monomial_even(), P.monomial_even(), atol=1e-15)


def test_polynomial_loader_rejects_odd_coefficients(tmp_path):
    path = tmp_path / "bad.poly"
    path.write_text("EVEN 2\n1.0\n0.5\n2.0\n")
    with pytest.raises(Exception, match="a_1"):
        load_polynomial(path)
