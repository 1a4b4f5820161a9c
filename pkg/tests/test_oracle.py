import numpy as np
import pytest
from numpy.testing import assert_allclose

from svtkit.errors import ShapeError
from svtkit.oracle import (DenseSvd, exact_bilinear, exact_ground,
                           exact_projector, exact_svt_apply)
from svtkit.polynomial import EvenPolynomial

ONE = EvenPolynomial.from_even_coeffs([1.0])
SQUARE = EvenPolynomial.from_even_coeffs([0.0, 1.0])


def random_complex(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def test_svd_invariants(rng):
    for shape in ((6, 6), (4, 7), (7, 4)):
        A = random_complex(rng, *shape)
        svd = DenseSvd.compute(A)
        assert svd.sigma.size == shape[1]
        assert np.abs(svd.reconstruct() - A).max() < 1e-10


def test_svt_apply_identity_polynomial(rng):
    A = random_complex(rng, 5, 5) / 10
    u = random_complex(rng, 5)
    assert_allclose(exact_svt_apply(A, ONE, u), u, atol=1e-12)


def test_svt_apply_diagonal_square(rng):
    sig = np.array([0.9, 0.5, 0.2])
    u = random_complex(rng, 3)
    got = exact_svt_apply(np.diag(sig), SQUARE, u)
    assert_allclose(got, sig ** 2 * u, atol=1e-12)


def test_svt_apply_equals_monomial_expansion(rng):
    # two independent dense paths: SVD form vs powers of A^dag A
    A = random_complex(rng, 6, 6) / 6
    u = random_complex(rng, 6)
    coeffs = rng.normal(size=4)
    P = EvenPolynomial.from_even_coeffs(coeffs)
    gram = A.conj().T @ A
    expected = coeffs[0] * u
    acc = u
    for r in range(1, 4):
        acc = gram @ acc
        expected = expected + coeffs[r] * acc
    assert_allclose(exact_svt_apply(A, P, u), expected, atol=1e-9)


def test_svt_apply_rectangular_padding(rng):
    # M < N: the padded singular values are zero, so P acts as P(0) there
    A = random_complex(rng, 3, 5) / 5
    u = random_complex(rng, 5)
    got = exact_svt_apply(A, SQUARE, u)
    assert_allclose(got, A.conj().T @ (A @ u), atol=1e-10)


def test_svt_apply_shape_error(rng):
    with pytest.raises(ShapeError):
        exact_svt_apply(np.eye(3), ONE, np.ones(4))


def test_bilinear(rng):
    A = random_complex(rng, 4, 4) / 4
    u, v = random_complex(rng, 4), random_complex(rng, 4)
    got = exact_bilinear(A, ONE, u, v)
    assert abs(got - np.vdot(v, u)) < 1e-12


def test_projector_full_and_empty_range(rng):
    A = random_complex(rng, 5, 5)
    svd = DenseSvd.compute(A)
    full = exact_projector(A, 0.0, svd.sigma[0] + 1)
    assert_allclose(full, np.eye(5), atol=1e-10)
    sig_min = svd.sigma[svd.sigma > 0].min()
    empty = exact_projector(A, sig_min * 1e-6, sig_min / 2)
    assert np.abs(empty).max() < 1e-10


def test_projector_diagonal_case():
    P = exact_projector(np.diag([0.9, 0.3]), 0.5, 1.0)
    expected = np.zeros((2, 2))
    expected[0, 0] = 1.0
    assert_allclose(P, expected, atol=1e-12)


def test_projector_is_projector(rng):
    A = random_complex(rng, 6, 6) / 3
    P = exact_projector(A, 0.2, 0.8)
    assert np.abs(P @ P - P).max() < 1e-10
    assert np.abs(P - P.conj().T).max() < 1e-10


def test_ground_minus_z():
    lam, proj = exact_ground(np.diag([1.0, -1.0]) * -1)
    assert lam == -1.0
    assert_allclose(proj, np.diag([1.0, 0.0]), atol=1e-12)


def test_ground_identity():
    lam, proj = exact_ground(np.eye(3))
    assert lam == 1.0
    assert_allclose(proj, np.eye(3), atol=1e-12)


def test_ground_rejects_non_hermitian(rng):
    with pytest.raises(ValueError, match="Hermitian"):
        exact_ground(random_complex(rng, 3, 3))


def test_ground_matches_char_poly_bisection(rng):
    # independent eigenvalue computation: bisect on det(H - lam I)
    from svtkit.rand import random_local_hamiltonian
    H = random_local_hamiltonian(rng, 5, 2, 4).to_dense()
    lam, _ = exact_ground(H)

    def char_sign(x):
        sign, _ = np.linalg.slogdet(H - x * np.eye(H.shape[0]))
        return 1 if np.real(sign) > 0 else -1

    lo, hi = -1.5, lam + 1e-3
    assert char_sign(lo) != 0
    for _ in range(60):
        mid = (lo + hi) / 2
        if char_sign(mid) == char_sign(lo):
            lo = mid
        else:
            hi = mid
    assert abs((lo + hi) / 2 - lam) < 1e-8
