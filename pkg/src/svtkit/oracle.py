"""Dense brute-force ground truth.

Everything here is exact up to LAPACK: full SVD, exact application of an
even polynomial to singular values, spectral projectors and ground-space
projectors.  The randomized and sparse code paths are validated against
these routines; nothing in this module is sampled or truncated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, SizeError

__all__ = [
    "DenseSvd",
    "exact_svt_apply",
    "exact_bilinear",
    "exact_projector",
    "exact_ground",
]

SVT_DENSE_CAP = 2048
GROUND_DENSE_CAP = 4096


@dataclass
class DenseSvd:
    """SVD A = sum_i sigma_i u_i v_i-dagger with the tall/wide padding
    convention: sigma is always length N (zeros appended when M < N) and
    the right vectors form a full orthonormal basis of C^N."""

    left: np.ndarray      # M x min(M, N), columns u_i
    sigma: np.ndarray     # length N, descending then zero padding
    right: np.ndarray     # N x N, columns v_i

    @classmethod
    def compute(cls, A) -> "DenseSvd":
        A = np.asarray(A, dtype=complex)
        if A.ndim != 2:
            raise ShapeError("expected a matrix")
        m, n = A.shape
        u, s, vh = np.linalg.svd(A, full_matrices=True)
        sigma = np.zeros(n)
        sigma[: s.size] = s
        out = cls(left=u[:, : min(m, n)], sigma=sigma, right=vh.conj().T)
        out.validate(A)
        return out

    def validate(self, A=None, tol: float = 1e-10):
        n = self.right.shape[0]
        r = self.left.shape[1]
        if A is not None and np.abs(self.reconstruct() - A).max() > tol:
            raise ValueError("SVD does not reconstruct the input to 1e-10")
        if np.abs(self.left.conj().T @ self.left - np.eye(r)).max() > tol:
            raise ValueError("left singular vectors are not orthonormal")
        if np.abs(self.right.conj().T @ self.right - np.eye(n)).max() > tol:
            raise ValueError("right singular vectors are not orthonormal")

    def reconstruct(self) -> np.ndarray:
        r = self.left.shape[1]
        return (self.left * self.sigma[:r]) @ self.right[:, :r].conj().T


def exact_svt_apply(A, P, u) -> np.ndarray:
    """P(sqrt(A-dagger A)) u = sum_i P(sigma_i) (v_i-dagger u) v_i by dense SVD."""
    A = np.asarray(A, dtype=complex)
    u = np.asarray(u, dtype=complex)
    if A.ndim != 2 or u.ndim != 1 or A.shape[1] != u.size:
        raise ShapeError(f"incompatible shapes {A.shape} and {u.shape}")
    if A.shape[1] > SVT_DENSE_CAP:
        raise SizeError(f"dense SVT capped at N={SVT_DENSE_CAP}")
    svd = DenseSvd.compute(A)
    V = svd.right
    return V @ (P(svd.sigma) * (V.conj().T @ u))


def exact_bilinear(A, P, u, v) -> complex:
    """v-dagger P(sqrt(A-dagger A)) u, exactly."""
    v = np.asarray(v, dtype=complex)
    return complex(np.vdot(v, exact_svt_apply(A, P, u)))


def exact_projector(A, a: float, b: float) -> np.ndarray:
    """Orthogonal projector onto right singular vectors with sigma in [a, b]."""
    if not 0.0 <= a <= b:
        raise ValueError("need 0 <= a <= b")
    svd = DenseSvd.compute(A)
    mask = (svd.sigma >= a) & (svd.sigma <= b)
    V = svd.right[:, mask]
    return V @ V.conj().T


def exact_ground(H, degeneracy_tol: float = 1e-9):
    """Smallest eigenvalue of Hermitian H and the projector onto its
    eigenspace (eigenvalues within ``degeneracy_tol`` of the bottom are
    grouped together)."""
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ShapeError("expected a square matrix")
    if H.shape[0] > GROUND_DENSE_CAP:
        raise SizeError(f"dense ground-space computation capped at N={GROUND_DENSE_CAP}")
    if np.abs(H - H.conj().T).max() > 1e-10:
        raise ValueError("matrix is not Hermitian to 1e-10")
    w, vecs = np.linalg.eigh(H)
    lam = float(w[0])
    cols = vecs[:, w <= lam + degeneracy_tol]
    return lam, cols @ cols.conj().T
