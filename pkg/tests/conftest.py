import numpy as np
import pytest

from svtkit.hamiltonian import LocalHamiltonian, LocalTerm


def dense_from_terms(n, terms):
    """Independent dense assembly: embed each block by explicit kron with
    identities and axis reordering (cross-checks the sparse scatter)."""
    dim = 2 ** n
    out = np.zeros((dim, dim), dtype=complex)
    for term in terms:
        j = len(term.qubits)
        rest = [q for q in range(1, n + 1) if q not in term.qubits]
        big = np.kron(term.block, np.eye(2 ** (n - j)))
        order = list(term.qubits) + rest
        big = big.reshape([2] * (2 * n))
        perm = np.argsort(order)
        big = np.transpose(big, list(perm) + [n + p for p in perm])
        out += big.reshape(dim, dim)
    return out


def shifted_hamiltonian(rng, n, k, m, spread=0.5):
    """Random k-local Hamiltonian plus an identity shift so the ground
    energy is not pinned near -1."""
    from svtkit.rand import random_local_hamiltonian
    H = random_local_hamiltonian(rng, n, k, m, norm=spread)
    mu = rng.uniform(-(1.0 - spread), 1.0 - spread)
    terms = list(H.terms) + [LocalTerm((1,), mu * np.eye(2, dtype=complex))]
    return LocalHamiltonian(n, k, terms)


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
