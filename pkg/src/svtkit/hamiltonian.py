"""k-local Hamiltonians and guided ground-energy problems.

A LocalHamiltonian is a sum of Hermitian blocks, each acting on at most
k qubits of an n-qubit register (qubit 1 is the most significant bit of
the basis index).  Assembly scatters every block into a sparse matrix
with at most m 2^k nonzeros per row and column, so the sparse-access
algorithms apply.

The gap-decision problem (is the ground energy below a or above b,
guided by a vector with ground-space overlap at least delta) reduces to
a singular-value interval decision for (H + 3I)/4, whose eigenvalues
and singular values coincide inside [1/2, 1].  Ground-energy estimation
scans 2r overlapping intervals of width 1/r and returns the midpoint of
the interval the decisions pin down.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .access import SampledVector, SparseMatrix
from .errors import ConfigError, InconsistencyError, ParseError, SizeError
from .sve import HAS_SV, SveProblem, SveResult, decide_singular_interval

__all__ = [
    "LocalTerm",
    "LocalHamiltonian",
    "GlhProblem",
    "GlhDecision",
    "GlhEstimate",
    "assemble_sparse",
    "decide_glh",
    "estimate_ground_energy",
    "ground_overlap",
    "load_hamiltonian",
    "save_hamiltonian",
    "LOW",
    "HIGH",
]

LOW = "LOW"
HIGH = "HIGH"

LOCALITY_CAP = 10       # dense 2^k blocks stop being a desk-scale object here
ASSEMBLE_QUBIT_CAP = 20
DENSE_QUBIT_CAP = 12


@dataclass(frozen=True)
class LocalTerm:
    """Hermitian block on an ordered subset of qubits (1-based indices)."""

    qubits: tuple
    block: np.ndarray

    def __post_init__(self):
        qubits = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "qubits", qubits)
        if len(qubits) == 0 or len(set(qubits)) != len(qubits):
            raise ValueError("qubit subset must be nonempty and distinct")
        if len(qubits) > LOCALITY_CAP:
            raise SizeError(f"term locality {len(qubits)} exceeds cap {LOCALITY_CAP}")
        block = np.asarray(self.block, dtype=complex)
        dim = 2 ** len(qubits)
        if block.shape != (dim, dim):
            raise ValueError(f"block must be {dim}x{dim} for {len(qubits)} qubits")
        if np.abs(block - block.conj().T).max() > 1e-12:
            raise ValueError("block is not Hermitian to 1e-12")
        object.__setattr__(self, "block", block)

    def scaled(self, factor: float) -> "LocalTerm":
        return LocalTerm(self.qubits, self.block * factor)


class LocalHamiltonian:
    """Sum of m local terms on n qubits, each touching at most k qubits."""

    def __init__(self, n: int, k: int, terms):
        if n < 1:
            raise ValueError("need at least one qubit")
        if k < 1 or k > LOCALITY_CAP:
            raise ValueError(f"locality k must lie in [1, {LOCALITY_CAP}]")
        terms = list(terms)
        for t in terms:
            if len(t.qubits) > k:
                raise ValueError(f"term on {t.qubits} exceeds locality {k}")
            if max(t.qubits) > n or min(t.qubits) < 1:
                raise ValueError(f"term qubits {t.qubits} outside register [1, {n}]")
        self.n = n
        self.k = k
        self.terms = tuple(terms)

    @property
    def num_terms(self) -> int:
        return len(self.terms)

    @property
    def dim(self) -> int:
        return 2 ** self.n

    def sparsity_bound(self) -> int:
        return self.num_terms * 2 ** self.k

    def _term_coo(self, term: LocalTerm):
        n = self.n
        q = term.qubits
        j = len(q)
        sub_shifts = [n - qq for qq in q]
        rest = [p for p in range(1, n + 1) if p not in q]
        rest_shifts = [n - p for p in rest]

        t = np.arange(2 ** len(rest), dtype=np.int64)
        base = np.zeros_like(t)
        for b, shift in enumerate(rest_shifts):
            base |= ((t >> (len(rest) - 1 - b)) & 1) << shift

        def spread(local: int) -> int:
            out = 0
            for a in range(j):
                out |= ((local >> (j - 1 - a)) & 1) << sub_shifts[a]
            return out

        empty = np.empty(0, dtype=np.int64)
        rows, cols = [empty], [empty]
        vals = [np.empty(0, dtype=complex)]
        r_idx, c_idx = np.nonzero(term.block)
        for r, c in zip(r_idx, c_idx):
            rows.append(base + spread(int(r)))
            cols.append(base + spread(int(c)))
            vals.append(np.full(base.size, term.block[r, c], dtype=complex))
        return np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)

    def assemble_csr(self) -> sp.csr_matrix:
        """Raw sparse assembly, no norm validation."""
        if not self.terms:
            return sp.csr_matrix((self.dim, self.dim), dtype=complex)
        rows, cols, vals = [], [], []
        for term in self.terms:
            r, c, v = self._term_coo(term)
            rows.append(r)
            cols.append(c)
            vals.append(v)
        coo = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.dim, self.dim))
        csr = coo.tocsr()
        csr.sum_duplicates()
        csr.eliminate_zeros()
        csr.sort_indices()
        return csr

    def to_dense(self) -> np.ndarray:
        if self.n > DENSE_QUBIT_CAP:
            raise SizeError(f"dense assembly capped at n={DENSE_QUBIT_CAP}")
        return self.assemble_csr().toarray()

    def operator_norm(self) -> float:
        """Exact for n <= 12, Lanczos extremal eigenvalues above that."""
        if not self.terms:
            return 0.0
        if self.n <= DENSE_QUBIT_CAP:
            w = np.linalg.eigvalsh(self.to_dense())
            return float(max(abs(w[0]), abs(w[-1])))
        csr = self.assemble_csr()
        hi = spla.eigsh(csr, k=1, which="LA", return_eigenvectors=False)[0]
        lo = spla.eigsh(csr, k=1, which="SA", return_eigenvectors=False)[0]
        return float(max(abs(hi), abs(lo)))


def assemble_sparse(H: LocalHamiltonian, shift: bool = False,
                    cap: int = ASSEMBLE_QUBIT_CAP) -> SparseMatrix:
    """Sparse-access form of H, or of (H + 3I)/4 when ``shift`` is set.

    Validates ||H|| <= 1 and the m 2^k sparsity bound (m 2^k + 1 for the
    shifted form, whose eigenvalues then lie in [1/2, 1]).
    """
    if H.n > cap:
        raise SizeError(f"assembly capped at {cap} qubits, got n={H.n}")
    norm = H.operator_norm()
    if norm > 1.0 + 1e-9:
        raise ValueError(f"operator norm {norm:.6f} exceeds 1")
    csr = H.assemble_csr()
    s = H.sparsity_bound()
    if shift:
        csr = (csr + 3.0 * sp.identity(H.dim, dtype=complex, format="csr")) / 4.0
        csr = csr.tocsr()
        csr.sort_indices()
        s += 1
    return SparseMatrix(csr, s)


def ground_overlap(H: LocalHamiltonian, u) -> float:
    """||Pi_H u|| from a dense eigendecomposition (n <= 12); eigenvalues
    within 1e-9 of the bottom count as ground."""
    if H.n > DENSE_QUBIT_CAP:
        raise SizeError(f"ground overlap needs n <= {DENSE_QUBIT_CAP}")
    u = np.asarray(u, dtype=complex)
    if u.shape != (H.dim,):
        raise ValueError(f"vector must have dimension {H.dim}")
    w, vecs = np.linalg.eigh(H.to_dense())
    cols = vecs[:, w <= w[0] + 1e-9]
    return float(np.linalg.norm(cols.conj().T @ u))


@dataclass
class GlhProblem:
    """Guided local-Hamiltonian instance.

    Decision form carries thresholds (a, b); estimation form carries a
    target precision eps.  The overlap promise ||Pi_H u|| >= delta is
    assumed, not checked.
    """

    hamiltonian: LocalHamiltonian
    guide: SampledVector
    delta: float
    a: float | None = None
    b: float | None = None
    eps: float | None = None

    def __post_init__(self):
        if self.guide.dim != self.hamiltonian.dim:
            raise ConfigError("guide dimension must be 2^n")
        if not 0.0 < self.delta <= 1.0:
            raise ConfigError("delta must lie in (0, 1]")
        if self.guide.zeta > self.delta ** 2 / 56.0:
            raise ConfigError(
                f"guide distortion zeta={self.guide.zeta} exceeds "
                f"delta^2/56={self.delta ** 2 / 56.0}")
        if self.a is not None or self.b is not None:
            if self.a is None or self.b is None:
                raise ConfigError("decision form needs both a and b")
            if not -1.0 <= self.a < self.b <= 1.0:
                raise ConfigError("need -1 <= a < b <= 1")
        if self.eps is not None and not 0.0 < self.eps <= 1.0:
            raise ConfigError("eps must lie in (0, 1]")


@dataclass
class GlhDecision:
    decision: str
    a: float
    b: float
    sve: SveResult


@dataclass
class GlhEstimate:
    value: float
    interval: tuple
    case: str
    outcomes: list
    scan_steps: int
    decisions: list = field(default_factory=list)


def _decide_shifted(shifted: SparseMatrix, guide: SampledVector, a: float,
                    b: float, delta: float, fail_prob: float, seed: int,
                    degree_cap: int) -> GlhDecision:
    problem = SveProblem(matrix=shifted, guide=guide, t1=0.5, t2=(3.0 + a) / 4.0,
                         theta1=0.5, theta2=(b - a) / 4.0, delta=delta)
    sve = decide_singular_interval(problem, fail_prob=fail_prob, seed=seed,
                                   degree_cap=degree_cap)
    decision = LOW if sve.decision == HAS_SV else HIGH
    return GlhDecision(decision=decision, a=a, b=b, sve=sve)


def decide_glh(problem: GlhProblem, fail_prob: float = 0.01, seed: int = 0,
               degree_cap: int = 4096) -> GlhDecision:
    """Decide lambda_H <= a (LOW) versus lambda_H >= b (HIGH).

    Eigenvalues of (H + 3I)/4 equal its singular values and lie in
    [1/2, 1]; lambda_H <= a becomes a singular value in
    [1/2, (3 + a)/4] and the interval decision applies unchanged.
    """
    if problem.a is None or problem.b is None:
        raise ConfigError("decision form requires thresholds a and b")
    shifted = assemble_sparse(problem.hamiltonian, shift=True)
    return _decide_shifted(shifted, problem.guide, problem.a, problem.b,
                           problem.delta, fail_prob, seed, degree_cap)


def estimate_ground_energy(problem: GlhProblem, fail_prob: float = 0.05,
                           seed: int = 0, workers: int = 1,
                           degree_cap: int = 4096) -> GlhEstimate:
    """Estimate lambda_H to within eps by a 2r-step interval scan.

    Step i decides lambda_H <= (i-r-1)/r versus >= (i-r)/r with failure
    budget fail_prob / 2r.  Error-free outcomes are all-LOW, all-HIGH,
    or a block of HIGHs followed by LOWs; anything else raises
    InconsistencyError (retry with a fresh seed).  r = ceil(2 / eps), so
    the concluded interval has width at most eps.
    """
    if problem.eps is None:
        raise ConfigError("estimation form requires a target precision eps")
    r = math.ceil(2.0 / problem.eps)
    steps = 2 * r
    per_step_fail = fail_prob / steps
    seeds = np.random.SeedSequence(seed).spawn(steps)
    shifted = assemble_sparse(problem.hamiltonian, shift=True)

    def run(i: int) -> GlhDecision:
        a_i = (i - r - 1) / r
        b_i = (i - r) / r
        return _decide_shifted(shifted, problem.guide, a_i, b_i, problem.delta,
                               per_step_fail, seeds[i - 1].generate_state(1)[0],
                               degree_cap)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            decisions = list(pool.map(run, range(1, steps + 1)))
    else:
        decisions = [run(i) for i in range(1, steps + 1)]
    outcomes = [d.decision for d in decisions]

    lead_high = 0
    for tok in outcomes:
        if tok == HIGH:
            lead_high += 1
        else:
            break
    if any(tok == HIGH for tok in outcomes[lead_high:]):
        raise InconsistencyError(
            f"scan outcomes are not monotone: {outcomes}; one of the "
            f"{steps} decisions failed, retry with a fresh seed")

    if lead_high == 0:
        case, lo, hi = "a", -1.0, -1.0 + 1.0 / r
    elif lead_high == steps:
        case, lo, hi = "b", 1.0 - 1.0 / r, 1.0
    else:
        i0 = lead_high
        case = "c"
        lo = max(-1.0, (i0 - r - 1) / r)
        hi = min(1.0, (i0 - r + 1) / r)
    return GlhEstimate(value=(lo + hi) / 2.0, interval=(lo, hi), case=case,
                       outcomes=outcomes, scan_steps=steps, decisions=decisions)


# ---------------------------------------------------------------------------
# Text format: header "n k m", then per term a line of 1-based qubit
# indices followed by the 2^j x 2^j block, one row per line as "re im"
# pairs.
# ---------------------------------------------------------------------------


def save_hamiltonian(path, H: LocalHamiltonian):
    with open(path, "w") as fh:
        fh.write(f"{H.n} {H.k} {H.num_terms}\n")
        for term in H.terms:
            fh.write(" ".join(str(q) for q in term.qubits) + "\n")
            for row in term.block:
                fh.write(" ".join(f"{float(z.real)!r} {float(z.imag)!r}"
                                  for z in row) + "\n")


def load_hamiltonian(path) -> LocalHamiltonian:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError("empty hamiltonian file", line=1)
    head = lines[0].split()
    if len(head) != 3:
        raise ParseError("header must be 'n k m'", line=1)
    try:
        n, k, m = (int(x) for x in head)
    except ValueError:
        raise ParseError("header must be three integers", line=1) from None
    terms = []
    ln = 1
    for _ in range(m):
        if ln >= len(lines):
            raise ParseError("unexpected end of file", line=len(lines))
        try:
            qubits = tuple(int(x) for x in lines[ln].split())
        except ValueError:
            raise ParseError("expected qubit indices", line=ln + 1) from None
        if not qubits:
            raise ParseError("empty qubit line", line=ln + 1)
        ln += 1
        dim = 2 ** len(qubits)
        block = np.empty((dim, dim), dtype=complex)
        for r in range(dim):
            if ln >= len(lines):
                raise ParseError("unexpected end of file", line=len(lines))
            parts = lines[ln].split()
            if len(parts) != 2 * dim:
                raise ParseError(
                    f"expected {2 * dim} floats for a block row", line=ln + 1)
            try:
                row = np.array([float(x) for x in parts])
            except ValueError:
                raise ParseError("could not parse block row", line=ln + 1) from None
            block[r] = row[0::2] + 1j * row[1::2]
            ln += 1
        try:
            terms.append(LocalTerm(qubits, block))
        except ValueError as exc:
            raise ParseError(str(exc), line=ln) from exc
    try:
        return LocalHamiltonian(n, k, terms)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
