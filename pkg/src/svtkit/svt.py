"""Per-entry SVT evaluation and sampling-based bilinear-form estimation.

Deterministic core: the i-th entry of B1 ... Br u for a chain of sparse
matrices is computed by recursing over row nonzeros, memoizing
(chain depth, index) pairs, at cost O(s^r) row fetches.  The entry of
P(sqrt(A-dagger A)) u follows from the even-coefficient expansion
a_0 u + a_2 (A-dagger A) u + ... + a_{2d} (A-dagger A)^d u.

Monomial coefficients are numerically unusable above degree ~30, but
threshold filters routinely need degree in the hundreds, so entry
evaluation dispatches: low-degree polynomials with monomial
coefficients go through the sparse chain recursion above; everything
else is evaluated through the identity T_{2r}(x) = T_r(2 x^2 - 1) by a
three-term Chebyshev recurrence in the Hermitian contraction
S = 2 A-dagger A - I, whose spectrum lies in [-1, 1].  Both paths
compute the same operator polynomial.

Randomized layer: a single sample draws j from the sampling-access
distribution of v and returns w_j m^2 / v_j with w = P(sqrt(A^dag A))u.
Its mean sits within 7 zeta of v-dagger w and each component has
variance at most (1 + 7 zeta)^2.  The estimator takes the median over
batches of sample means, separately for real and imaginary parts.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .access import QueryVector, SampledVector, SparseMatrix
from .errors import ConfigError, InvalidSamplerError, ShapeError
from .polynomial import MONOMIAL_DEGREE_LIMIT, EvenPolynomial

__all__ = [
    "QueryCounter",
    "EstimatorConfig",
    "EstimateResult",
    "chain_entry",
    "svt_entry",
    "svt_entries",
    "single_sample",
    "sample_values",
    "estimate_bilinear",
    "min_sample_count",
    "min_batch_count",
]


@dataclass
class QueryCounter:
    """Counts matrix access cost: whole-row fetches and per-entry probes
    (a row with ell nonzeros costs min(ell + 1, s) probes through the
    rank-indexed interface)."""

    row_fetches: int = 0
    entry_probes: int = 0

    def account_row(self, found: int, s: int):
        self.row_fetches += 1
        self.entry_probes += min(found + 1, s)


def _check_chain(matrices, u):
    if not matrices:
        raise ShapeError("empty matrix chain")
    for a, b in zip(matrices, matrices[1:]):
        if a.ncols != b.nrows:
            raise ShapeError(
                f"chain mismatch: {a.ncols} columns feed {b.nrows} rows")
    if matrices[-1].ncols != u.dim:
        raise ShapeError(
            f"chain tail has {matrices[-1].ncols} columns, vector has {u.dim}")


def chain_entry(matrices, u: QueryVector, i: int, memo: bool = True,
                counter: QueryCounter | None = None) -> complex:
    """i-th entry (1-based) of B1 B2 ... Br u for s-sparse B's.

    Recurses over the nonzeros of the relevant row at each level;
    ``memo=False`` re-explores shared indices exactly as the plain
    recursion would (useful only for tiny chains).
    """
    _check_chain(matrices, u)
    if not 1 <= i <= matrices[0].nrows:
        raise IndexError(f"index {i} out of range [1, {matrices[0].nrows}]")
    u_arr = u.dense()
    table: dict | None = {} if memo else None

    def value(level: int, idx: int) -> complex:
        # idx is 0-based; level counts matrices still to apply from position level.
        if level == len(matrices):
            return u_arr[idx]
        if table is not None:
            got = table.get((level, idx))
            if got is not None:
                return got
        mat = matrices[level]
        cols, vals = mat.row_nonzeros(idx)
        if counter is not None:
            counter.account_row(len(cols), mat.s)
        acc = 0.0 + 0.0j
        for c, v in zip(cols, vals):
            acc += v * value(level + 1, int(c))
        if table is not None:
            table[(level, idx)] = acc
        return acc

    return complex(value(0, i - 1))


def _contraction(A: SparseMatrix) -> sp.csr_matrix:
    """S = 2 A-dagger A - I, Hermitian with spectrum in [-1, 1] when ||A|| <= 1."""
    csr = A.csr()
    gram = (csr.conj().T @ csr).tocsr()
    n = A.ncols
    return (2.0 * gram - sp.identity(n, dtype=complex, format="csr")).tocsr()


def _cheb_apply(A: SparseMatrix, u_arr: np.ndarray, P: EvenPolynomial,
                counter: QueryCounter | None = None) -> np.ndarray:
    """P(sqrt(A-dagger A)) u via the T_r(2 A-dagger A - I) recurrence."""
    cr = P.cheb_even()
    S = _contraction(A)
    if counter is not None:
        # each recurrence step reads every stored entry of S once
        counter.row_fetches += (cr.size - 1) * S.shape[0]
        counter.entry_probes += (cr.size - 1) * S.nnz
    y = cr[0] * u_arr
    if cr.size == 1:
        return y
    prev = u_arr
    cur = S @ u_arr
    y = y + cr[1] * cur
    for r in range(2, cr.size):
        prev, cur = cur, 2.0 * (S @ cur) - prev
        y = y + cr[r] * cur
    return y


def svt_entry(A: SparseMatrix, u: QueryVector, P: EvenPolynomial, i: int,
              counter: QueryCounter | None = None) -> complex:
    """i-th entry of P(sqrt(A-dagger A)) u.

    Low-degree polynomials with monomial coefficients use the sparse
    chain recursion on [A-dagger, A] pairs with a memo shared across the
    powers (keyed on chain depth and index).  Higher degrees use the
    Chebyshev recurrence; values agree to machine precision.
    """
    if A.ncols != u.dim:
        raise ShapeError(f"matrix has {A.ncols} columns, vector has {u.dim}")
    if not 1 <= i <= A.ncols:
        raise IndexError(f"index {i} out of range [1, {A.ncols}]")
    if P.has_monomial() and P.degree <= MONOMIAL_DEGREE_LIMIT:
        return _svt_entry_monomial(A, u, P, i, counter)
    return complex(_cheb_apply(A, u.dense(), P, counter)[i - 1])


def _svt_entry_monomial(A, u, P, i, counter=None) -> complex:
    a = P.monomial_even()
    d = a.size - 1
    u_arr = u.dense()
    adj = A.adjoint()
    table: dict = {}

    def value(depth: int, idx: int) -> complex:
        # depth = number of chain matrices still to apply; the alternating
        # suffix of [Adag, A] * r starts with A at odd depth, Adag at even.
        if depth == 0:
            return u_arr[idx]
        got = table.get((depth, idx))
        if got is not None:
            return got
        mat = A if depth % 2 == 1 else adj
        cols, vals = mat.row_nonzeros(idx)
        if counter is not None:
            counter.account_row(len(cols), mat.s)
        acc = 0.0 + 0.0j
        for c, v in zip(cols, vals):
            acc += v * value(depth - 1, int(c))
        table[(depth, idx)] = acc
        return acc

    total = a[0] * u_arr[i - 1]
    for r in range(1, d + 1):
        if a[r] != 0.0:
            total = total + a[r] * value(2 * r, i - 1)
    return complex(total)


def svt_entries(A: SparseMatrix, u: QueryVector, P: EvenPolynomial,
                indices, counter: QueryCounter | None = None) -> np.ndarray:
    """Entries of P(sqrt(A-dagger A)) u at several 1-based indices.

    Shares one Chebyshev recurrence across all requested entries, which
    is what the sampling estimator needs when the same index recurs.
    """
    indices = np.asarray(indices, dtype=np.int64)
    if indices.size == 0:
        return np.empty(0, dtype=complex)
    if indices.min() < 1 or indices.max() > A.ncols:
        raise IndexError("entry index out of range")
    w = _cheb_apply(A, u.dense(), P, counter)
    return w[indices - 1]


def min_sample_count(eps: float, zeta: float) -> int:
    """Smallest batch size making the Chebyshev failure bound
    4 (1 + 7 zeta)^2 / (r (eps - 7 zeta)^2) at most 1/4."""
    if 7.0 * zeta >= eps:
        raise ConfigError(f"zeta={zeta} too large for precision eps={eps}")
    return math.ceil(16.0 * (1.0 + 7.0 * zeta) ** 2 / (eps - 7.0 * zeta) ** 2)


def min_batch_count(fail_prob: float) -> int:
    """Median repetitions boosting per-batch success 3/4 to 1 - fail_prob."""
    return max(1, math.ceil(18.0 * math.log(1.0 / fail_prob)))


@dataclass(frozen=True)
class EstimatorConfig:
    """Sampling plan for the bilinear estimator.

    ``samples`` is the per-batch count r, ``batches`` the median
    repetitions K; both must clear the bounds implied by (eps, zeta,
    fail_prob).
    """

    eps: float
    fail_prob: float
    samples: int
    batches: int
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.eps <= 1.0:
            raise ConfigError("eps must lie in (0, 1]")
        if not 0.0 < self.fail_prob < 1.0:
            raise ConfigError("fail_prob must lie in (0, 1)")
        if self.samples < 1 or self.batches < 1:
            raise ConfigError("samples and batches must be positive")

    @classmethod
    def for_target(cls, eps: float, fail_prob: float, zeta: float = 0.0,
                   seed: int = 0) -> "EstimatorConfig":
        if zeta > eps / 8.0:
            raise ConfigError(f"need zeta <= eps/8, got zeta={zeta}, eps={eps}")
        return cls(eps=eps, fail_prob=fail_prob,
                   samples=min_sample_count(eps, zeta),
                   batches=min_batch_count(fail_prob), seed=seed)


@dataclass
class EstimateResult:
    value: complex
    eps: float
    fail_prob: float
    samples: int
    batches: int
    total_samples: int
    unique_indices: int
    degree: int
    counter: QueryCounter = field(default_factory=QueryCounter)
    elapsed_s: float = 0.0


def single_sample(A: SparseMatrix, u: QueryVector, v: SampledVector,
                  P: EvenPolynomial, rng: np.random.Generator) -> complex:
    """One draw of X = w_j m^2 / v_j with j from v's sampler.

    The division uses the sampled entry itself, not its conjugate:
    m^2 p(j) / v_j reduces to conj(v_j) at zeta = 0, which is what makes
    E[X] track v-dagger w.
    """
    j = v.sample(rng)
    vj = v.entry(j)
    if vj == 0:
        raise InvalidSamplerError(f"sampler emitted index {j} with zero entry")
    w_j = svt_entry(A, u, P, j)
    return w_j * (v.m ** 2) / vj


def sample_values(A: SparseMatrix, u: QueryVector, v: SampledVector,
                  P: EvenPolynomial, rng: np.random.Generator,
                  count: int) -> np.ndarray:
    """``count`` independent single-sample draws, vectorized.

    Distributionally identical to repeated ``single_sample`` calls: the
    entry values w_j are deterministic in j, so they are computed once
    per distinct sampled index.
    """
    idx = v.sample_many(rng, count)
    uniq, inverse = np.unique(idx, return_inverse=True)
    v_ent = v.base.dense()[uniq - 1]
    if np.any(v_ent == 0):
        raise InvalidSamplerError("sampler emitted an index with zero entry")
    w = svt_entries(A, u, P, uniq)
    per_index = w * (v.m ** 2) / v_ent
    return per_index[inverse]


def _validate_estimate_inputs(A, u, v, P, cfg):
    if A.ncols != u.dim or A.ncols != v.dim:
        raise ShapeError("matrix and vectors have incompatible dimensions")
    if v.zeta > cfg.eps / 8.0:
        raise ConfigError(
            f"sampling distortion zeta={v.zeta} exceeds eps/8={cfg.eps / 8.0}")
    if cfg.samples < min_sample_count(cfg.eps, v.zeta):
        raise ConfigError(
            f"config has r={cfg.samples} samples, need at least "
            f"{min_sample_count(cfg.eps, v.zeta)}")
    if u.norm() > 1.0 + 1e-9 or v.base.norm() > 1.0 + 1e-9:
        raise ConfigError("vectors must have norm at most 1")
    xs = np.linspace(-1.0, 1.0, 1001)
    if np.abs(P(xs)).max() > 1.0 + 1e-9:
        raise ConfigError("polynomial must satisfy |P| <= 1 on [-1, 1]")


def estimate_bilinear(A: SparseMatrix, u: QueryVector, v: SampledVector,
                      P: EvenPolynomial, cfg: EstimatorConfig) -> EstimateResult:
    """Estimate v-dagger P(sqrt(A-dagger A)) u to within cfg.eps.

    Draws cfg.batches independent batches of cfg.samples single samples
    (per-batch RNG streams spawned from cfg.seed, so the result does not
    depend on execution order), averages within batches and takes the
    median across batches separately for real and imaginary parts.
    ||A|| <= 1 is assumed, not checked.
    """
    t0 = time.perf_counter()
    _validate_estimate_inputs(A, u, v, P, cfg)
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.batches)
    idx = np.empty((cfg.batches, cfg.samples), dtype=np.int64)
    for k, child in enumerate(children):
        idx[k] = v.sample_many(np.random.default_rng(child), cfg.samples)

    uniq, inverse = np.unique(idx.ravel(), return_inverse=True)
    v_ent = v.base.dense()[uniq - 1]
    if np.any(v_ent == 0):
        raise InvalidSamplerError("sampler emitted an index with zero entry")
    counter = QueryCounter()
    w = svt_entries(A, u, P, uniq, counter=counter)
    per_index = w * (v.m ** 2) / v_ent
    samples = per_index[inverse].reshape(cfg.batches, cfg.samples)
    means = samples.mean(axis=1)
    z = complex(np.median(means.real), np.median(means.imag))
    return EstimateResult(
        value=z, eps=cfg.eps, fail_prob=cfg.fail_prob, samples=cfg.samples,
        batches=cfg.batches, total_samples=cfg.batches * cfg.samples,
        unique_indices=int(uniq.size), degree=P.degree, counter=counter,
        elapsed_s=time.perf_counter() - t0)
