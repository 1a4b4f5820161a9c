"""Even polynomials and certified threshold-filter construction.

The central object is an even real polynomial P with |P(x)| <= 1 on
[-1, 1] that sits near 1 on a target interval [t1, t2] and near 0 on
[0, t1 - theta1] and [t2 + theta2, 1].  It is assembled from two odd
sign approximations (truncated Chebyshev expansions of an error
function whose steepness is set by the transition width), shifted,
averaged and symmetrized.  Every construction is certified on a grid;
nothing is trusted from the analytic derivation alone.

Polynomials are stored in the Chebyshev basis for numerical stability.
An even polynomial of degree 2d is kept as the coefficients c_r of
P(x) = sum_r c_r T_r(2 x^2 - 1), which evaluates through x^2 only and
is therefore structurally even.  Conversion to monomial coefficients
a_0, a_2, ..., a_{2d} is available but ill-conditioned above degree
~30, and warns accordingly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial.chebyshev import Chebyshev, chebval, cheb2poly, poly2cheb
from scipy.special import erf, erfinv

from .errors import ConstructionError, ParseError

__all__ = [
    "EvenPolynomial",
    "OddPolynomial",
    "ThresholdSpec",
    "ThresholdReport",
    "build_sign_approx",
    "build_threshold",
    "build_threshold_cached",
    "verify_threshold",
    "load_polynomial",
    "save_polynomial",
]

MONOMIAL_DEGREE_LIMIT = 30
CERT_TOLERANCE = 1e-9
DEFAULT_GRID = 10_000
DEFAULT_DEGREE_CAP = 512


def _affine_compose_monomial(coeffs, shift, scale):
    """Coefficients of p(shift + scale * y) given monomial coeffs of p."""
    return Polynomial(coeffs)(Polynomial([shift, scale])).coef


class EvenPolynomial:
    """Even real polynomial P(x) = a_0 + a_2 x^2 + ... + a_{2d} x^{2d}."""

    def __init__(self, cheb_even, monomial_even=None, threshold_spec=None):
        cr = np.atleast_1d(np.asarray(cheb_even, dtype=float))
        if cr.ndim != 1 or cr.size == 0:
            raise ValueError("expected a nonempty coefficient array")
        self._cr = cr.copy()
        self._cr.flags.writeable = False
        self._monomial = None if monomial_even is None else np.asarray(
            monomial_even, dtype=float
        )
        self.threshold_spec = threshold_spec

    @classmethod
    def from_even_coeffs(cls, even_coeffs) -> "EvenPolynomial":
        """Build from monomial coefficients [a_0, a_2, ..., a_{2d}]."""
        a = np.atleast_1d(np.asarray(even_coeffs, dtype=float))
        if a.size == 0:
            raise ValueError("expected at least one coefficient")
        # P(x) = G(x^2); re-expand G on y in [0, 1] in the variable w = 2y - 1.
        g_in_w = _affine_compose_monomial(a, 0.5, 0.5)
        return cls(poly2cheb(g_in_w), monomial_even=a.copy())

    @property
    def degree(self) -> int:
        return 2 * (self._cr.size - 1)

    def cheb_even(self) -> np.ndarray:
        """Coefficients c_r of P(x) = sum_r c_r T_r(2 x^2 - 1)."""
        return self._cr.copy()

    def monomial_even(self) -> np.ndarray:
        """Monomial coefficients [a_0, a_2, ..., a_{2d}].

        The Chebyshev-to-monomial change of basis loses roughly one digit
        per few degrees; above degree 30 the result is unreliable and a
        warning is issued.
        """
        if self._monomial is None:
            if self.degree > MONOMIAL_DEGREE_LIMIT:
                warnings.warn(
                    f"monomial conversion at degree {self.degree} is "
                    f"ill-conditioned (reliable only up to degree "
                    f"{MONOMIAL_DEGREE_LIMIT})",
                    stacklevel=2,
                )
            h = cheb2poly(self._cr)  # G as monomials in w = 2y - 1
            self._monomial = _affine_compose_monomial(h, -1.0, 2.0)
        return self._monomial.copy()

    def has_monomial(self) -> bool:
        return self._monomial is not None

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = chebval(2.0 * x * x - 1.0, self._cr)
        return float(out) if out.ndim == 0 else out

    def __repr__(self):
        return f"EvenPolynomial(degree={self.degree})"


class OddPolynomial:
    """Odd real polynomial stored as a Chebyshev series on [-2, 2]."""

    def __init__(self, cheb_coef):
        c = np.atleast_1d(np.asarray(cheb_coef, dtype=float)).copy()
        c[0::2] = 0.0  # structural oddness
        self._c = c
        self._c.flags.writeable = False
        self._monomial = None

    @property
    def degree(self) -> int:
        nz = np.flatnonzero(self._c)
        return int(nz[-1]) if nz.size else 1

    def cheb(self) -> Chebyshev:
        return Chebyshev(self._c, domain=[-2.0, 2.0])

    def odd_coeffs(self) -> np.ndarray:
        """Monomial coefficients [b_1, b_3, ...]; warns above degree 30."""
        if self._monomial is None:
            if self.degree > MONOMIAL_DEGREE_LIMIT:
                warnings.warn(
                    f"monomial conversion at degree {self.degree} is "
                    f"ill-conditioned",
                    stacklevel=2,
                )
            # P'(x) = H(x/2) with H the series in the mapped variable.
            h = cheb2poly(self._c)
            full = h / (2.0 ** np.arange(h.size))
            self._monomial = full[1::2].copy()
        return self._monomial.copy()

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = chebval(0.5 * x, self._c)
        return float(out) if out.ndim == 0 else out

    def __repr__(self):
        return f"OddPolynomial(degree={self.degree})"


@dataclass(frozen=True)
class ThresholdSpec:
    """Target boxes for a threshold polynomial.

    Requires theta1 <= t1 <= t2 <= 1 - theta2 and 0 < chi < 1.  The
    degenerate case t1 == t2 (a single-point plateau) is allowed; the
    interval-scan reduction for ground-energy estimation produces it at
    its leftmost step.
    """

    t1: float
    t2: float
    theta1: float
    theta2: float
    chi: float

    def __post_init__(self):
        if not (0.0 < self.chi < 1.0):
            raise ValueError("chi must lie in (0, 1)")
        if self.theta1 <= 0 or self.theta2 <= 0:
            raise ValueError("theta1 and theta2 must be positive")
        if not (self.theta1 <= self.t1 <= self.t2 <= 1.0 - self.theta2):
            raise ValueError(
                "need theta1 <= t1 <= t2 <= 1 - theta2, got "
                f"t1={self.t1}, t2={self.t2}, theta1={self.theta1}, "
                f"theta2={self.theta2}"
            )


@dataclass
class ThresholdReport:
    """Signed worst-case box violations; negative values mean margin."""

    bound_violation: float      # max |P| - 1 on [-1, 1]
    plateau_violation: float    # max deviation below 1-chi / above 1 on [t1, t2]
    outer_violation: float      # max deviation above chi / below 0 outside
    tolerance: float = CERT_TOLERANCE

    @property
    def passed(self) -> bool:
        worst = max(self.bound_violation, self.plateau_violation,
                    self.outer_violation)
        return worst <= self.tolerance


def _certify_sign_boxes(poly_cheb, eta, xi, grid):
    xs = np.linspace(-2.0, 2.0, grid)
    vals = poly_cheb(xs)
    sup = np.abs(vals).max() - 1.0
    hi = vals[xs >= eta]
    lo = vals[xs <= -eta]
    plateau = max((1.0 - xi) - hi.min(initial=1.0), hi.max(initial=0.0) - 1.0,
                  lo.max(initial=-1.0) - (-1.0 + xi), (-1.0) - lo.min(initial=0.0))
    return max(sup, plateau)


def build_sign_approx(eta: float, xi: float, degree_cap: int = DEFAULT_DEGREE_CAP,
                      grid: int = DEFAULT_GRID) -> OddPolynomial:
    """Odd polynomial close to sign(x) away from the origin.

    Returns P' with P'(x) in [-1, 1] on [-2, 2], in [1-xi, 1] on [eta, 2]
    and in [-1, -1+xi] on [-2, -eta], certified on a grid.  Built as a
    truncated Chebyshev expansion of erf(k x) with k set from eta, with
    the degree doubled on certification failure up to ``degree_cap``.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    if not (0.0 < xi < 0.5):
        raise ValueError("xi must lie in (0, 1/2)")
    tau = xi / 3.0
    k = float(erfinv(1.0 - tau)) / eta
    n = int(math.ceil(3.2 * k * math.sqrt(math.log(1.0 / xi)))) + 16
    n |= 1
    attempts = []
    while True:
        n_try = min(n, degree_cap)
        ch = Chebyshev.interpolate(lambda x: erf(k * x), deg=n_try,
                                   domain=[-2.0, 2.0])
        coef = ch.coef.copy()
        coef[0::2] = 0.0
        cand = Chebyshev(coef, domain=[-2.0, 2.0])
        xs = np.linspace(-2.0, 2.0, grid)
        sup = np.abs(cand(xs)).max()
        if sup > 1.0:
            coef = coef / (sup * (1.0 + 1e-12))
            cand = Chebyshev(coef, domain=[-2.0, 2.0])
        violation = _certify_sign_boxes(cand, eta, xi, grid)
        attempts.append((n_try, violation))
        if violation <= CERT_TOLERANCE:
            return OddPolynomial(coef)
        if n_try >= degree_cap:
            raise ConstructionError(
                f"sign approximation failed certification at the degree cap "
                f"{degree_cap} (eta={eta}, xi={xi}; attempts={attempts})"
            )
        n = 2 * n_try


def _symmetrize(q: Chebyshev, xi: float) -> np.ndarray:
    """Coefficients c_r of (Q(x) + Q(-x)) / (1 + xi) as T_r(2x^2-1)."""
    coef = q.coef
    signs = np.where(np.arange(coef.size) % 2 == 0, 1.0, -1.0)
    p = (coef + signs * coef) / (1.0 + xi)
    return p[0::2].copy()


def _combine(p1: OddPolynomial, p2: OddPolynomial, spec: ThresholdSpec,
             xi: float) -> Chebyshev:
    """The intermediate Q(x) = (1-xi)(P1'(x-t1+th1/2) + P2'(-x+t2+th2/2))/2 + xi
    re-expanded as a Chebyshev series on [-1, 1]."""
    c1 = spec.t1 - spec.theta1 / 2.0
    c2 = spec.t2 + spec.theta2 / 2.0
    left = Chebyshev(p1._c, domain=[c1 - 2.0, c1 + 2.0]).convert(domain=[-1.0, 1.0])
    right = Chebyshev(p2._c, domain=[c2 + 2.0, c2 - 2.0]).convert(domain=[-1.0, 1.0])
    return (1.0 - xi) * (left + right) / 2.0 + xi


def verify_threshold(P: EvenPolynomial, spec: ThresholdSpec,
                     grid: int = DEFAULT_GRID) -> ThresholdReport:
    """Grid certificate for the threshold boxes.

    Each region is sampled uniformly with ``grid`` points; the report
    carries the signed worst violation per region and passes when all
    are within the 1e-9 tolerance.
    """
    if grid < 1000:
        raise ValueError("grid must have at least 1000 points")
    xs = np.linspace(-1.0, 1.0, grid)
    bound = float(np.abs(P(xs)).max() - 1.0)

    plateau_x = np.linspace(spec.t1, spec.t2, grid)
    pv = P(plateau_x)
    plateau = float(max((1.0 - spec.chi) - pv.min(), pv.max() - 1.0))

    outer_parts = []
    if spec.t1 - spec.theta1 >= 0.0:
        outer_parts.append(np.linspace(0.0, spec.t1 - spec.theta1, grid))
    if spec.t2 + spec.theta2 <= 1.0:
        outer_parts.append(np.linspace(spec.t2 + spec.theta2, 1.0, grid))
    outer = -np.inf
    for part in outer_parts:
        ov = P(part)
        outer = max(outer, float(ov.max() - spec.chi), float(-ov.min()))
    return ThresholdReport(bound, plateau, outer)


def build_threshold(spec: ThresholdSpec, degree_cap: int = DEFAULT_DEGREE_CAP,
                    grid: int = DEFAULT_GRID) -> EvenPolynomial:
    """Certified even threshold polynomial for ``spec``.

    Two odd sign approximations (transition widths theta1/2 and theta2/2)
    are shifted to the interval edges, averaged and symmetrized, then
    sup-normalized over [-1, 1].  The internal sign-approximation
    accuracy starts at chi/3 and is tightened if the final certificate
    fails.  Raises ConstructionError when no attempt certifies.
    """
    last_report = None
    xi = spec.chi / 3.0
    for _ in range(4):
        eta1 = spec.theta1 / 2.0
        eta2 = spec.theta2 / 2.0
        p1 = build_sign_approx(eta1, xi, degree_cap=degree_cap, grid=grid)
        p2 = p1 if eta2 == eta1 else build_sign_approx(
            eta2, xi, degree_cap=degree_cap, grid=grid)
        q = _combine(p1, p2, spec, xi)
        cr = _symmetrize(q, xi)
        xs = np.linspace(0.0, 1.0, grid)  # even: [0,1] determines the sup
        sup = np.abs(chebval(2.0 * xs * xs - 1.0, cr)).max()
        if sup > 1.0:
            cr = cr / (sup * (1.0 + 1e-12))
        candidate = EvenPolynomial(cr, threshold_spec=spec)
        report = verify_threshold(candidate, spec, grid=grid)
        if report.passed:
            return candidate
        last_report = report
        xi /= 2.0
    raise ConstructionError(
        f"threshold polynomial failed certification for {spec}: {last_report}"
    )


@lru_cache(maxsize=64)
def _threshold_cache(t1, t2, theta1, theta2, chi, degree_cap, grid):
    return build_threshold(ThresholdSpec(t1, t2, theta1, theta2, chi),
                           degree_cap=degree_cap, grid=grid)


def build_threshold_cached(spec: ThresholdSpec,
                           degree_cap: int = DEFAULT_DEGREE_CAP,
                           grid: int = DEFAULT_GRID) -> EvenPolynomial:
    """Memoized build_threshold; repeated decision scans reuse filters."""
    return _threshold_cache(spec.t1, spec.t2, spec.theta1, spec.theta2,
                            spec.chi, degree_cap, grid)


# ---------------------------------------------------------------------------
# Text format: header "EVEN 2d", then the 2d+1 monomial coefficients
# a_0 ... a_{2d} one per line (odd positions must be zero).
# ---------------------------------------------------------------------------


def save_polynomial(path, P: EvenPolynomial):
    a_even = P.monomial_even()
    full = np.zeros(2 * (a_even.size - 1) + 1)
    full[0::2] = a_even
    with open(path, "w") as fh:
        fh.write(f"EVEN {full.size - 1}\n")
        for a in full:
            fh.write(f"{float(a)!r}\n")


def load_polynomial(path) -> EvenPolynomial:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError("empty polynomial file", line=1)
    head = lines[0].split()
    if len(head) != 2 or head[0] != "EVEN":
        raise ParseError("header must be 'EVEN <degree>'", line=1)
    try:
        deg = int(head[1])
    except ValueError:
        raise ParseError("degree must be an integer", line=1) from None
    if deg % 2 != 0 or deg < 0:
        raise ParseError("degree must be even and nonnegative", line=1)
    if len(lines) < deg + 2:
        raise ParseError(f"expected {deg + 1} coefficient lines", line=len(lines))
    coeffs = np.empty(deg + 1)
    for k in range(deg + 1):
        try:
            coeffs[k] = float(lines[k + 1])
        except ValueError:
            raise ParseError("could not parse coefficient", line=k + 2) from None
    if np.any(coeffs[1::2] != 0.0):
        bad = 1 + 2 * int(np.flatnonzero(coeffs[1::2])[0])
        raise ParseError(f"odd coefficient a_{bad} must be zero", line=bad + 2)
    return EvenPolynomial.from_even_coeffs(coeffs[0::2])
