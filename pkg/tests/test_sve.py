import numpy as np
import pytest

from svtkit.access import SparseMatrix, distorted_sampler, exact_sampler
from svtkit.errors import ConfigError
from svtkit.oracle import exact_bilinear
from svtkit.polynomial import build_threshold_cached
from svtkit.rand import planted_sve_instance, random_unit_vector
from svtkit.sve import HAS_SV, NO_SV, SveProblem, decide_singular_interval


def _problem(A, guide, delta=0.9, t1=0.5, t2=0.7):
    return SveProblem(matrix=A, guide=exact_sampler(guide), t1=t1, t2=t2,
                      theta1=0.1, theta2=0.1, delta=delta)


def test_has_sv_diagonal():
    A = SparseMatrix.from_dense(np.diag([0.6, 0.1]))
    res = decide_singular_interval(_problem(A, np.eye(2)[0]), seed=1)
    assert res.decision == HAS_SV


def test_no_sv_diagonal():
    A = SparseMatrix.from_dense(np.diag([0.2, 0.1]))
    res = decide_singular_interval(_problem(A, np.eye(2)[0]), seed=2)
    assert res.decision == NO_SV


def test_decision_threshold_margins():
    # the proof bounds 2 delta^2/3 and delta^2/3 sit at least eps = delta^2/7
    # away from the midpoint cut delta^2/2
    for delta in (0.3, 0.6, 1.0):
        gap_hi = 2 * delta ** 2 / 3 - delta ** 2 / 2
        gap_lo = delta ** 2 / 2 - delta ** 2 / 3
        assert gap_hi >= delta ** 2 / 7 - 1e-15
        assert gap_lo >= delta ** 2 / 7 - 1e-15


def test_planted_instances_decided_and_separated(rng):
    t1, t2, theta, delta = 0.5, 0.7, 0.1, 0.6
    correct = 0
    for k in range(10):
        case = "inside" if k % 2 == 0 else "outside"
        A, guide, sig = planted_sve_instance(rng, 32, t1, t2, theta, theta,
                                             delta, case)
        problem = SveProblem(matrix=A, guide=exact_sampler(guide), t1=t1,
                             t2=t2, theta1=theta, theta2=theta, delta=delta)
        # deterministic heart of the proof, before any sampling
        P = build_threshold_cached(problem.threshold_spec())
        exact = exact_bilinear(A.to_dense(), P, guide, guide).real
        if case == "inside":
            assert exact >= 2 * delta ** 2 / 3 - 1e-9
        else:
            assert exact <= delta ** 2 / 3 + 1e-9
        res = decide_singular_interval(problem, fail_prob=0.01, seed=100 + k)
        want = HAS_SV if case == "inside" else NO_SV
        correct += res.decision == want
        assert abs(res.estimate.imag) < problem.eps
    assert correct == 10


def test_overlap_monotonicity(rng):
    # replacing noise mass with in-subspace mass never lowers the
    # deterministic value below a correct HAS_SV level
    t1, t2, theta = 0.5, 0.7, 0.1
    A, guide, sig = planted_sve_instance(rng, 24, t1, t2, theta, theta,
                                         0.5, "inside")
    problem = SveProblem(matrix=A, guide=exact_sampler(guide), t1=t1, t2=t2,
                         theta1=theta, theta2=theta, delta=0.5)
    P = build_threshold_cached(problem.threshold_spec())
    from svtkit.oracle import exact_projector
    proj = exact_projector(A.to_dense(), t1, t2)
    inside = proj @ guide
    inside /= np.linalg.norm(inside)
    prev = exact_bilinear(A.to_dense(), P, guide, guide).real
    for delta2 in (0.7, 0.9, 1.0):
        mixed = delta2 * inside + np.sqrt(1 - delta2 ** 2) * (guide - proj @ guide) \
            / max(np.linalg.norm(guide - proj @ guide), 1e-30)
        val = exact_bilinear(A.to_dense(), P, mixed, mixed).real
        assert val >= prev - 1e-9
        prev = val


def test_zeta_cap_enforced(rng):
    A, guide, _ = planted_sve_instance(rng, 16, 0.5, 0.7, 0.1, 0.1, 0.5,
                                       "inside")
    noisy = distorted_sampler(guide, 0.1, seed=1)  # 0.1 > delta^2/56
    with pytest.raises(ConfigError, match="zeta"):
        SveProblem(matrix=A, guide=noisy, t1=0.5, t2=0.7, theta1=0.1,
                   theta2=0.1, delta=0.5)


def test_interval_validation(rng):
    A, guide, _ = planted_sve_instance(rng, 16, 0.5, 0.7, 0.1, 0.1, 0.5,
                                       "inside")
    g = exact_sampler(guide)
    with pytest.raises(ConfigError):
        SveProblem(matrix=A, guide=g, t1=0.7, t2=0.5, theta1=0.1, theta2=0.1,
                   delta=0.5)
    with pytest.raises(ConfigError):
        SveProblem(matrix=A, guide=g, t1=0.5, t2=0.95, theta1=0.1,
                   theta2=0.1, delta=0.5)
    with pytest.raises(ConfigError):
        SveProblem(matrix=A, guide=g, t1=0.5, t2=0.7, theta1=0.1, theta2=0.1,
                   delta=1.5)


def test_result_reports_degree_and_samples(rng):
    A, guide, _ = planted_sve_instance(rng, 16, 0.5, 0.7, 0.1, 0.1, 0.6,
                                       "inside")
    problem = SveProblem(matrix=A, guide=exact_sampler(guide), t1=0.5, t2=0.7,
                         theta1=0.1, theta2=0.1, delta=0.6)
    res = decide_singular_interval(problem, seed=3)
    assert res.degree > 0
    assert res.estimator.total_samples == res.estimator.samples * res.estimator.batches
    assert res.decision_threshold == 0.6 ** 2 / 2
