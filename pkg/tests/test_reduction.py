from fractions import Fraction

import mpmath
import pytest

from pellnarayana.certreal import CertReal, constant
from pellnarayana.errors import EpsilonNeverPositive
from pellnarayana.linforms import index_bounds, replay_large_k_bound
from oracles import mp_convergents, nearest_dist, oracle_reduce, reduction_soundness
from pellnarayana.reduction import (
    LARGE_K_A,
    ReductionInstance,
    dujella_petho,
    epsilon_at,
    large_k_chain,
    large_k_instance,
    small_k_instance,
    small_k_reduce,
)


def test_sqrt2_example_against_oracle():
    mpmath.mp.dps = 50
    inst = ReductionInstance(
        tau=lambda p: CertReal.exact(2, p).sqrt(),
        mu=constant(Fraction(1, 2)),
        A=constant(10),
        C=constant(2),
        M=10,
    )
    out = dujella_petho(inst)
    index, q, eps, t = oracle_reduce(mpmath.sqrt(2), mpmath.mpf("0.5"), 10, 2, 10)
    assert (out.convergent_index, out.q) == (index, q) == (6, 169)
    assert out.attempts == 2  # q = 70 comes first and has eps < 0
    assert abs(out.epsilon.mid_float() - float(eps)) < 1e-12
    assert abs(out.t_bound.mid_float() - float(t)) < 1e-12
    assert abs(out.t_bound.mid_float() - 11.7844702753) < 1e-9
    assert out.t_max == 11


def test_epsilon_at_arbitrary_q_matches_oracle():
    mpmath.mp.dps = 50
    inst = ReductionInstance(lambda p: CertReal.exact(2, p).sqrt(), constant(Fraction(1, 2)),
                             constant(10), constant(2), M=10)
    for q in (70, 169, 1000, 12345):
        ref = nearest_dist(mpmath.mpf(q) / 2) - 10 * nearest_dist(q * mpmath.sqrt(2))
        assert abs(epsilon_at(inst, q, 256).mid_float() - float(ref)) < 1e-12
    assert epsilon_at(inst, 70, 256) < 0


def test_zero_shift_never_gives_positive_epsilon():
    inst = ReductionInstance(
        tau=lambda p: CertReal.exact(2, p).sqrt(),
        mu=constant(0),
        A=constant(10),
        C=constant(2),
        M=10,
    )
    with pytest.raises(EpsilonNeverPositive):
        dujella_petho(inst, budget=3)


def test_instance_rejects_nonpositive_M():
    with pytest.raises(ValueError):
        ReductionInstance(constant(1), constant(0), constant(1), constant(2), M=0)


def test_soundness_against_exhaustive_enumeration():
    tested, enumerated = reduction_soundness(20240917, 160)
    assert tested >= 100 and enumerated >= 80


def _mp_small_k(k):
    mpmath.mp.dps = 120
    gamma = mpmath.findroot(lambda x: x**k - 2 * x ** (k - 1) - sum(x**j for j in range(k - 1)), 2.6)
    alpha = mpmath.findroot(lambda x: x**3 - x**2 - 1, 1.46)
    g = (gamma - 1) / ((k + 1) * gamma**2 - 3 * k * gamma + k - 1)
    c = 1 / (alpha**3 + 2)
    return mpmath.log(gamma) / mpmath.log(alpha), mpmath.log(g / c) / mpmath.log(alpha), alpha


@pytest.mark.parametrize("k", [2, 3, 4, 11, 60])
def test_small_k_reduction_matches_mpmath(k):
    out = small_k_reduce(k)
    M, _ = index_bounds(k)
    assert out.M == M and out.q > 6 * M and out.epsilon > 0
    tau, mu, alpha = _mp_small_k(k)
    index, q, eps, t = oracle_reduce(tau, mu, mpmath.mpf("12.1"), alpha, M)
    assert (out.convergent_index, out.q) == (index, q)
    assert abs(out.epsilon.mid_float() - float(eps)) < 1e-10
    assert abs(out.t_bound.mid_float() - float(t)) < 1e-8
    assert out.t_max <= 329


def test_small_k_integer_shift_does_not_change_epsilon():
    # mu is only defined up to an integer; ||mu q|| is unaffected
    base = small_k_instance(5)
    shifted = ReductionInstance(base.tau, lambda p: base.mu(p) + 1, base.A, base.C, base.M)
    a, b = dujella_petho(base), dujella_petho(shifted)
    assert a.q == b.q and a.epsilon.overlaps(b.epsilon)


def test_small_k_rejects_out_of_range():
    with pytest.raises(ValueError):
        small_k_instance(361)


def test_large_k_stage_one_first_candidate_has_negative_epsilon():
    mpmath.mp.dps = 400
    k_max = replay_large_k_bound().integers["k_max"]
    _, M = index_bounds(k_max)
    alpha = mpmath.findroot(lambda x: x**3 - x**2 - 1, 1.46)
    phi = (1 + mpmath.sqrt(5)) / 2
    tau = mpmath.log(alpha) / mpmath.log(phi)
    mu = mpmath.log(alpha**3 * (phi + 2) / (alpha**3 + 2)) / mpmath.log(phi)
    conv = mp_convergents(tau, 260)
    first = next(i for i, (_, q) in enumerate(conv) if q > 6 * M)
    q = conv[first][1]
    assert nearest_dist(mu * q) - M * nearest_dist(tau * q) < 0
    index, q2, eps, t = oracle_reduce(tau, mu, mpmath.mpf("16.84"), phi, M)
    assert index == first + 1 and 556 < t < 557
    out = dujella_petho(large_k_instance(M))
    assert (out.convergent_index, out.q) == (index, q2)
    assert abs(out.t_bound.mid_float() - float(t)) < 1e-10


def test_large_k_chain_closes():
    k_max = replay_large_k_bound().integers["k_max"]
    chain = large_k_chain(k_max)
    assert chain.closed and len(chain.stages) == 3
    assert [s.k_out for s in chain.stages] == [1113, 360, 337]
    for s in chain.stages:
        assert s.outcome.q > 6 * s.M and s.outcome.epsilon > 0
        assert s.outcome.t_bound.upper * 2 >= s.k_out
        assert s.M == index_bounds(s.k_in)[1]
    assert LARGE_K_A == Fraction("16.84")
