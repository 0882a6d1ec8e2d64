"""Independent mpmath oracles shared by several test modules."""

import math
import random
from fractions import Fraction

import mpmath

from pellnarayana.certreal import constant
from pellnarayana.errors import EpsilonNeverPositive
from pellnarayana.expr import provider
from pellnarayana.reduction import ReductionInstance, dujella_petho


def nearest_dist(x):
    return abs(x - mpmath.nint(x))


def mp_convergents(x, count):
    """Convergent denominators of an mpmath real, by the textbook recursion."""
    out, q_prev, q, p_prev, p = [], 0, 1, 1, int(mpmath.floor(x))
    out.append((p, q))
    t = x - mpmath.floor(x)
    for _ in range(count):
        t = 1 / t
        a = int(mpmath.floor(t))
        t -= a
        p, p_prev = a * p + p_prev, p
        q, q_prev = a * q + q_prev, q
        out.append((p, q))
    return out


def oracle_reduce(tau, mu, A, C, M):
    """Verbatim definitions: first convergent q > 6M with eps > 0."""
    for index, (_, q) in enumerate(mp_convergents(tau, 400)):
        if q <= 6 * M:
            continue
        eps = nearest_dist(mu * q) - M * nearest_dist(tau * q)
        if eps > 0:
            return index, q, eps, mpmath.log(A * q / eps) / mpmath.log(C)
    raise AssertionError("oracle found no convergent")


def _quadratic_irrational(rng):
    while True:
        d = rng.randint(2, 500)
        if math.isqrt(d) ** 2 != d:
            break
    a, b = rng.randint(-20, 20), rng.randint(1, 12)
    return f"({a} + sqrt({d}))/{b}", (a + mpmath.sqrt(d)) / b


def reduction_soundness(seed: int, trials: int) -> tuple[int, int]:
    """Run random instances against exhaustive enumeration; return (reduced, enumerated) counts."""
    mpmath.mp.dps = 40
    rng = random.Random(seed)
    tested = enumerated = 0
    for _ in range(trials):
        tau_text, tau = _quadratic_irrational(rng)
        mu_text, mu = _quadratic_irrational(rng)
        A = Fraction(rng.randint(1, 1000), 10)
        C = Fraction(rng.randint(150, 300), 100)
        M = rng.randint(1, 1000)
        inst = ReductionInstance(provider(tau_text), provider(mu_text), constant(A), constant(C), M)
        try:
            out = dujella_petho(inst, budget=40)
        except EpsilonNeverPositive:
            continue
        tested += 1
        assert out.q > 6 * M and out.epsilon > 0
        t0 = math.ceil(out.t_bound.upper)
        if t0 > 60:
            continue
        enumerated += 1
        threshold = mpmath.mpf(A.numerator) / A.denominator * (mpmath.mpf(C.numerator) / C.denominator) ** (-t0)
        for r in range(M + 1):
            x = r * tau + mu
            for s in range(int(mpmath.floor(x)) - 1, int(mpmath.floor(x)) + 3):
                lam = abs(x - s)
                if lam > 0:
                    # a solution with t >= t0 would need |Lambda| < A C^-t0
                    assert lam >= threshold, (tau_text, mu_text, A, C, M, r, s)
    return tested, enumerated
