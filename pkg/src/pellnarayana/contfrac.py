"""Certified continued-fraction expansion of ball-enclosed irrationals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

from .certreal import DEFAULT_POLICY, CertReal, PrecisionPolicy, Provider
from .errors import IndexOutOfRange, QuotientUnstable


@dataclass
class ContinuedFraction:
    """Partial quotients ``[a_0; a_1, ...]`` and their convergents ``p_i / q_i`` (0-based)."""

    partial_quotients: list[int] = field(default_factory=list)
    convergents: list[tuple[int, int]] = field(default_factory=list)
    source_prec: int | None = None

    def append(self, a: int) -> tuple[int, int]:
        if self.partial_quotients and a < 1:
            raise ValueError("partial quotients after a_0 must be positive")
        if len(self.convergents) >= 2:
            (p2, q2), (p1, q1) = self.convergents[-2], self.convergents[-1]
        elif self.convergents:
            (p2, q2), (p1, q1) = (1, 0), self.convergents[-1]
        else:
            (p2, q2), (p1, q1) = (0, 1), (1, 0)
        pq = (a * p1 + p2, a * q1 + q2)
        self.partial_quotients.append(a)
        self.convergents.append(pq)
        return pq

    def convergent_at(self, i: int) -> tuple[int, int]:
        if not 0 <= i < len(self.convergents):
            raise IndexOutOfRange(f"convergent {i} not expanded (have {len(self.convergents)})")
        return self.convergents[i]

    def __len__(self) -> int:
        return len(self.partial_quotients)

    @classmethod
    def from_quotients(cls, quotients) -> "ContinuedFraction":
        cf = cls()
        for a in quotients:
            cf.append(a)
        return cf


def iter_quotients(x: CertReal) -> Iterator[int]:
    """Yield the partial quotients shared by every number in the ball.

    Works on the exact rational endpoints: the complete quotient's interval
    is pushed through t -> 1/(t - a) and a quotient is emitted only when the
    interval lies strictly between two consecutive integers.  Raises
    :class:`QuotientUnstable` as soon as that fails.
    """
    lo, hi = x.lower, x.upper
    while True:
        a = math.floor(lo)
        if math.floor(hi) != a or lo == a:
            raise QuotientUnstable(f"cannot certify floor of [{float(lo)}, {float(hi)}]")
        yield a
        lo, hi = 1 / (hi - a), 1 / (lo - a)


def expand_from_ball(x: CertReal, min_q: int, extra: int = 0) -> ContinuedFraction:
    """Expand until a convergent denominator exceeds ``min_q``, then ``extra`` more terms."""
    cf = ContinuedFraction(source_prec=x.prec)
    remaining = None
    for a in iter_quotients(x):
        _, q = cf.append(a)
        if remaining is None and q > min_q:
            remaining = extra
        if remaining is not None:
            if remaining == 0:
                return cf
            remaining -= 1
    raise AssertionError("unreachable")


def expand_until(
    x: Provider,
    min_q: int,
    policy: PrecisionPolicy = DEFAULT_POLICY,
    extra: int = 0,
) -> ContinuedFraction:
    """Certified expansion of ``x`` past denominator ``min_q``.

    Any uncertified quotient restarts the whole expansion from scratch at
    doubled precision.
    """
    return policy.run(lambda prec: expand_from_ball(x(prec), min_q, extra))


def first_denominator_exceeding(
    x: Provider,
    threshold: int,
    policy: PrecisionPolicy = DEFAULT_POLICY,
) -> tuple[int, int]:
    cf = expand_until(x, threshold, policy)
    index = len(cf.convergents) - 1
    return index, cf.convergents[index][1]
