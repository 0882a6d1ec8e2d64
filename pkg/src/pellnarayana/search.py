"""Exhaustive search for common values of k-Pell and Narayana numbers in a box."""

from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass, replace

from .linforms import N_OVER_M_RATIO, m_window
from .sequences import fibonacci, iter_kpell, narayana, NarayanaSequence


class Kind(enum.Enum):
    TRIVIAL_FAMILY = "TrivialFamily"
    EXCEPTIONAL = "Exceptional"


TRIVIAL_PAIRS = frozenset({(1, 0), (1, 1), (1, 2), (2, 3)})


@dataclass(frozen=True, order=True)
class SolutionRecord:
    k: int
    n: int
    m: int
    value: int
    kind: Kind | None = None

    def as_tuple(self) -> tuple[int, int, int, int]:
        return self.n, self.k, self.m, self.value


def classify(rec: SolutionRecord) -> SolutionRecord:
    trivial = (rec.n, rec.m) in TRIVIAL_PAIRS or ((rec.n, rec.m) == (4, 8) and rec.k >= 3)
    return replace(rec, kind=Kind.TRIVIAL_FAMILY if trivial else Kind.EXCEPTIONAL)


def _narayana_index(m_lo: int, m_hi: int) -> dict[int, list[int]]:
    by_value: dict[int, list[int]] = defaultdict(list)
    for m in range(m_lo, m_hi + 1):
        by_value[narayana(m)].append(m)
    return by_value


def passes_filters(n: int, k: int, m: int) -> bool:
    """The regime n >= k + 2, where 0.39 m < n and the linear m-window both apply."""
    if n < k + 2:
        return False
    if not N_OVER_M_RATIO * m < n:
        return False
    lo, hi = m_window(n)
    return lo < m < hi


def intersect_box(k_lo, k_hi, n_lo, n_hi, m_lo, m_hi, filtered: bool = True) -> list[SolutionRecord]:
    """All (n, k, m) in the box with P_n^(k) = N_m, sorted by (k, n, m).

    Narayana values up to ``m_hi`` go into a hash map; k-Pell terms stream
    against it.  Terms past ``N_{m_hi}`` stop the stream for that k.
    """
    if k_lo > k_hi or n_lo > n_hi or m_lo > m_hi:
        raise ValueError("empty search box")
    by_value = _narayana_index(m_lo, m_hi)
    ceiling = narayana(m_hi)
    found = []
    for k in range(max(k_lo, 2), k_hi + 1):
        for n, value in iter_kpell(k, start=max(n_lo, 1)):
            if n > n_hi or value > ceiling:
                break
            for m in by_value.get(value, ()):
                if filtered and not passes_filters(n, k, m):
                    continue
                found.append(classify(SolutionRecord(k, n, m, value)))
    found.sort()
    return found


def intersect_merge(k: int, n_max: int, m_max: int) -> list[SolutionRecord]:
    """Two-pointer merge of the two increasing sequences (n >= 1, m >= 0)."""
    if n_max < 1 or m_max < 0:
        raise ValueError("need n_max >= 1 and m_max >= 0")
    nar = NarayanaSequence().upto(m_max)
    found = []
    pell = iter_kpell(k, start=1)
    n, p = next(pell)
    m = 0
    while n <= n_max and m <= m_max:
        value = nar[m]
        if p < value:
            n, p = next(pell)
        elif p > value:
            m += 1
        else:
            found.append(classify(SolutionRecord(k, n, m, p)))
            m += 1
    found.sort()
    return found


def fibonacci_window_hits(n_lo: int, n_hi: int, m_max: int) -> list[tuple[int, int]]:
    """Pairs (n, m) with F_{2n-1} = N_m, n in [n_lo, n_hi], m <= m_max."""
    by_value = _narayana_index(0, m_max)
    return [(n, m) for n in range(n_lo, n_hi + 1) for m in by_value.get(fibonacci(2 * n - 1), ())]


def theorem_solution_set(k_lo: int, k_hi: int) -> set[tuple[int, int, int]]:
    """The complete list of known solutions (n, k, m), restricted to k in [k_lo, k_hi]."""
    expected = set()
    for k in range(k_lo, k_hi + 1):
        expected |= {(1, k, 0), (1, k, 1), (1, k, 2), (2, k, 3)}
        if k >= 3:
            expected.add((4, k, 8))
    if k_lo <= 4 <= k_hi:
        expected.add((6, 4, 13))
    return expected


def in_m_window(rec: SolutionRecord) -> bool:
    lo, hi = m_window(rec.n)
    return lo < rec.m < hi


__all__ = [
    "Kind",
    "SolutionRecord",
    "classify",
    "intersect_box",
    "intersect_merge",
    "fibonacci_window_hits",
    "theorem_solution_set",
    "passes_filters",
    "in_m_window",
]
