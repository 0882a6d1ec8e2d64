"""Exact k-generalized Pell, Narayana's cows and Fibonacci numbers."""

from __future__ import annotations

from collections import deque
from typing import Iterator

from .certreal import CertReal, dist_to_nearest_int
from .errors import (
    AmbiguousNearestInteger,
    IndexBelowInitialWindow,
    RangeExceedsIdentityWindow,
    RoundingAmbiguous,
)


class KPellSequence:
    """Terms of the k-Pell sequence with a random-access cache.

    ``P_{-(k-2)} = ... = P_0 = 0``, ``P_1 = 1`` and for ``n >= 2``
    ``P_n = 2 P_{n-1} + P_{n-2} + ... + P_{n-k}``.
    """

    def __init__(self, k: int):
        if k < 2:
            raise ValueError("k must be at least 2")
        self.k = k
        self.first_index = -(k - 2)
        # _terms[i] holds P_{first_index + i}
        self._terms: list[int] = [0] * (k - 1) + [1]
        self._window_sum = 1  # P_{n-1} + ... + P_{n-k} for the next n

    def _extend_to(self, n: int) -> None:
        terms, k = self._terms, self.k
        while self.first_index + len(terms) - 1 < n:
            last = terms[-1]
            nxt = last + self._window_sum
            # slide: new sum covers P_n .. P_{n-k+1}
            self._window_sum += nxt - terms[-k]
            terms.append(nxt)

    def __getitem__(self, n: int) -> int:
        if n < self.first_index:
            raise IndexBelowInitialWindow(
                f"P_{n}^({self.k}) lies below the initial window starting at {self.first_index}"
            )
        self._extend_to(n)
        return self._terms[n - self.first_index]

    def __len__(self) -> int:
        return len(self._terms)


def iter_kpell(k: int, start: int = 1) -> Iterator[tuple[int, int]]:
    """Stream ``(n, P_n^(k))`` from ``n = start`` holding only the last k terms."""
    if k < 2:
        raise ValueError("k must be at least 2")
    if start < -(k - 2):
        raise IndexBelowInitialWindow(f"start {start} is below the initial window")
    window = deque([0] * (k - 1) + [1], maxlen=k)
    total = 1
    n = 1
    if start <= 0:
        for idx in range(start, 1):
            yield idx, 0
    if start <= 1:
        yield 1, 1
    while True:
        n += 1
        value = window[-1] + total
        total += value - window[0]
        window.append(value)
        if n >= start:
            yield n, value


def kpell(k: int, n: int) -> int:
    """The n-th k-Pell number, computed with an O(k) sliding window."""
    if k < 2:
        raise ValueError("k must be at least 2")
    if n < -(k - 2):
        raise IndexBelowInitialWindow(f"P_{n}^({k}) lies below the initial window")
    if n <= 0:
        return 0
    for idx, value in iter_kpell(k):
        if idx == n:
            return value
    raise AssertionError("unreachable")


class NarayanaSequence:
    """Cached Narayana's cows numbers: ``N_0 = N_1 = N_2 = 1``, ``N_{m+3} = N_{m+2} + N_m``."""

    def __init__(self):
        self._terms = [1, 1, 1]

    def __getitem__(self, m: int) -> int:
        if m < 0:
            raise IndexError("Narayana index must be non-negative")
        terms = self._terms
        while len(terms) <= m:
            terms.append(terms[-1] + terms[-3])
        return terms[m]

    def upto(self, m_max: int) -> list[int]:
        self[m_max]
        return self._terms[: m_max + 1]


_NARAYANA = NarayanaSequence()


def narayana(m: int) -> int:
    return _NARAYANA[m]


def fibonacci(n: int) -> int:
    if n < 0:
        raise ValueError("Fibonacci index must be non-negative")
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def check_fib_identity(k: int, n_hi: int) -> bool:
    """Whether ``P_n^(k) = F_{2n-1}`` for every ``1 <= n <= n_hi``."""
    if n_hi > k + 1:
        raise RangeExceedsIdentityWindow(
            f"the identity only holds for n <= k+1 = {k + 1}, got n_hi = {n_hi}"
        )
    fib = [0, 1]
    while len(fib) < 2 * n_hi:
        fib.append(fib[-1] + fib[-2])
    for n, value in iter_kpell(k):
        if n > n_hi:
            return True
        if value != fib[2 * n - 1]:
            return False
    return True


def kpell_binet_error(k: int, n: int, context) -> CertReal:
    """Enclosure of ``|P_n^(k) - g_k(gamma) gamma^n|`` using the dominant root only.

    ``context`` must provide ``gamma`` and ``g_k_gamma`` for the same k.
    """
    if context.k != k:
        raise ValueError(f"context is for k={context.k}, not k={k}")
    return abs(context.g_k_gamma * context.gamma ** n - kpell(k, n))


# With N_0 = N_1 = N_2 = 1 the exact closed form is N_m = sum C_x x^(m+3) over
# the three roots, C_x = 1/(x^3 + 2); exponent m+2 describes the shift 0, 1, 1, 1, 2, ...
NARAYANA_EXPONENT_SHIFT = 3


def narayana_binet(m: int, context) -> int:
    """Round ``C_alpha alpha^(m+3)`` to the nearest integer; equals N_m for m >= 1."""
    if m < 1:
        raise ValueError("the dominant-term formula is used for m >= 1")
    value = context.c_alpha * context.alpha ** (m + NARAYANA_EXPONENT_SHIFT)
    try:
        dist, nearest = dist_to_nearest_int(value)
    except AmbiguousNearestInteger as exc:
        raise RoundingAmbiguous(str(exc)) from exc
    if not dist < CertReal.exact(1, value.prec) / 2:
        raise RoundingAmbiguous(f"C_alpha alpha^{m + NARAYANA_EXPONENT_SHIFT} is not provably within 1/2 of {nearest}")
    return nearest
