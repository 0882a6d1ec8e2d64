"""Certified real arithmetic (midpoint-radius balls).

Every :class:`CertReal` wraps an Arb ball together with the working precision
it was produced at.  The exact value it stands for is guaranteed to lie in
``[midpoint - radius, midpoint + radius]``; all arithmetic propagates error
outward, so a sign or comparison reported as certain is a proof, not a guess.

Arb keeps its working precision in a process-global context, so every
operation takes a module lock while it runs.
"""

from __future__ import annotations

import enum
import math
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Callable, Iterator, Sequence, TypeVar

from flint import arb, ctx, fmpq, fmpz, fmpz_poly

from .errors import (
    AmbiguousNearestInteger,
    InsufficientPrecision,
    NonPositiveInput,
    NoSignChange,
    PrecisionCapExceeded,
)

DEFAULT_PREC = 256
PRECISION_CAP = 1 << 20

_LOCK = threading.RLock()

T = TypeVar("T")


@contextmanager
def working_precision(bits: int):
    with _LOCK:
        saved = ctx.prec
        ctx.prec = int(bits)
        try:
            yield
        finally:
            ctx.prec = saved


def _exact_fraction(x: arb) -> Fraction:
    man, exp = x.man_exp()
    man, exp = int(man), int(exp)
    return Fraction(man * (1 << exp)) if exp >= 0 else Fraction(man, 1 << -exp)


def _to_arb(value) -> arb:
    """Convert a Python number to an arb at the *current* context precision."""
    if isinstance(value, CertReal):
        return value.ball
    if isinstance(value, arb):
        return value
    if isinstance(value, bool):
        value = int(value)
    if isinstance(value, int):
        return arb(fmpz(value))
    if isinstance(value, Rational):
        return arb(fmpq(int(value.numerator), int(value.denominator)))
    if isinstance(value, str):
        return arb(_parse_decimal(value))
    if isinstance(value, float):
        return arb(fmpq(*value.as_integer_ratio()))
    raise TypeError(f"cannot convert {type(value).__name__} to CertReal")


def _parse_decimal(text: str) -> fmpq:
    frac = Fraction(text.strip())
    return fmpq(frac.numerator, frac.denominator)


class Sign(enum.Enum):
    NEGATIVE = "negative"
    ZERO_CANDIDATE = "zero-candidate"
    POSITIVE = "positive"
    INDETERMINATE = "indeterminate"

    @property
    def certain(self) -> bool:
        return self in (Sign.NEGATIVE, Sign.POSITIVE)


class CertReal:
    """An immutable real ball with a rigorous error radius."""

    __slots__ = ("_ball", "_prec")

    def __init__(self, ball: arb, prec: int = DEFAULT_PREC):
        if not ball.is_finite():
            raise ValueError("CertReal requires a finite ball")
        object.__setattr__(self, "_ball", ball)
        object.__setattr__(self, "_prec", int(prec))

    def __setattr__(self, name, value):
        raise AttributeError("CertReal is immutable")

    # construction -------------------------------------------------------

    @classmethod
    def exact(cls, value, prec: int = DEFAULT_PREC) -> "CertReal":
        """Enclose an int, Fraction, float or decimal string.

        Values that are not dyadic at ``prec`` bits get a radius covering the
        rounding, so the enclosure is always sound.
        """
        with working_precision(prec):
            return cls(+_to_arb(value), prec)

    @classmethod
    def from_mid_rad(cls, mid, rad, prec: int = DEFAULT_PREC) -> "CertReal":
        mid, rad = Fraction(mid), Fraction(rad)
        if rad < 0:
            raise ValueError("radius must be non-negative")
        with working_precision(prec):
            # rounding of mid and rad both widen the ball, never shrink it
            return cls(arb(_to_arb(mid), _to_arb(rad)), prec)

    @classmethod
    def from_interval(cls, lo, hi, prec: int = DEFAULT_PREC) -> "CertReal":
        lo, hi = Fraction(lo), Fraction(hi)
        if lo > hi:
            raise ValueError("empty interval")
        return cls.from_mid_rad((lo + hi) / 2, (hi - lo) / 2, prec)

    # inspection ---------------------------------------------------------

    @property
    def ball(self) -> arb:
        return self._ball

    @property
    def prec(self) -> int:
        return self._prec

    @property
    def midpoint(self) -> Fraction:
        return _exact_fraction(self._ball.mid())

    @property
    def radius(self) -> Fraction:
        return _exact_fraction(self._ball.rad())

    @property
    def lower(self) -> Fraction:
        return self.midpoint - self.radius

    @property
    def upper(self) -> Fraction:
        return self.midpoint + self.radius

    def is_exact(self) -> bool:
        return self._ball.is_exact()

    def contains(self, value) -> bool:
        """True when ``value`` (a rational or another ball) lies inside."""
        if isinstance(value, CertReal):
            return self.lower <= value.lower and value.upper <= self.upper
        value = Fraction(value)
        return self.lower <= value <= self.upper

    def overlaps(self, other) -> bool:
        other = _coerce(other, self._prec)
        return self.lower <= other.upper and other.lower <= self.upper

    def sign(self) -> Sign:
        return sign_of(self)

    def unique_int(self) -> int | None:
        """The integer ``floor`` of every point in the ball, if it is unique."""
        lo, hi = self.lower, self.upper
        if math.floor(lo) == math.floor(hi):
            return math.floor(lo)
        return None

    def mid_float(self) -> float:
        return float(self._ball.mid())

    def __float__(self) -> float:
        return self.mid_float()

    def decimal(self, digits: int = 30) -> str:
        with working_precision(self._prec):
            return self._ball.str(digits, radius=True)

    def __repr__(self) -> str:
        return f"CertReal({self.decimal(20)}, prec={self._prec})"

    # arithmetic ---------------------------------------------------------

    def _binary(self, other, op) -> "CertReal":
        prec = max(self._prec, other._prec) if isinstance(other, CertReal) else self._prec
        with working_precision(prec):
            return CertReal(op(self._ball, _to_arb(other)), prec)

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    def __radd__(self, other):
        return self._binary(other, lambda a, b: b + a)

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binary(other, lambda a, b: a * b)

    def __rmul__(self, other):
        return self._binary(other, lambda a, b: b * a)

    def __truediv__(self, other):
        divisor = other if isinstance(other, CertReal) else CertReal.exact(other, self._prec)
        if divisor.sign() not in (Sign.POSITIVE, Sign.NEGATIVE):
            raise ZeroDivisionError("divisor ball contains zero")
        return self._binary(divisor, lambda a, b: a / b)

    def __rtruediv__(self, other):
        return CertReal.exact(other, self._prec) / self

    def __neg__(self):
        with working_precision(self._prec):
            return CertReal(-self._ball, self._prec)

    def __pos__(self):
        return self

    def __abs__(self):
        with working_precision(self._prec):
            return CertReal(abs(self._ball), self._prec)

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int):
            raise TypeError("only integer powers are supported")
        if exponent < 0 and self.sign() not in (Sign.POSITIVE, Sign.NEGATIVE):
            raise ZeroDivisionError("negative power of a ball containing zero")
        with working_precision(self._prec):
            return CertReal(self._ball ** exponent, self._prec)

    def log(self) -> "CertReal":
        return log_cert(self)

    def exp(self) -> "CertReal":
        with working_precision(self._prec):
            return CertReal(self._ball.exp(), self._prec)

    def sqrt(self) -> "CertReal":
        if self.lower < 0:
            raise NonPositiveInput("sqrt of a ball reaching below zero")
        with working_precision(self._prec):
            return CertReal(self._ball.sqrt(), self._prec)

    def floor(self) -> "CertReal":
        with working_precision(self._prec):
            return CertReal(self._ball.floor(), self._prec)

    def max_with(self, other) -> "CertReal":
        """Enclosure of ``max(x, other)`` over the ball."""
        other = _coerce(other, self._prec)
        prec = max(self._prec, other._prec)
        if self.upper <= other.lower:
            return other if not isinstance(other, _RationalPoint) else CertReal.exact(other.lower, prec)
        if other.upper <= self.lower:
            return self
        return CertReal.from_interval(max(self.lower, other.lower), max(self.upper, other.upper), prec)

    # certain comparisons: True only when provable for every point ----------

    def __lt__(self, other):
        return self.upper < _coerce(other, self._prec).lower

    def __le__(self, other):
        return self.upper <= _coerce(other, self._prec).lower

    def __gt__(self, other):
        return self.lower > _coerce(other, self._prec).upper

    def __ge__(self, other):
        return self.lower >= _coerce(other, self._prec).upper

    __hash__ = None

    def __eq__(self, other):
        # identity of representation, used by the determinism checks
        if not isinstance(other, CertReal):
            return NotImplemented
        return self.midpoint == other.midpoint and self.radius == other.radius


def _coerce(value, prec: int) -> CertReal:
    if isinstance(value, CertReal):
        return value
    if isinstance(value, (int, Fraction)):
        # exact rationals compare exactly through their own endpoints
        return _RationalPoint(Fraction(value), prec)
    return CertReal.exact(value, prec)


class _RationalPoint(CertReal):
    """A degenerate ball used only for exact comparisons against rationals."""

    __slots__ = ("_value",)

    def __init__(self, value: Fraction, prec: int):
        object.__setattr__(self, "_value", value)
        with working_precision(prec):
            super().__init__(_to_arb(value), prec)

    @property
    def lower(self) -> Fraction:
        return self._value

    @property
    def upper(self) -> Fraction:
        return self._value


# Precision escalation ------------------------------------------------------


@dataclass(frozen=True)
class PrecisionPolicy:
    """Start precision and hard cap (bits); precision doubles between attempts."""

    start: int = DEFAULT_PREC
    cap: int = PRECISION_CAP

    def __post_init__(self):
        if self.start < 16 or self.cap < self.start:
            raise ValueError("need 16 <= start <= cap")

    def levels(self) -> Iterator[int]:
        prec = self.start
        while prec <= self.cap:
            yield prec
            prec *= 2

    def run(self, fn: Callable[[int], T]) -> T:
        """Call ``fn(prec)`` at increasing precision until it stops asking for more."""
        last = None
        for prec in self.levels():
            try:
                return fn(prec)
            except InsufficientPrecision as exc:
                last = exc
        raise PrecisionCapExceeded(
            f"precision cap of {self.cap} bits reached: {last}"
        ) from last


DEFAULT_POLICY = PrecisionPolicy()

# A quantity that can be produced at any requested precision.
Provider = Callable[[int], CertReal]


def constant(value) -> Provider:
    """Provider for an exactly known rational (int, Fraction or decimal string)."""
    frac = Fraction(value)
    return lambda prec: CertReal.exact(frac, prec)


# Operations -----------------------------------------------------------------


def sign_of(x: CertReal) -> Sign:
    lo, hi = x.lower, x.upper
    if lo > 0:
        return Sign.POSITIVE
    if hi < 0:
        return Sign.NEGATIVE
    if lo == hi == 0:
        return Sign.ZERO_CANDIDATE
    return Sign.INDETERMINATE


def eval_poly(coeffs: Sequence[int], x: CertReal) -> CertReal:
    """Horner evaluation of an integer polynomial (degree-descending) on a ball."""
    if not coeffs or coeffs[0] == 0:
        raise ValueError("coefficients must be non-empty with non-zero leading term")
    with working_precision(x.prec):
        acc = arb(fmpz(int(coeffs[0])))
        for c in coeffs[1:]:
            acc = acc * x.ball + fmpz(int(c))
        return CertReal(acc, x.prec)


def poly_sign_at(coeffs: Sequence[int], point: Fraction) -> int:
    """Exact sign of the polynomial at a rational point."""
    # a ball evaluation settles nearly every case; exact rationals are the fallback
    for bits in (2048, 8192):
        with working_precision(bits):
            ball = fmpz_poly([int(c) for c in reversed(coeffs)])(arb(fmpq(point.numerator, point.denominator)))
        if ball > 0:
            return 1
        if ball < 0:
            return -1
    value = fmpz_poly([int(c) for c in reversed(coeffs)])(fmpq(point.numerator, point.denominator))
    return (value > 0) - (value < 0)


def _poly_derivative(coeffs: Sequence[int]) -> list[int]:
    deg = len(coeffs) - 1
    return [int(c) * (deg - i) for i, c in enumerate(coeffs[:-1])]


def _dyadic_floor(x: Fraction, bits: int) -> Fraction:
    return Fraction(math.floor(x * (1 << bits)), 1 << bits)


def find_root(
    coeffs: Sequence[int],
    lo,
    hi,
    target_radius,
    prec: int | None = None,
) -> CertReal:
    """Enclose the unique root of ``coeffs`` in ``[lo, hi]``.

    The bracket is certified by exact rational sign evaluation at its ends.
    Newton iteration on the ball midpoints only proposes a tight bracket; if
    that proposal fails its exact sign check we fall back to plain bisection.
    """
    lo, hi = Fraction(lo), Fraction(hi)
    target = Fraction(target_radius)
    if target <= 0 or lo >= hi:
        raise ValueError("need lo < hi and a positive target radius")
    # ceil(-log2(target)) + 2, from bit lengths so huge denominators never hit floats
    bits = max(8, target.denominator.bit_length() - target.numerator.bit_length() + 3)
    work = prec or (bits + 32)

    s_lo, s_hi = poly_sign_at(coeffs, lo), poly_sign_at(coeffs, hi)
    if s_lo == 0:
        return CertReal.exact(lo, work)
    if s_hi == 0:
        return CertReal.exact(hi, work)
    if s_lo == s_hi:
        raise NoSignChange(f"polynomial has sign {s_lo} at both ends of [{lo}, {hi}]")

    # coarse bisection so Newton starts inside its basin
    while hi - lo > Fraction(1, 1 << 40) and hi - lo > target:
        mid = (lo + hi) / 2
        s_mid = poly_sign_at(coeffs, mid)
        if s_mid == 0:
            return CertReal.exact(mid, work)
        if s_mid == s_lo:
            lo = mid
        else:
            hi = mid

    if hi - lo > target:
        candidate = _newton_bracket(coeffs, lo, hi, s_lo, bits, work)
        if candidate is not None:
            lo, hi = candidate
        while hi - lo > target:
            mid = (lo + hi) / 2
            s_mid = poly_sign_at(coeffs, mid)
            if s_mid == 0:
                return CertReal.exact(mid, work)
            if s_mid == s_lo:
                lo = mid
            else:
                hi = mid
    # the midpoint needs a few bits beyond the target to keep the radius below it
    return CertReal.from_interval(lo, hi, max(work, bits + 8))


def _newton_bracket(coeffs, lo, hi, s_lo, bits, work):
    deriv = _poly_derivative(coeffs)
    with working_precision(work + 16):
        x = _to_arb((lo + hi) / 2)
        for _ in range(4 * max(1, bits.bit_length()) + 8):
            fx = eval_poly(coeffs, CertReal(x, work + 16)).ball.mid()
            dfx = eval_poly(deriv, CertReal(x, work + 16)).ball.mid()
            if dfx == 0:
                return None
            step = (fx / dfx).mid()
            x = (x - step).mid()
            if abs(float(step)) < 2.0 ** (-bits - 4) or step == 0:
                break
        centre = _exact_fraction(x)
    half = Fraction(1, 1 << (bits + 1))
    a, b = _dyadic_floor(centre, bits + 2) - half, _dyadic_floor(centre, bits + 2) + half
    a, b = max(a, lo), min(b, hi)
    if a >= b:
        return None
    sa, sb = poly_sign_at(coeffs, a), poly_sign_at(coeffs, b)
    if sa == s_lo and sb == -s_lo:
        return a, b
    return None


def log_cert(x: CertReal) -> CertReal:
    if x.lower <= 0:
        raise NonPositiveInput("log of a ball that is not strictly positive")
    with working_precision(x.prec):
        return CertReal(x.ball.log(), x.prec)


def dist_to_nearest_int(x: CertReal) -> tuple[CertReal, int]:
    """Distance from ``x`` to the nearest integer, and that integer.

    Exact half-integers resolve to distance 1/2 with the smaller integer.
    """
    if x.radius >= Fraction(1, 4):
        raise AmbiguousNearestInteger("ball radius must be below 1/4")
    mid = x.midpoint
    z = math.ceil(mid - Fraction(1, 2))
    lo, hi = x.lower, x.upper
    if lo < z - Fraction(1, 2) or hi > z + Fraction(1, 2):
        raise AmbiguousNearestInteger(f"ball straddles a half-integer next to {z}")
    return abs(x - z), z
