"""Certified constants: gamma(k), alpha, |beta|, phi, g_k(gamma), C_alpha and heights."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .certreal import DEFAULT_POLICY, DEFAULT_PREC, CertReal, PrecisionPolicy, find_root
from .errors import DenominatorIndeterminate, InsufficientPrecision

GOLDEN_POLY = (1, -1, -1)
NARAYANA_POLY = (1, -1, 0, -1)
C_ALPHA_MINPOLY = (31, -31, 10, -1)

G_K_LOWER = Fraction("0.276")
G_K_UPPER = Fraction(1, 2)


def kpell_charpoly(k: int) -> list[int]:
    """Coefficients of x^k - 2x^(k-1) - x^(k-2) - ... - 1, degree-descending."""
    if k < 2:
        raise ValueError("k must be at least 2")
    return [1, -2] + [-1] * (k - 1)


def golden_ratio(prec: int = DEFAULT_PREC) -> CertReal:
    return (1 + CertReal.exact(5, prec).sqrt()) / 2


def gamma_bracket(k: int, prec: int = DEFAULT_PREC) -> tuple[CertReal, CertReal]:
    """The localization interval (phi^2 (1 - phi^-k), phi^2) as two balls."""
    phi = golden_ratio(prec)
    upper = phi ** 2
    return upper * (1 - phi ** (-k)), upper


@lru_cache(maxsize=4096)
def gamma_of(k: int, prec: int = DEFAULT_PREC, target_radius: Fraction | None = None) -> CertReal:
    """Enclosure of the dominant root of the k-Pell characteristic polynomial."""
    lo_ball, hi_ball = gamma_bracket(k, prec + 32)
    target = target_radius if target_radius is not None else Fraction(1, 1 << (prec + 8))
    return find_root(kpell_charpoly(k), lo_ball.lower, hi_ball.upper, target, prec)


@lru_cache(maxsize=64)
def alpha_root(prec: int = DEFAULT_PREC) -> tuple[CertReal, CertReal]:
    """Real root alpha of x^3 - x^2 - 1 and the modulus of its complex pair.

    The three roots multiply to 1, so |beta|^2 alpha = 1.
    """
    alpha = find_root(NARAYANA_POLY, 1, 2, Fraction(1, 1 << (prec + 8)), prec)
    return alpha, 1 / alpha.sqrt()


def g_k_at(k: int, gamma: CertReal) -> CertReal:
    """g_k(z) = (z - 1) / ((k+1) z^2 - 3k z + k - 1)."""
    denominator = (k + 1) * gamma ** 2 - 3 * k * gamma + (k - 1)
    if not denominator.sign().certain:
        raise DenominatorIndeterminate(f"denominator of g_{k} not separated from zero")
    return (gamma - 1) / denominator


def c_alpha(alpha: CertReal) -> CertReal:
    return 1 / (alpha ** 3 + 2)


def c_beta_modulus(c_alpha_value: CertReal) -> CertReal:
    """|C_beta| = |C_delta|, from C_alpha C_beta C_delta = 1/31."""
    return 1 / (31 * c_alpha_value).sqrt()


def height_c_alpha(c_alpha_value: CertReal) -> CertReal:
    minor = c_beta_modulus(c_alpha_value)
    return height_from_minpoly(31, [c_alpha_value, minor, minor])


def height_from_minpoly(leading: int, conjugate_moduli: Sequence[CertReal]) -> CertReal:
    """Logarithmic height from the leading coefficient and the moduli of all conjugates."""
    if leading < 1 or not conjugate_moduli:
        raise ValueError("need leading >= 1 and at least one conjugate")
    prec = max(c.prec for c in conjugate_moduli)
    total = CertReal.exact(leading, prec).log()
    for modulus in conjugate_moduli:
        total = total + modulus.max_with(1).log()
    return total / len(conjugate_moduli)


def height_eta1_bound(k: int, prec: int = DEFAULT_PREC) -> CertReal:
    """(log 31)/3 + 4k log(phi) + k log(k+1), checked against 5.2 k log k."""
    if k < 2:
        raise ValueError("k must be at least 2")
    phi = golden_ratio(prec)
    bound = (
        CertReal.exact(31, prec).log() / 3
        + 4 * k * phi.log()
        + k * CertReal.exact(k + 1, prec).log()
    )
    majorant = CertReal.exact("5.2", prec) * k * CertReal.exact(k, prec).log()
    if not bound < majorant:
        raise ArithmeticError(f"height bound for k={k} is not below 5.2 k log k")
    return bound


def golden_approx_error(k: int, n: int, context: "AlgebraicContext") -> CertReal:
    """xi with g_k(gamma) gamma^n = phi^(2n) / (phi + 2) * (1 + xi)."""
    phi = context.phi
    return context.g_k_gamma * context.gamma ** n * (phi + 2) / phi ** (2 * n) - 1


def minor_root_moduli(k: int) -> np.ndarray:
    """Floating-point moduli of the k-1 non-dominant roots of the characteristic polynomial.

    Only a numerical spot check of the literature's root localization.
    """
    roots = np.roots(np.array(kpell_charpoly(k), dtype=float))
    moduli = np.sort(np.abs(roots))
    return moduli[:-1]


@dataclass(frozen=True)
class AlgebraicContext:
    """All certified constants for one k (``k=None`` for the k-independent ones)."""

    k: int | None
    prec: int
    alpha: CertReal
    beta_modulus: CertReal
    phi: CertReal
    c_alpha: CertReal
    gamma: CertReal | None = None
    g_k_gamma: CertReal | None = None

    @classmethod
    def build(cls, k: int | None, prec: int = DEFAULT_PREC) -> "AlgebraicContext":
        return _build_context(k, prec)

    def invariants(self) -> dict[str, bool]:
        """Certified truth value of every structural invariant of the constants."""
        c = self.c_alpha
        checks = {
            "alpha_range": self.alpha > Fraction("1.4655") and self.alpha < Fraction("1.4656"),
            "beta_modulus_range": self.beta_modulus > Fraction("0.8260")
            and self.beta_modulus < Fraction("0.8261"),
            "c_alpha_minpoly": (31 * c ** 3 - 31 * c ** 2 + 10 * c - 1).contains(0),
            "c_alpha_unit_interval": c > 0 and c < 1,
        }
        if self.k is not None:
            lo, hi = gamma_bracket(self.k, self.prec)
            checks["gamma_localization"] = self.gamma > lo and self.gamma < hi
            checks["g_k_range"] = (
                self.g_k_gamma > G_K_LOWER and self.g_k_gamma < G_K_UPPER
            )
        return checks


@lru_cache(maxsize=1024)
def _build_context(k, prec):
    alpha, beta_mod = alpha_root(prec)
    phi = golden_ratio(prec)
    ca = c_alpha(alpha)
    if k is None:
        return AlgebraicContext(None, prec, alpha, beta_mod, phi, ca)
    gamma = gamma_of(k, prec)
    return AlgebraicContext(k, prec, alpha, beta_mod, phi, ca, gamma, g_k_at(k, gamma))


def log_height_gamma(k: int, prec: int = DEFAULT_PREC) -> CertReal:
    """h(gamma(k)).

    The other k-1 conjugates lie in the closed unit disc, where max(|z|, 1) = 1,
    so 1 stands in for each of their moduli.
    """
    gamma = gamma_of(k, prec)
    return height_from_minpoly(1, [gamma] + [CertReal.exact(1, prec)] * (k - 1))



def certified_context(k: int | None, policy: PrecisionPolicy = DEFAULT_POLICY) -> AlgebraicContext:
    """Build the constants at the lowest policy precision where every invariant is proved.

    gamma(k) sits within about phi^(-2k) of phi^2, so large k needs more bits
    than the default before the localization check can succeed.
    """

    def attempt(prec: int) -> AlgebraicContext:
        context = AlgebraicContext.build(k, prec)
        failed = [name for name, ok in context.invariants().items() if not ok]
        if failed:
            raise InsufficientPrecision(f"unproved at {prec} bits: {', '.join(failed)}")
        return context

    capped = PrecisionPolicy(policy.start, min(policy.cap, max(policy.start, 8192)))
    return capped.run(attempt)
