"""Right-hand sides of the linear-forms-in-logarithms toolbox and the bound derivations.

The three external inequalities (Matveev's lower bound, the log(1+x)
linearization and the x/(log x)^m inversion) are trusted; this module only
evaluates their right-hand sides with certified arithmetic.  The
``replay_*`` functions re-derive the absolute bounds on n, m and k step by
step, checking every numeric constant used along the way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .algebraic import AlgebraicContext, c_beta_modulus, height_from_minpoly
from .certreal import DEFAULT_POLICY, DEFAULT_PREC, CertReal, PrecisionPolicy
from .errors import InsufficientPrecision, OutOfDomain, PreconditionSViolated

MATVEEV_FLOOR = Fraction("0.16")
N_BOUND_COEFF = 528 * 10**14  # 5.28e16
N_OVER_M_RATIO = Fraction(39, 100)


@dataclass(frozen=True)
class MatveevParams:
    s: int
    d_L: int
    D: CertReal
    B: tuple[CertReal, ...]

    def __post_init__(self):
        if self.s < 1 or self.d_L < 1:
            raise ValueError("need s >= 1 and d_L >= 1")
        if len(self.B) != self.s:
            raise ValueError(f"expected {self.s} B values, got {len(self.B)}")
        # reject only what is certainly too small: 0.16 itself is not dyadic
        if any(b.upper < MATVEEV_FLOOR for b in self.B):
            raise ValueError("every B_j must be at least 0.16")
        if self.D.upper < 1:
            raise ValueError("D must be at least 1")


def matveev_leading(s: int, prec: int = DEFAULT_PREC) -> CertReal:
    """1.4 * 30^(s+3) * s^4.5."""
    s_ball = CertReal.exact(s, prec)
    return CertReal.exact("1.4", prec) * 30 ** (s + 3) * s_ball ** 4 * s_ball.sqrt()


def matveev_rhs(p: MatveevParams) -> CertReal:
    """Upper bound on -log|Lambda| for a non-zero linear form."""
    prec = max([p.D.prec] + [b.prec for b in p.B])
    d = CertReal.exact(p.d_L, prec)
    value = matveev_leading(p.s, prec) * d ** 2 * (1 + d.log()) * (1 + p.D.log())
    for b in p.B:
        value = value * b
    return value


def _open_unit(a) -> CertReal:
    a = a if isinstance(a, CertReal) else CertReal.exact(a)
    if not (a > 0 and a < 1):
        raise OutOfDomain("a must lie in (0, 1)")
    return a


def deweger_factor(a) -> CertReal:
    """-log(1 - a) / a: |log(1+x)| < factor * |x| whenever |x| < a."""
    a = _open_unit(a)
    return -(1 - a).log() / a


def deweger_inverse_factor(a) -> CertReal:
    """a / (1 - e^-a): |x| < factor * |e^x - 1| whenever |x| < a."""
    a = _open_unit(a)
    return a / (1 - (-a).exp())


def sanchez_luca_invert(m: int, S) -> CertReal:
    """2^m S (log S)^m, which bounds every x with x / (log x)^m < S."""
    if m < 1:
        raise ValueError("m must be positive")
    S = S if isinstance(S, CertReal) else CertReal.exact(S)
    if not S.lower >= (4 * m * m) ** m:
        raise PreconditionSViolated(f"S must be at least (4m^2)^m = {(4 * m * m) ** m}")
    return 2 ** m * S * S.log() ** m


def n_bound_for_k(k: int, prec: int = DEFAULT_PREC) -> CertReal:
    """5.28e16 k^5 (log k)^3."""
    kb = CertReal.exact(k, prec)
    return N_BOUND_COEFF * kb ** 5 * kb.log() ** 3


def index_bounds(k: int, policy: PrecisionPolicy = DEFAULT_POLICY) -> tuple[int, int]:
    """(n_max, m_max) = (floor(5.28e16 k^5 log^3 k), floor(n_max / 0.39))."""
    if k < 2:
        raise ValueError("k must be at least 2")

    def attempt(prec: int) -> int:
        n_max = n_bound_for_k(k, prec).unique_int()
        if n_max is None:
            raise InsufficientPrecision("floor of the n bound is not unique")
        return n_max

    n_max = policy.run(attempt)
    return n_max, n_max * N_OVER_M_RATIO.denominator // N_OVER_M_RATIO.numerator


def m_window(n: int) -> tuple[Fraction, Fraction]:
    """Open interval (1.25n - 1.5, 2.52n - 0.52) that m must lie in."""
    return Fraction(5, 4) * n - Fraction(3, 2), Fraction(63, 25) * n - Fraction(13, 25)


# Derivation replays -----------------------------------------------------------


@dataclass(frozen=True)
class BoundCheck:
    """A certified strict inequality ``lhs < rhs`` used somewhere in a derivation."""

    label: str
    lhs: CertReal
    rhs: CertReal
    note: str = ""

    @property
    def holds(self) -> bool:
        return self.lhs < self.rhs


def _check(label, lhs, rhs, note="", prec=DEFAULT_PREC) -> BoundCheck:
    lhs = lhs if isinstance(lhs, CertReal) else CertReal.exact(lhs, prec)
    rhs = rhs if isinstance(rhs, CertReal) else CertReal.exact(rhs, prec)
    return BoundCheck(label, lhs, rhs, note)


@dataclass
class BoundReplay:
    checks: list[BoundCheck] = field(default_factory=list)
    values: dict[str, CertReal] = field(default_factory=dict)
    integers: dict[str, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.holds for c in self.checks)

    def failed(self) -> list[str]:
        return [c.label for c in self.checks if not c.holds]

    def add(self, label, lhs, rhs, note="", prec=DEFAULT_PREC) -> BoundCheck:
        check = _check(label, lhs, rhs, note, prec)
        self.checks.append(check)
        return check


def replay_small_k_bound(prec: int = DEFAULT_PREC) -> BoundReplay:
    """Re-derive n < 5.28e16 k^5 log^3 k for k >= 2 and n >= 4.

    Inequalities quantified over all k >= 2 (or n >= 4) are checked at the
    smallest admissible argument; each difference is increasing there, which
    the note on the check records.
    """
    ctx = AlgebraicContext.build(None, prec)
    log_alpha, log_phi = ctx.alpha.log(), ctx.phi.log()
    two, four = CertReal.exact(2, prec), CertReal.exact(4, prec)
    log2, log4 = two.log(), four.log()
    r = BoundReplay()

    r.add("narayana_minor_terms", 2 * c_beta_modulus(ctx.c_alpha) * ctx.beta_modulus ** 3,
          Fraction(1, 2), "|C_beta beta^(m+2) + C_delta delta^(m+2)| < 1/2 for m >= 1", prec)
    r.add("lambda1_constant", 1 / (ctx.c_alpha * ctx.alpha ** 2), Fraction("2.4"),
          "|Lambda_1| < 2.4 alpha^-m", prec)
    r.add("m_window_slope_lower", Fraction(5, 4), log_phi / log_alpha,
          "gamma > phi^2(1 - phi^-k) >= phi gives m > 1.25n - 1.5 for n >= 4", prec)
    r.add("m_window_slope_upper", 2 * log_phi / log_alpha, Fraction("2.52"),
          "gamma < phi^2 gives m < 2.52n - 0.52", prec)
    r.add("n_over_m_ratio", Fraction("0.39"), 1 / CertReal.exact("2.52", prec),
          "m < 2.52n implies 0.39m < n", prec)

    minor = c_beta_modulus(ctx.c_alpha)
    r.add("c_alpha_conjugates_inside", minor, 1, "|C_beta| = |C_delta| < 1", prec)
    h_c = height_from_minpoly(31, [ctx.c_alpha, minor, minor])
    r.values["height_c_alpha"] = h_c
    r.add("c_alpha_height", abs(h_c - CertReal.exact(31, prec).log() / 3), Fraction(1, 2 ** (prec // 2)),
          "h(C_alpha) = (log 31)/3", prec)
    k_two_height = CertReal.exact(31, prec).log() / 3 + 8 * log_phi + 2 * CertReal.exact(3, prec).log()
    r.add("height_eta1", k_two_height, CertReal.exact("10.4", prec) * log2,
          "h(eta_1) < 5.2 k log k at k = 2; the gap grows with k", prec)
    eta1_lo = CertReal.exact("0.276", prec) / ctx.c_alpha
    eta1_hi = CertReal.exact("0.5", prec) / ctx.c_alpha
    r.add("B1_covers_log_eta1", abs(eta1_lo.log()).max_with(abs(eta1_hi.log())),
          CertReal.exact("62.4", prec) * log2, "|log eta_1| <= 15.6 k^2 log k at k = 2", prec)
    r.add("B2_floor", Fraction("0.16"), 3 * log_phi, "B_2 = 3 log gamma > 3 log phi > 0.16", prec)
    r.add("B3_floor", CertReal.exact("0.16", prec), 2 * log_alpha,
          "k log alpha >= 2 log alpha > 0.16", prec)

    leading = matveev_leading(3, prec)
    r.values["matveev_leading_s3"] = leading
    r.add("matveev_leading_s3", leading, Fraction("1.432e11"), "1.4 * 30^6 * 3^4.5", prec)
    small_const = leading * 9 * CertReal.exact("15.6", prec) * 6 * log_phi * log_alpha
    r.values["small_k_matveev_constant"] = small_const
    r.add("small_k_matveev_constant", small_const, Fraction("2.22e13"),
          "(3k)^2 * 15.6k^2 log k * 6 log phi * k log alpha collapses to C k^5 log k", prec)
    r.add("log_3k_simplification", 1 + CertReal.exact(6, prec).log(), CertReal.exact("4.1", prec) * log2,
          "1 + log 3k < 4.1 log k at k = 2; derivative gap 3.1/k > 0", prec)
    r.add("log_D_simplification", 1 + CertReal.exact(Fraction("12.08"), prec).log(),
          CertReal.exact("2.6", prec) * log4,
          "1 + log(2.52n + 2) < 2.6 log n at n = 4; derivative gap positive", prec)

    min_grid = 32 * log2 ** 2 * log4  # smallest k^5 log^2 k log n over k >= 2, n >= 4
    m_const = (Fraction("2.22e13") * CertReal.exact("4.1", prec) * Fraction("2.6")
               + CertReal.exact("2.4", prec).log() / min_grid) / log_alpha
    r.values["m_constant"] = m_const
    r.add("m_constant", m_const, Fraction("6.23e14"), "m < 6.23e14 k^5 log^2 k log n", prec)
    s_const = Fraction("6.23e14") / Fraction("1.25") + CertReal.exact("1.2", prec) / (32 * log2 ** 2 * log4)
    r.values["n_over_log_n_constant"] = s_const
    r.add("n_over_log_n_constant", s_const, Fraction("5e14"),
          "n < (m + 1.5)/1.25 gives n / log n < 5e14 k^5 log^2 k", prec)

    S_min = CertReal.exact(Fraction("5e14") * 32, prec) * log2 ** 2
    r.add("sanchez_luca_precondition", CertReal.exact(4, prec), S_min, "S >= 4 at k = 2", prec)
    log_S_sum = CertReal.exact(Fraction("5e14"), prec).log() + 5 * log2 + 2 * log2.log()
    r.add("log_S_simplification", log_S_sum, CertReal.exact("52.8", prec) * log2,
          "log S <= 33.85 + 5 log k + 2 log log k < 52.8 log k at k = 2; gap increasing", prec)
    return r


def replay_large_k_bound(prec: int = DEFAULT_PREC) -> BoundReplay:
    """Re-derive k < 1.51e18 for solutions with k > 360 and n >= k + 2.

    Records the Matveev product, every simplification constant and the
    resulting integer bounds ``k_max``, ``n_max`` and ``m_max``.
    """
    ctx = AlgebraicContext.build(None, prec)
    log_alpha, log_phi = ctx.alpha.log(), ctx.phi.log()
    phi = ctx.phi
    r = BoundReplay()

    h_eta1 = CertReal.exact(31, prec).log() / 3 + log_phi / 2 + 2 * CertReal.exact(2, prec).log()
    r.values["height_eta1"] = h_eta1
    r.add("height_eta1", h_eta1, Fraction("2.8"), "h(C_alpha) + h(phi) + 2 log 2 < 2.8", prec)
    eta1 = ctx.c_alpha * (phi + 2)
    r.add("B1_covers_log_eta1", abs(eta1.log()), Fraction("16.8"), "|log eta_1| <= 6 * 2.8", prec)
    r.add("B2", 3 * log_phi, Fraction("1.45"), "6 h(phi) = 3 log phi", prec)
    r.add("B3", 2 * log_alpha, Fraction("0.77"), "6 h(alpha) = 2 log alpha", prec)

    params = MatveevParams(
        s=3,
        d_L=6,
        D=CertReal.exact(1, prec),
        B=tuple(CertReal.exact(b, prec) for b in ("16.8", "1.45", "0.77")),
    )
    product = matveev_rhs(params)  # with D = 1 the (1 + log D) factor is exactly 1
    r.values["matveev_product"] = product
    r.add("matveev_product", product, Fraction("2.7e14"), "D-independent part of the Matveev bound", prec)

    r.add("lambda2_constant", phi + 6, Fraction("7.62"),
          "(phi + 2)/phi^(2n) + 4/phi^(k/2) < 7.62/phi^(k/2) since 2n > k/2", prec)
    n_min = CertReal.exact(363, prec)
    r.add("log_D_simplification", 1 + (CertReal.exact("2.52", prec) * 363 + 2).log(),
          Fraction("1.4") * n_min.log(), "1 + log(2.52n + 2) < 1.4 log n for n >= 363; gap increasing", prec)
    k_const = (2 / log_phi) * (Fraction("2.7e14") * CertReal.exact("1.4", prec)
                               + CertReal.exact("7.62", prec).log() / n_min.log())
    r.values["k_over_log_n_constant"] = k_const
    r.add("k_over_log_n_constant", k_const, Fraction("1.58e15"), "k < 1.58e15 log n", prec)

    k361 = CertReal.exact(361, prec)
    log_n_sum = CertReal.exact(N_BOUND_COEFF, prec).log() + 5 * k361.log() + 3 * k361.log().log()
    r.add("log_n_simplification", log_n_sum, Fraction("12.5") * k361.log(),
          "log(5.28e16 k^5 log^3 k) < 12.5 log k at k = 361; gap increasing", prec)
    r.add("k_over_log_k_constant", CertReal.exact(Fraction("1.58e15") * Fraction("12.5"), prec),
          Fraction("2e16"), "k < 2e16 log k", prec)
    k_bound = sanchez_luca_invert(1, CertReal.exact(Fraction("2e16"), prec))
    r.values["k_bound"] = k_bound
    r.add("k_bound", k_bound, Fraction("1.51e18"), "k < 2 S log S with S = 2e16", prec)
    r.add("golden_approx_applicable", n_bound_for_k(361, prec), phi ** 180 * phi.sqrt(),
          "n < 5.28e16 k^5 log^3 k < phi^(k/2) at k = 361; gap increasing", prec)
    r.add("gamma2_a", CertReal.exact("7.62", prec) / (phi ** 180 * phi.sqrt()), Fraction("0.1"),
          "7.62/phi^(k/2) < 0.1 for k >= 361", prec)
    r.add("deweger_large", deweger_factor(CertReal.exact("0.1", prec)) * CertReal.exact("7.62", prec),
          Fraction("8.1"), "|Gamma_2| < 8.1/phi^(k/2)", prec)
    r.add("A_large", CertReal.exact("8.1", prec) / log_phi, Fraction("16.84"),
          "dividing by log phi gives A = 16.84", prec)

    k_max = math.floor(k_bound.upper)
    r.integers["k_max"] = k_max
    n_max, m_max = index_bounds(k_max)
    r.integers["n_max"] = n_max
    r.integers["m_max"] = m_max
    r.values["fixed_point_reference"] = fixed_point_k_bound(Fraction("2e16"), prec)
    return r


def replay_small_k_reduction_constants(prec: int = DEFAULT_PREC) -> BoundReplay:
    """Constants of the small-k linearization: 2.4/alpha^3 < 0.77, 4.59 and A = 12.1."""
    ctx = AlgebraicContext.build(None, prec)
    log_alpha = ctx.alpha.log()
    r = BoundReplay()
    r.add("gamma1_a", CertReal.exact("2.4", prec) / ctx.alpha ** 3, Fraction("0.77"),
          "2.4/alpha^m < 0.77 for m >= 3", prec)
    r.add("deweger_small", deweger_factor(CertReal.exact("0.77", prec)) * CertReal.exact("2.4", prec),
          Fraction("4.59"), "|Gamma_1| < 4.59/alpha^m", prec)
    r.add("A_small", CertReal.exact("4.59", prec) / log_alpha, Fraction("12.1"),
          "dividing by log alpha gives A = 12.1", prec)
    return r


def fixed_point_k_bound(c: Fraction, prec: int = DEFAULT_PREC, iterations: int = 200) -> CertReal:
    """Largest solution of k = c log k, by iterating k <- c log k from above.

    Every k with k < c log k lies below this value.  The replay records it next
    to the inverted bound, for comparison only.
    """
    c_ball = CertReal.exact(c, prec)
    k = c_ball * c_ball.log() * 2  # above the fixed point: 2c log c > c log(2c log c) for c > e^2
    for _ in range(iterations):
        nxt = c_ball * k.log()
        if nxt.upper >= k.lower:
            break
        k = CertReal.exact(nxt.upper, prec)
    return k
