"""Dujella-Petho reduction and the two reduction campaigns of the proof.

For ``0 < |r tau - s + mu| < A C^-t`` with ``r <= M``: pick a convergent
``p/q`` of ``tau`` with ``q > 6M`` and ``eps = ||mu q|| - M ||tau q|| > 0``;
then every solution has ``t < log(A q / eps) / log C``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .algebraic import AlgebraicContext
from .certreal import (
    DEFAULT_POLICY,
    CertReal,
    PrecisionPolicy,
    Provider,
    Sign,
    constant,
    dist_to_nearest_int,
)
from .contfrac import ContinuedFraction, iter_quotients
from .errors import (
    ChainDidNotClose,
    EpsilonNeverPositive,
    IndeterminateSign,
    InsufficientPrecision,
    PrecisionCapExceeded,
)
from .linforms import index_bounds
from .sequences import NARAYANA_EXPONENT_SHIFT

CONVERGENT_BUDGET = 200
SMALL_K_A = Fraction("12.1")
LARGE_K_A = Fraction("16.84")
SMALL_K_RANGE = (2, 360)


@dataclass(frozen=True)
class ReductionInstance:
    tau: Provider
    mu: Provider
    A: Provider
    C: Provider
    M: int
    label: str = ""

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be a positive integer")


@dataclass(frozen=True)
class ReductionOutcome:
    q: int
    convergent_index: int
    epsilon: CertReal
    t_bound: CertReal
    attempts: int
    M: int
    precision: int
    label: str = ""

    @property
    def t_max(self) -> int:
        """Largest integer t the lemma still allows: floor of the bound's upper edge."""
        return math.floor(self.t_bound.upper)


class _BudgetExhausted(Exception):
    pass


def _epsilon(tau: CertReal, mu: CertReal, q: int, M: int) -> CertReal:
    d_mu, _ = dist_to_nearest_int(mu * q)
    d_tau, _ = dist_to_nearest_int(tau * q)
    return d_mu - M * d_tau


def epsilon_at(inst: ReductionInstance, q: int, prec: int) -> CertReal:
    """||mu q|| - M ||tau q|| for an arbitrary positive integer q."""
    return _epsilon(inst.tau(prec), inst.mu(prec), q, inst.M)


def _attempt(inst: ReductionInstance, prec: int, budget: int) -> ReductionOutcome:
    tau, mu = inst.tau(prec), inst.mu(prec)
    threshold = 6 * inst.M
    cf = ContinuedFraction(source_prec=prec)
    attempts = 0
    for a in iter_quotients(tau):
        _, q = cf.append(a)
        if q <= threshold:
            continue
        attempts += 1
        eps = _epsilon(tau, mu, q, inst.M)
        sign = eps.sign()
        if sign is Sign.POSITIVE:
            A, C = inst.A(prec), inst.C(prec)
            t_bound = (A * q / eps).log() / C.log()
            return ReductionOutcome(
                q=q,
                convergent_index=len(cf.convergents) - 1,
                epsilon=eps,
                t_bound=t_bound,
                attempts=attempts,
                M=inst.M,
                precision=prec,
                label=inst.label,
            )
        if sign is not Sign.NEGATIVE and sign is not Sign.ZERO_CANDIDATE:
            raise IndeterminateSign(f"sign of epsilon undecided at q = {q}")
        if attempts >= budget:
            raise _BudgetExhausted
    raise AssertionError("unreachable")


def dujella_petho(
    inst: ReductionInstance,
    policy: PrecisionPolicy = DEFAULT_POLICY,
    budget: int = CONVERGENT_BUDGET,
) -> ReductionOutcome:
    """First convergent with ``q > 6M`` and certified ``eps > 0``, with its t-bound.

    Undecidable signs or quotients escalate precision; after ``budget``
    convergents with ``eps <= 0`` the search is retried once at doubled
    precision before giving up.
    """
    exhausted_once = False
    last = None
    for prec in policy.levels():
        try:
            return _attempt(inst, prec, budget)
        except InsufficientPrecision as exc:
            last = exc
        except _BudgetExhausted:
            if exhausted_once:
                raise EpsilonNeverPositive(
                    f"no convergent among {budget} past 6M gave a positive epsilon"
                ) from None
            exhausted_once = True
    if exhausted_once:
        raise EpsilonNeverPositive(f"budget exhausted and precision cap {policy.cap} reached")
    raise PrecisionCapExceeded(f"precision cap of {policy.cap} bits reached: {last}") from last


# Small k: tau = log gamma / log alpha, mu = log(g_k(gamma) / C_alpha) / log alpha - 3.
# The linear form is n tau - (m + 3) + mu with right-hand side A alpha^-(m+1), so the
# reduced bound applies to m + 1 and, a fortiori, to m.


def small_k_instance(k: int, M: int | None = None) -> ReductionInstance:
    lo, hi = SMALL_K_RANGE
    if not lo <= k <= hi:
        raise ValueError(f"small-k reduction covers {lo} <= k <= {hi}")
    if M is None:
        M, _ = index_bounds(k)

    def tau(prec):
        ctx = AlgebraicContext.build(k, prec)
        return ctx.gamma.log() / ctx.alpha.log()

    def mu(prec):
        ctx = AlgebraicContext.build(k, prec)
        return (ctx.g_k_gamma / ctx.c_alpha).log() / ctx.alpha.log() - NARAYANA_EXPONENT_SHIFT

    return ReductionInstance(
        tau=tau,
        mu=mu,
        A=constant(SMALL_K_A),
        C=lambda prec: AlgebraicContext.build(None, prec).alpha,
        M=M,
        label=f"small-k:{k}",
    )


def small_k_reduce(k: int, policy: PrecisionPolicy = DEFAULT_POLICY) -> ReductionOutcome:
    """Reduce the bound on m for one k in [2, 360]; the outcome's t-bound bounds m."""
    return dujella_petho(small_k_instance(k), policy)


# Large k: tau = log alpha / log phi, mu = log(alpha^3 C_alpha (phi + 2)) / log phi, r = m


def large_k_instance(M: int) -> ReductionInstance:
    def tau(prec):
        ctx = AlgebraicContext.build(None, prec)
        return ctx.alpha.log() / ctx.phi.log()

    def mu(prec):
        ctx = AlgebraicContext.build(None, prec)
        shifted = ctx.alpha ** NARAYANA_EXPONENT_SHIFT * ctx.c_alpha * (ctx.phi + 2)
        return shifted.log() / ctx.phi.log()

    return ReductionInstance(
        tau=tau,
        mu=mu,
        A=constant(LARGE_K_A),
        C=lambda prec: AlgebraicContext.build(None, prec).phi,
        M=M,
        label="large-k",
    )


@dataclass(frozen=True)
class ChainStage:
    """One pass of the large-k reduction: k <= k_in gives m <= M, reduced to k <= k_out."""

    k_in: int
    n_bound: int
    M: int
    outcome: ReductionOutcome
    k_out: int


@dataclass
class LargeKChain:
    stages: list[ChainStage] = field(default_factory=list)

    @property
    def final_k_bound(self) -> int:
        return self.stages[-1].k_out

    @property
    def closed(self) -> bool:
        return bool(self.stages) and self.final_k_bound <= SMALL_K_RANGE[1]


def large_k_chain(
    initial_k_bound: int,
    policy: PrecisionPolicy = DEFAULT_POLICY,
    min_stages: int = 3,
    max_stages: int = 10,
) -> LargeKChain:
    """Iterate the reduction from ``k <= initial_k_bound`` until k <= 360 is forced.

    Each stage turns the current k-bound into n and m bounds through
    the index bounds (m < n / 0.39), reduces with M = m bound, and reads off
    k < 2 t since the exponent in the linear form is k/2.  At least
    ``min_stages`` passes are run even if an earlier one already closes,
    while the bound keeps dropping.
    """
    chain = LargeKChain()
    k_bound = initial_k_bound
    for _ in range(max_stages):
        n_bound, m_bound = index_bounds(k_bound, policy)
        outcome = dujella_petho(large_k_instance(m_bound), policy)
        # k/2 < t_bound, so k <= floor(2 * upper edge)
        k_out = math.floor(2 * outcome.t_bound.upper)
        chain.stages.append(ChainStage(k_bound, n_bound, m_bound, outcome, k_out))
        if k_out >= k_bound:
            break
        if k_out <= SMALL_K_RANGE[1] and len(chain.stages) >= min_stages:
            break
        k_bound = k_out
    if chain.closed:
        return chain
    raise ChainDidNotClose(
        f"large-k chain stalled at k <= {chain.stages[-1].k_out} after {len(chain.stages)} stages"
    )
