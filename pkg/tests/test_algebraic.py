from fractions import Fraction

import mpmath
import numpy as np
import pytest

from pellnarayana.algebraic import (
    C_ALPHA_MINPOLY,
    AlgebraicContext,
    alpha_root,
    c_alpha,
    certified_context,
    g_k_at,
    gamma_bracket,
    gamma_of,
    golden_approx_error,
    golden_ratio,
    height_c_alpha,
    height_eta1_bound,
    height_from_minpoly,
    kpell_charpoly,
    log_height_gamma,
    minor_root_moduli,
)
from pellnarayana.certreal import CertReal, PrecisionPolicy
from pellnarayana.errors import PrecisionCapExceeded


@pytest.fixture(autouse=True)
def mp_precision():
    # other modules change the global mpmath precision
    with mpmath.workdps(60):
        yield


def mp(f: Fraction):
    return mpmath.mpf(f.numerator) / f.denominator


def close(ball: CertReal, ref, tol=mpmath.mpf(10) ** -50) -> bool:
    return abs(mp(ball.midpoint) - ref) <= mp(ball.radius) + tol


def mp_gamma(k):
    return mpmath.findroot(lambda x: x**k - 2 * x ** (k - 1) - sum(x**j for j in range(k - 1)), 2.6)


def test_charpoly_shape():
    assert kpell_charpoly(4) == [1, -2, -1, -1, -1]
    with pytest.raises(ValueError):
        kpell_charpoly(1)


def test_gamma4_interval_from_exact_signs():
    g = gamma_of(4)
    assert g > Fraction("2.59") and g < Fraction("2.60")


@pytest.mark.parametrize("k", [2, 3, 4, 5, 10, 17, 30, 60])
def test_gamma_against_mpmath(k):
    assert close(gamma_of(k), mp_gamma(k))


def test_gamma_for_pell_is_one_plus_sqrt2():
    assert close(gamma_of(2, 256), 1 + mpmath.sqrt(2))


@pytest.mark.parametrize("k", range(2, 61))
def test_localization_and_g_k_range(k):
    ctx = certified_context(k)
    lo, hi = gamma_bracket(k, ctx.prec)
    assert ctx.gamma > lo and ctx.gamma < hi
    assert ctx.g_k_gamma > Fraction("0.276") and ctx.g_k_gamma < Fraction(1, 2)
    assert all(ctx.invariants().values())


def test_localization_needs_escalation_for_large_k():
    assert not AlgebraicContext.build(360, 256).invariants()["gamma_localization"]
    ctx = certified_context(360)
    assert ctx.prec == 512 and all(ctx.invariants().values())
    with pytest.raises(PrecisionCapExceeded):
        certified_context(360, PrecisionPolicy(256, 256))


def test_g_k_formula_against_mpmath():
    for k in (2, 4, 9):
        gam = mp_gamma(k)
        ref = (gam - 1) / ((k + 1) * gam**2 - 3 * k * gam + k - 1)
        assert close(g_k_at(k, gamma_of(k)), ref)
    # k = 2: g_2(1 + sqrt 2) = 1/(2 sqrt 2)
    assert close(AlgebraicContext.build(2).g_k_gamma, 1 / (2 * mpmath.sqrt(2)))


def test_alpha_and_beta_against_polyroots():
    roots = mpmath.polyroots([1, -1, 0, -1], maxsteps=100, extraprec=100)
    real = max(roots, key=lambda r: mpmath.re(r))
    complex_pair = [r for r in roots if abs(mpmath.im(r)) > 0.1]
    alpha, beta = alpha_root(256)
    assert close(alpha, mpmath.re(real))
    assert close(beta, abs(complex_pair[0]))
    assert abs(alpha.mid_float() - 1.46557) < 5e-6
    assert abs(beta.mid_float() - 0.826031) < 5e-6


def test_c_alpha_minpoly_and_value():
    ctx = AlgebraicContext.build(None)
    c = ctx.c_alpha
    a, b, d, e = C_ALPHA_MINPOLY
    assert (a * c**3 + b * c**2 + d * c + e).contains(0)
    assert c > 0 and c < 1
    assert abs(c.mid_float() - 0.19425) < 1e-5
    assert c_alpha(ctx.alpha).overlaps(c)


def test_minpoly_of_c_alpha_has_roots_inside_unit_disc():
    assert np.all(np.abs(np.roots(C_ALPHA_MINPOLY)) < 1)


def test_heights_of_phi_alpha_c_alpha():
    prec = 256
    phi = golden_ratio(prec)
    h_phi = height_from_minpoly(1, [phi, 1 / phi])
    assert (h_phi - phi.log() / 2).contains(0)
    ctx = AlgebraicContext.build(None, prec)
    h_alpha = height_from_minpoly(1, [ctx.alpha, ctx.beta_modulus, ctx.beta_modulus])
    assert (h_alpha - ctx.alpha.log() / 3).contains(0)
    assert (height_c_alpha(ctx.c_alpha) - CertReal.exact(31, prec).log() / 3).contains(0)


def test_height_of_gamma_is_log_gamma_over_k():
    for k in (2, 5, 40):
        assert (log_height_gamma(k) - gamma_of(k).log() / k).contains(0)


def test_eta1_height_bound():
    b2 = height_eta1_bound(2)
    assert abs(b2.mid_float() - 7.19) < 0.01 and b2 < Fraction("7.209")
    assert height_eta1_bound(10) < Fraction("119.7")
    for k in range(2, 361):
        height_eta1_bound(k, 128)


@pytest.mark.parametrize("k", range(30, 41))
def test_golden_approximation_error(k):
    ctx = AlgebraicContext.build(k, 256)
    xi = golden_approx_error(k, k + 2, ctx)
    phi = ctx.phi
    assert abs(xi) < 4 / (phi ** (k // 2) * (phi.sqrt() if k % 2 else 1))


@pytest.mark.parametrize("k", [3, 5, 8, 13, 25])
def test_minor_roots_inside_unit_disc(k):
    moduli = minor_root_moduli(k)
    assert len(moduli) == k - 1 and np.all(moduli < 1)
