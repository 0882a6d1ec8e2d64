"""Acceptance criteria, one test each; every test also writes a PASS/FAIL summary line."""

import json
import subprocess
import sys
import time
from fractions import Fraction
from math import gcd

from oracles import reduction_soundness
from pellnarayana.algebraic import (
    C_ALPHA_MINPOLY,
    AlgebraicContext,
    alpha_root,
    certified_context,
    gamma_bracket,
    golden_approx_error,
)
from pellnarayana.certreal import CertReal
from pellnarayana.contfrac import expand_from_ball
from pellnarayana.expr import provider
from pellnarayana.linforms import deweger_factor, matveev_leading, replay_large_k_bound
from pellnarayana.pipeline import decode_ball, load_certificate, parse_certificate, validate_certificate
from pellnarayana.reduction import large_k_chain
from pellnarayana.search import fibonacci_window_hits, intersect_box, intersect_merge, theorem_solution_set
from pellnarayana.sequences import NarayanaSequence, iter_kpell, kpell, kpell_binet_error, narayana, narayana_binet


def within(ball: CertReal, target, rel) -> bool:
    target, rel = Fraction(target), Fraction(rel)
    return ball.lower >= target * (1 - rel) and ball.upper <= target * (1 + rel)


def timed_cli(*argv):
    """Run the command-line tool in a fresh interpreter so no cache is warm."""
    start = time.perf_counter()
    done = subprocess.run([sys.executable, "-m", "pellnarayana", *argv], capture_output=True, text=True, check=False)
    return done, time.perf_counter() - start


def test_criterion_1_full_replay(report, tmp_path):
    path = tmp_path / "cert.json"
    done, elapsed = timed_cli("verify", "--output", str(path))
    code = done.returncode
    summary = json.loads(done.stdout)
    cert = load_certificate(path)
    found = {tuple(s) for s in cert.data["verdict"]["solution_set"]}
    exceptional = [r for r in cert.data["search"]["filtered"]]
    search_start = time.perf_counter()
    intersect_box(2, 360, 1, 265, 0, 329, filtered=False)
    search_time = time.perf_counter() - search_start
    ok = (
        code == 0
        and summary["theorem_holds"] is True
        and cert.verdict
        and found == theorem_solution_set(2, 360)
        and exceptional == [{"n": 6, "k": 4, "m": 13, "value": "88", "kind": "Exceptional"}]
        and kpell(4, 6) == narayana(13) == 88
        and elapsed <= 30 * 60
        and search_time <= 60
    )
    report("1 full replay", ok, f"{len(found)} solutions, run {elapsed:.1f}s, search {search_time:.2f}s")
    assert ok


def test_criterion_2_small_k_bound(report, full_run):
    cert, _ = full_run
    recs = cert.data["small_k"]
    q_ok = all(int(r["q"]) > 6 * int(r["M_k"]) for r in recs)
    eps_ok = all(decode_ball(r["epsilon"]) > 0 for r in recs)
    worst = max(decode_ball(r["t_bound"]).upper for r in recs)
    ok = len(recs) == 359 and q_ok and eps_ok and worst <= 329 and cert.data["small_k_max_bound"] <= 329
    report("2 small-k bound <= 329", ok, f"max bound {float(worst):.2f}")
    assert ok


def test_criterion_3_large_k_chain(report):
    k0 = replay_large_k_bound().integers["k_max"]
    chain = large_k_chain(k0)
    s1, s2, s3 = chain.stages
    done, elapsed = timed_cli("reduce", "large-k-chain")
    cli_k = [json.loads(line)["k_out"] for line in done.stdout.splitlines()]
    checks = {
        "stage 1 t < 556": s1.outcome.t_bound.upper < 556,
        "stage 1 k <= 1112": s1.k_out <= 1112,
        "stage 2 k <= 368 (+1%)": s2.k_out <= Fraction(368) * Fraction("1.01"),
        "stage 3 k <= 342 (+1%)": s3.k_out <= Fraction(342) * Fraction("1.01"),
        "runtime <= 60s": elapsed <= 60 and cli_k == [s.k_out for s in chain.stages],
    }
    ok = all(checks.values())
    failed = [name for name, v in checks.items() if not v]
    detail = (
        f"t1={s1.outcome.t_bound.mid_float():.3f} k={s1.k_out}, k2={s2.k_out}, k3={s3.k_out}, {elapsed:.1f}s"
        + (f"; failed: {', '.join(failed)}" if failed else "")
    )
    report("3 large-k chain", ok, detail)
    assert ok, detail


def test_criterion_4_matveev_constants(report):
    lead = matveev_leading(3)
    b = [CertReal.exact(x) for x in ("16.8", "1.45", "0.77")]
    product = lead * 36 * (1 + CertReal.exact(6).log()) * b[0] * b[1] * b[2]
    ok = within(lead, "1.432e11", "1e-3") and within(product, "2.7e14", "1e-2")
    report("4 Matveev constants", ok, f"{lead.mid_float():.4e}, {product.mid_float():.4e}")
    assert ok


def test_criterion_5_constant_enclosures(report):
    alpha, beta = alpha_root(256)
    ctx = AlgebraicContext.build(None)
    c = ctx.c_alpha
    a3, a2, a1, a0 = C_ALPHA_MINPOLY
    checks = [
        abs(alpha - Fraction("1.46557")) < Fraction("5e-6"),
        abs(beta - Fraction("0.826031")) < Fraction("5e-6"),
        (a3 * c**3 + a2 * c**2 + a1 * c + a0).contains(0),
        tuple(C_ALPHA_MINPOLY) == (31, -31, 10, -1),
    ]
    for k in range(2, 61):
        kc = certified_context(k)
        lo, hi = gamma_bracket(k, kc.prec)
        checks += [kc.gamma > lo, kc.gamma < hi, kc.g_k_gamma > Fraction("0.276"), kc.g_k_gamma < Fraction(1, 2)]
    ok = all(checks)
    report("5 constant enclosures", ok, f"{len(checks)} checks")
    assert ok


def _cf_laws(expression) -> bool:
    x = provider(expression)(1024)
    conv = expand_from_ball(x, 10**100).convergents
    for i, (p, q) in enumerate(conv):
        if gcd(p, q) != 1:
            return False
        if i and p * conv[i - 1][1] - conv[i - 1][0] * q != (-1) ** (i - 1):
            return False
        if i + 1 < len(conv) and not abs(x - Fraction(p, q)) < Fraction(1, q * conv[i + 1][1]):
            return False
    return len(conv) > 20


def test_criterion_6_property_suites(report):
    parts = {}
    ok_pell = True
    for k in range(2, 31):
        kc = AlgebraicContext.build(k, 1024)
        for n, p in iter_kpell(k):
            if n > 300:
                break
            ok_pell &= bool(kc.gamma ** (n - 2) <= p <= kc.gamma ** (n - 1)) and kpell_binet_error(k, n, kc) < 0.5
    parts["k-Pell sandwich + Binet"] = ok_pell
    base = AlgebraicContext.build(None, 1024)
    nar = NarayanaSequence()
    parts["Narayana sandwich + Binet"] = all(
        base.alpha ** (m - 2) <= nar[m] <= base.alpha ** (m - 1) and narayana_binet(m, base) == nar[m]
        for m in range(1, 501)
    )
    xi_ok = True
    for k in range(30, 41):
        kc = AlgebraicContext.build(k, 256)
        half_power = kc.phi ** (k // 2) * (kc.phi.sqrt() if k % 2 else 1)
        xi_ok &= bool(abs(golden_approx_error(k, k + 2, kc)) < 4 / half_power)
    parts["golden approximation"] = xi_ok
    parts["CF laws"] = all(_cf_laws(e) for e in ("sqrt(2)", "log(alpha)/log(phi)", "gamma(4)", "exp(1)"))
    tested, enumerated = reduction_soundness(7, 120)
    parts["reduction soundness"] = tested >= 100 and enumerated >= 100
    parts["de Weger factors"] = bool(
        deweger_factor(CertReal.exact("0.77")) * CertReal.exact("2.4") < Fraction("4.59")
        and deweger_factor(CertReal.exact("0.1")) * CertReal.exact("7.62") < Fraction("8.1")
    )
    ok = all(parts.values())
    failed = [name for name, v in parts.items() if not v]
    report("6 property suites", ok, f"{len(parts)} suites, {tested} reduction instances"
           + (f"; failed: {', '.join(failed)}" if failed else ""))
    assert ok, failed


def test_criterion_7_search_equivalence(report):
    same = all(intersect_box(k, k, 1, 265, 0, 329, filtered=False) == intersect_merge(k, 265, 329) for k in range(2, 51))
    empty = fibonacci_window_hits(5, 200, 1000) == []
    ok = same and empty
    report("7 search oracle equivalence", ok)
    assert ok


def test_criterion_8_certificate_round_trip(report, full_run):
    cert, _ = full_run
    text = cert.to_json()
    again = parse_certificate(text)
    identical = again.to_json() == text
    problems = validate_certificate(again)
    ok = identical and problems == []
    report("8 certificate round trip", ok, f"{len(text)} bytes" + (f"; {problems[:3]}" if problems else ""))
    assert ok
