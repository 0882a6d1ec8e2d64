"""End-to-end replay of the resolution, certificate assembly and re-validation."""

from __future__ import annotations

import datetime as _dt
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from pathlib import Path

from . import __version__
from .algebraic import G_K_LOWER, G_K_UPPER, certified_context, g_k_at, gamma_bracket, kpell_charpoly
from .certreal import CertReal, PrecisionPolicy, poly_sign_at
from .errors import ProverError
from .linforms import (
    index_bounds,
    m_window,
    replay_large_k_bound,
    replay_small_k_bound,
    replay_small_k_reduction_constants,
)
from .reduction import (
    SMALL_K_RANGE,
    dujella_petho,
    epsilon_at,
    large_k_chain,
    large_k_instance,
    small_k_instance,
)
from .search import fibonacci_window_hits, intersect_box, theorem_solution_set

SCHEMA = "pnp-cert/1"
MODES = ("full", "small-k", "large-k", "search-only")
REFERENCE_BOX = {"k": (2, 360), "n": (1, 265), "m": (0, 329)}
SMALL_K_CEILING = 329
FIB_WINDOW = (5, 200, 1000)


@dataclass(frozen=True)
class RunConfig:
    k_range: tuple[int, int] = SMALL_K_RANGE
    precision_start: int = 256
    precision_cap: int = 1 << 20
    threads: int = 1
    output: str | None = None
    mode: str = "full"
    search_box: dict | None = None  # override of {"k": .., "n": .., "m": ..}

    def __post_init__(self):
        lo, hi = self.k_range
        if not SMALL_K_RANGE[0] <= lo <= hi <= SMALL_K_RANGE[1]:
            raise ValueError(f"k_range must lie inside {SMALL_K_RANGE}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.threads < 1:
            raise ValueError("threads must be positive")
        PrecisionPolicy(self.precision_start, self.precision_cap)

    @property
    def policy(self) -> PrecisionPolicy:
        return PrecisionPolicy(self.precision_start, self.precision_cap)


# ---------------------------------------------------------------- encoding


def _scaled_round(x: Fraction, scale: int, up: bool = False) -> int:
    v = x * (Fraction(10) ** scale)
    return math.ceil(v) if up else round(v)


def _dec(n: int, scale: int) -> str:
    # tuple construction is exact; scaleb would round to the context precision
    return str(Decimal((int(n < 0), tuple(int(c) for c in str(abs(n))), -scale)))


def encode_ball(x: CertReal) -> dict:
    """{mid, rad} decimal strings whose interval contains the ball.

    The midpoint keeps three guard digits past the radius (or as many digits
    as the ball has bits when it is exact); the rounding error is folded into
    the radius, which is rounded up to three digits.
    """
    mid, rad = x.midpoint, x.radius
    digits = math.ceil(x.prec * 0.30103) + 4
    mag = 0 if mid == 0 else math.floor(math.log10(abs(mid.numerator)) - math.log10(mid.denominator))
    scale = digits - mag
    if rad:
        scale = min(scale, 3 - math.floor(math.log10(rad.numerator) - math.log10(rad.denominator)))
    mid_s = _dec(_scaled_round(mid, scale), scale) if mid else "0"
    err = rad + abs(mid - Fraction(mid_s))
    if err == 0:
        rad_s = "0"
    else:
        r_mag = math.floor(math.log10(err.numerator) - math.log10(err.denominator))
        r_scale = 2 - r_mag
        rad_s = _dec(_scaled_round(err, r_scale, up=True), r_scale)
    return {"mid": mid_s, "rad": rad_s}


def decode_ball(d: dict, prec: int = 1024) -> CertReal:
    mid, rad = Fraction(d["mid"]), Fraction(d["rad"])
    return CertReal.from_interval(mid - rad, mid + rad, prec)


def _outcome_fields(outcome) -> dict:
    return {
        "q": str(outcome.q),
        "convergent_index": outcome.convergent_index,
        "attempts": outcome.attempts,
        "precision": outcome.precision,
        "epsilon": encode_ball(outcome.epsilon),
        "t_bound": encode_ball(outcome.t_bound),
    }


def _replay_fields(replay) -> dict:
    return {
        c.label: {"lhs": encode_ball(_as_ball(c.lhs)), "rhs": encode_ball(_as_ball(c.rhs)), "holds": c.holds}
        for c in replay.checks
    }


def _as_ball(v) -> CertReal:
    return v if isinstance(v, CertReal) else CertReal.exact(v, 256)


# ---------------------------------------------------------------- stages


@dataclass
class Certificate:
    data: dict
    diagnostics: list[dict] = field(default_factory=list)

    @property
    def verdict(self) -> bool:
        return bool(self.data.get("verdict", {}).get("theorem_holds"))

    def to_json(self) -> str:
        body = dict(self.data, diagnostics=self.diagnostics)
        return canonical_json(body)


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True) + "\n"


def _small_k_record(k: int, start: int, cap: int) -> dict:
    policy = PrecisionPolicy(start, cap)
    ctx = certified_context(k, policy)
    M, _ = index_bounds(k, policy)
    outcome = dujella_petho(small_k_instance(k, M), policy)
    rec = {"k": k, "M_k": str(M), "gamma": encode_ball(ctx.gamma),
           "g_k_gamma": encode_ball(ctx.g_k_gamma), "context_precision": ctx.prec}
    rec.update(_outcome_fields(outcome))
    rec["t_max"] = outcome.t_max
    return rec


def _small_k_safe(args):
    k, start, cap = args
    try:
        return _small_k_record(k, start, cap), None
    except ProverError as exc:
        return None, {"stage": f"small-k:{k}", "error": type(exc).__name__, "message": str(exc)}


def run_small_k(cfg: RunConfig) -> tuple[dict, list[dict]]:
    """Per-k reductions over cfg.k_range, merged in k order."""
    jobs = [(k, cfg.precision_start, cfg.precision_cap) for k in range(cfg.k_range[0], cfg.k_range[1] + 1)]
    if cfg.threads > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(_small_k_safe, jobs, chunksize=4))
    else:
        results = [_small_k_safe(j) for j in jobs]
    records = [r for r, _ in results if r is not None]
    diagnostics = [d for _, d in results if d is not None]
    fragment = {"records": records}
    try:
        replay = replay_small_k_bound(cfg.precision_start)
        constants = replay_small_k_reduction_constants(cfg.precision_start)
        fragment["bound_checks"] = _replay_fields(replay) | _replay_fields(constants)
        for r in (replay, constants):
            for c in r.failed():
                diagnostics.append({"stage": "small-k-bounds", "error": "BoundFailed", "message": c.label})
    except ProverError as exc:
        diagnostics.append({"stage": "small-k-bounds", "error": type(exc).__name__, "message": str(exc)})
    if records:
        m_bound = max(r["t_max"] for r in records)
        fragment["max_bound"] = m_bound
        fragment["implied_box"] = {"m": [0, m_bound], "n": [1, math.floor(Fraction(2 * m_bound + 3, 2) / Fraction(5, 4))]}
    return fragment, diagnostics


def run_large_k(cfg: RunConfig) -> tuple[dict, list[dict]]:
    diagnostics: list[dict] = []
    fragment: dict = {}
    policy = cfg.policy
    try:
        replay = replay_large_k_bound(cfg.precision_start)
        for c in replay.failed():
            diagnostics.append({"stage": "large-k-bounds", "error": "BoundFailed", "message": c.label})
        k_max = replay.integers["k_max"]
        fragment["matveev_stage"] = {
            "k_bound_initial": str(k_max),
            "n_bound": str(replay.integers["n_max"]),
            "m_bound": str(replay.integers["m_max"]),
            "checks": _replay_fields(replay),
        }
        chain = large_k_chain(k_max, policy)
        fragment["chain"] = [
            dict(_outcome_fields(s.outcome), k_in=str(s.k_in), n_bound=str(s.n_bound), M=str(s.M), k_out=s.k_out)
            for s in chain.stages
        ]
        fragment["final_k_bound"] = chain.final_k_bound
    except ProverError as exc:
        diagnostics.append({"stage": "large-k", "error": type(exc).__name__, "message": str(exc)})
    return fragment, diagnostics


def _search_box(cfg: RunConfig, implied: dict | None) -> dict:
    if cfg.search_box is not None:
        return {key: list(cfg.search_box.get(key, REFERENCE_BOX[key])) for key in ("k", "n", "m")}
    box = {key: list(v) for key, v in REFERENCE_BOX.items()}
    box["k"] = list(cfg.k_range)
    if implied:
        box["n"][1] = max(box["n"][1], implied["n"][1])
        box["m"][1] = max(box["m"][1], implied["m"][1])
    return box


def run_search(box: dict) -> tuple[dict, list[dict]]:
    (k_lo, k_hi), (n_lo, n_hi), (m_lo, m_hi) = box["k"], box["n"], box["m"]
    unfiltered = intersect_box(k_lo, k_hi, n_lo, n_hi, m_lo, m_hi, filtered=False)
    filtered = intersect_box(k_lo, k_hi, n_lo, n_hi, m_lo, m_hi, filtered=True)
    fib_hits = fibonacci_window_hits(*FIB_WINDOW)
    fragment = {
        "box": box,
        "records": [{"n": r.n, "k": r.k, "m": r.m, "value": str(r.value), "kind": r.kind.value} for r in unfiltered],
        "filtered": [{"n": r.n, "k": r.k, "m": r.m, "value": str(r.value), "kind": r.kind.value} for r in filtered],
        "fibonacci_window": {"n": list(FIB_WINDOW[:2]), "m_max": FIB_WINDOW[2], "hits": [list(h) for h in fib_hits]},
    }
    diagnostics = []
    if fib_hits:
        diagnostics.append({"stage": "fibonacci-window", "error": "UnexpectedSolution", "message": str(fib_hits)})
    return fragment, diagnostics


def _coverage_problems(box: dict, implied: dict | None) -> list[str]:
    problems = []
    if box["k"][0] > SMALL_K_RANGE[0] or box["k"][1] < SMALL_K_RANGE[1]:
        problems.append(f"k range {box['k']} misses part of {list(SMALL_K_RANGE)}")
    if box["n"][0] > 1 or box["m"][0] > 0:
        problems.append("box does not start at n = 1, m = 0")
    if implied is None:
        problems.append("no recorded small-k bounds to audit against")
    else:
        if box["n"][1] < implied["n"][1]:
            problems.append(f"n range stops at {box['n'][1]} below the proved bound {implied['n'][1]}")
        if box["m"][1] < implied["m"][1]:
            problems.append(f"m range stops at {box['m'][1]} below the proved bound {implied['m'][1]}")
    return problems


def verify_theorem(cfg: RunConfig) -> Certificate:
    """Run the configured stages and assemble the certificate with its verdict."""
    data = {
        "schema": SCHEMA,
        "metadata": {
            "tool_version": __version__,
            "precision_policy": {"start": cfg.precision_start, "cap": cfg.precision_cap},
            "k_range": list(cfg.k_range),
            "mode": cfg.mode,
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        },
    }
    diagnostics: list[dict] = []
    implied = None
    if cfg.mode in ("full", "small-k"):
        small, diag = run_small_k(cfg)
        diagnostics += diag
        data["small_k"] = small["records"]
        data["small_k_bound_checks"] = small.get("bound_checks", {})
        if "max_bound" in small:
            data["small_k_max_bound"] = small["max_bound"]
            if small["max_bound"] > SMALL_K_CEILING:
                diagnostics.append({"stage": "small-k", "error": "BoundTooLarge",
                                    "message": f"max bound {small['max_bound']} exceeds {SMALL_K_CEILING}"})
            implied = small["implied_box"]
            data["implied_box"] = implied
    if cfg.mode in ("full", "large-k"):
        large, diag = run_large_k(cfg)
        diagnostics += diag
        data["large_k"] = large
    solution_set = []
    if cfg.mode in ("full", "search-only"):
        box = _search_box(cfg, implied)
        search, diag = run_search(box)
        diagnostics += diag
        data["search"] = search
        solution_set = sorted([r["n"], r["k"], r["m"]] for r in search["records"])
        if cfg.mode == "full":
            for problem in _coverage_problems(box, implied):
                diagnostics.append({"stage": "search-coverage", "error": "CoverageGap", "message": problem})
            expected = theorem_solution_set(*SMALL_K_RANGE)
            if {tuple(s) for s in solution_set} != expected:
                diagnostics.append({"stage": "search", "error": "SolutionSetMismatch",
                                    "message": "search result differs from the expected solution set"})
    if cfg.mode != "full":
        diagnostics.append({"stage": "mode", "error": "PartialRun",
                            "message": f"mode {cfg.mode} does not establish the theorem"})
    holds = cfg.mode == "full" and not diagnostics
    if holds and data["large_k"].get("final_k_bound", 10**9) > SMALL_K_RANGE[1]:
        holds = False
    data["verdict"] = {"theorem_holds": holds, "solution_set": solution_set}
    cert = Certificate(data, diagnostics)
    if cfg.output:
        emit_certificate(cert, cfg.output)
    return cert


# ---------------------------------------------------------------- I/O and validation


def emit_certificate(cert: Certificate, path, fmt: str = "json") -> None:
    if fmt != "json":
        raise ValueError("certificates are JSON only")
    Path(path).write_text(cert.to_json(), encoding="ascii")


def load_certificate(path) -> Certificate:
    return parse_certificate(Path(path).read_text(encoding="ascii"))


def parse_certificate(text: str) -> Certificate:
    body = json.loads(text)
    if body.get("schema") != SCHEMA:
        raise ValueError(f"unsupported schema {body.get('schema')!r}")
    diagnostics = body.pop("diagnostics", [])
    return Certificate(body, diagnostics)


def _check_outcome(rec: dict, inst, log_C: CertReal, where: str) -> list[str]:
    problems = []
    q, M = int(rec["q"]), inst.M
    eps, t = decode_ball(rec["epsilon"]), decode_ball(rec["t_bound"])
    if not q > 6 * M:
        problems.append(f"{where}: q = {q} is not above 6M")
    if not eps > 0:
        problems.append(f"{where}: epsilon not certified positive")
        return problems
    # the lemma holds for any positive integer q, so recomputing eps at q is the whole check
    fresh = epsilon_at(inst, q, max(1024, 2 * int(rec["precision"])))
    if not fresh.overlaps(eps):
        problems.append(f"{where}: epsilon does not match ||mu q|| - M ||tau q|| at the recorded q")
    A = inst.A(1024)
    recomputed = (A * q / eps).log() / log_C
    if not recomputed.overlaps(t):
        problems.append(f"{where}: t-bound does not match log(Aq/eps)/log C")
    return problems


def validate_certificate(cert: Certificate) -> list[str]:
    """Re-check every recorded quantity; an empty list means the certificate stands."""
    from .algebraic import AlgebraicContext

    d = cert.data
    problems: list[str] = []
    if d.get("schema") != SCHEMA:
        problems.append("schema mismatch")
    base = AlgebraicContext.build(None, 1024)
    log_alpha, log_phi = base.alpha.log(), base.phi.log()
    mode = d.get("metadata", {}).get("mode", "full")

    if "small_k" in d:
        k_lo, k_hi = d["metadata"]["k_range"]
        ks = [r["k"] for r in d["small_k"]]
        if ks != list(range(k_lo, k_hi + 1)):
            problems.append("small_k records do not cover the k range exactly once")
        for r in d["small_k"]:
            k = r["k"]
            M, _ = index_bounds(k)
            if int(r["M_k"]) != M:
                problems.append(f"small-k:{k}: M_k differs from the index bound {M}")
            problems += _check_outcome(r, small_k_instance(k, M), log_alpha, f"small-k:{k}")
            if r["t_max"] != math.floor(decode_ball(r["t_bound"]).upper):
                problems.append(f"small-k:{k}: t_max is not the floor of the bound")
            gamma, g = decode_ball(r["gamma"]), decode_ball(r["g_k_gamma"])
            lo, hi = gamma_bracket(k, 1024)
            if not (gamma > lo and gamma < hi):
                problems.append(f"small-k:{k}: gamma outside its localization interval")
            # the only root in the interval is simple, so a sign change pins it inside the ball
            charpoly = kpell_charpoly(k)
            if not (poly_sign_at(charpoly, gamma.lower) < 0 < poly_sign_at(charpoly, gamma.upper)):
                problems.append(f"small-k:{k}: gamma ball does not enclose the dominant root")
            elif not g_k_at(k, gamma).overlaps(g):
                problems.append(f"small-k:{k}: g_k_gamma does not match g_k at the recorded gamma")
            if not (g > G_K_LOWER and g < G_K_UPPER):
                problems.append(f"small-k:{k}: g_k(gamma) outside (0.276, 0.5)")
        if d["small_k"]:
            top = max(r["t_max"] for r in d["small_k"])
            if d.get("small_k_max_bound") != top:
                problems.append("small_k_max_bound is not the maximum per-k bound")

    if "large_k" in d and "chain" in d["large_k"]:
        large = d["large_k"]
        k_in = int(large["matveev_stage"]["k_bound_initial"])
        expected_k = replay_large_k_bound(256).integers["k_max"]
        if k_in != expected_k:
            problems.append("initial large-k bound does not match the replayed bound")
        for i, st in enumerate(large["chain"]):
            if int(st["k_in"]) != k_in:
                problems.append(f"chain stage {i + 1}: input bound does not follow from the previous stage")
            n_b, m_b = index_bounds(k_in)
            if int(st["M"]) != m_b or int(st["n_bound"]) != n_b:
                problems.append(f"chain stage {i + 1}: M differs from the index bounds")
            problems += _check_outcome(st, large_k_instance(m_b), log_phi, f"chain stage {i + 1}")
            if st["k_out"] != math.floor(2 * decode_ball(st["t_bound"]).upper):
                problems.append(f"chain stage {i + 1}: k_out is not floor(2 t)")
            k_in = st["k_out"]
        if large["chain"] and large["chain"][-1]["k_out"] > SMALL_K_RANGE[1]:
            problems.append("large-k chain does not close below 361")

    if "search" in d:
        s = d["search"]
        (k_lo, k_hi), (n_lo, n_hi), (m_lo, m_hi) = s["box"]["k"], s["box"]["n"], s["box"]["m"]
        fresh = intersect_box(k_lo, k_hi, n_lo, n_hi, m_lo, m_hi, filtered=False)
        if sorted((r.n, r.k, r.m) for r in fresh) != sorted((r["n"], r["k"], r["m"]) for r in s["records"]):
            problems.append("recorded search results differ from a fresh search of the same box")
        for r in s["filtered"]:
            lo, hi = m_window(r["n"])
            if not lo < r["m"] < hi:
                problems.append(f"filtered solution {(r['n'], r['k'], r['m'])} outside the m-window")
        if mode == "full":
            problems += [f"search-coverage: {p}" for p in _coverage_problems(s["box"], d.get("implied_box"))]

    verdict = d.get("verdict", {})
    if verdict.get("theorem_holds"):
        if problems or cert.diagnostics:
            problems.append("verdict claims the theorem but the record does not support it")
        if {tuple(x) for x in verdict.get("solution_set", [])} != theorem_solution_set(*SMALL_K_RANGE):
            problems.append("verdict solution set differs from the expected one")
    return problems


def default_threads() -> int:
    return max(1, min(8, os.cpu_count() or 1))
