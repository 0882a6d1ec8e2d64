"""Command-line front end: ``pellnarayana <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from .algebraic import (
    certified_context,
    height_c_alpha,
    height_eta1_bound,
    log_height_gamma,
)
from .certreal import CertReal, PrecisionPolicy
from .contfrac import ContinuedFraction, expand_until, iter_quotients
from .errors import ProverError
from .expr import ExpressionError, provider
from .linforms import (
    MatveevParams,
    index_bounds,
    matveev_rhs,
    replay_large_k_bound,
    replay_small_k_bound,
    replay_small_k_reduction_constants,
)
from .pipeline import (
    RunConfig,
    encode_ball,
    load_certificate,
    validate_certificate,
    verify_theorem,
)
from .reduction import (
    ReductionInstance,
    dujella_petho,
    large_k_chain,
    small_k_instance,
)
from .search import intersect_box
from .sequences import fibonacci, iter_kpell, narayana

EXIT_OK, EXIT_FALSE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _ball(x: CertReal) -> dict:
    return encode_ball(x)


def _flatten(row: dict) -> dict:
    flat = {}
    for key, value in row.items():
        if isinstance(value, dict) and set(value) == {"mid", "rad"}:
            flat[key] = value["mid"]
            flat[f"{key}_rad"] = value["rad"]
        else:
            flat[key] = value
    return flat


def _emit(rows: list[dict], args) -> None:
    out = io.StringIO()
    if args.csv:
        flat = [_flatten(r) for r in rows]
        fields = list(dict.fromkeys(f for r in flat for f in r))
        writer = csv.DictWriter(out, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        writer.writerows(flat)
    else:
        for r in rows:
            out.write(json.dumps(r, sort_keys=True) + "\n")
    _write(out.getvalue(), args)


def _write(text: str, args) -> None:
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _policy(args) -> PrecisionPolicy:
    try:
        return PrecisionPolicy(args.precision_start, args.precision_cap)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


# ------------------------------------------------------------------ subcommands


def cmd_seq(args) -> int:
    if args.family in ("kpell", "pell"):
        k = 2 if args.family == "pell" else args.k
        if k is None:
            raise UsageError("kpell needs -k")
        start = 1 if args.start is None else args.start
        rows = []
        for n, value in iter_kpell(k, start=start):
            if len(rows) >= args.count:
                break
            rows.append({"family": "kpell", "k": k, "index": n, "value": str(value)})
    else:
        fn = narayana if args.family == "narayana" else fibonacci
        start = 0 if args.start is None else args.start
        rows = [{"family": args.family, "index": i, "value": str(fn(i))} for i in range(start, start + args.count)]
    _emit(rows, args)
    return EXIT_OK


def cmd_roots(args) -> int:
    policy = _policy(args)
    base = certified_context(None, policy)
    rows = [
        {"name": "alpha", "value": _ball(base.alpha)},
        {"name": "beta_modulus", "value": _ball(base.beta_modulus)},
        {"name": "phi", "value": _ball(base.phi)},
        {"name": "c_alpha", "value": _ball(base.c_alpha)},
        {"name": "height_alpha", "value": _ball(base.alpha.log() / 3)},
        {"name": "height_c_alpha", "value": _ball(height_c_alpha(base.c_alpha))},
    ]
    for k in args.k or []:
        ctx = certified_context(k, policy)
        rows += [
            {"name": "gamma", "k": k, "value": _ball(ctx.gamma)},
            {"name": "g_k_gamma", "k": k, "value": _ball(ctx.g_k_gamma)},
            {"name": "height_gamma", "k": k, "value": _ball(log_height_gamma(k, ctx.prec))},
        ]
        if k >= 2:
            try:
                rows.append({"name": "height_eta1_bound", "k": k, "value": _ball(height_eta1_bound(k, ctx.prec))})
            except ArithmeticError:
                pass
    _emit(rows, args)
    return EXIT_OK


def cmd_cf(args) -> int:
    if (args.terms is None) == (args.min_q is None):
        raise UsageError("give exactly one of --terms or --min-q")
    x = provider(args.expression)
    policy = _policy(args)
    if args.min_q is not None:
        cf = expand_until(x, args.min_q, policy)
    else:
        def by_count(prec):
            cf = ContinuedFraction(source_prec=prec)
            for a in iter_quotients(x(prec)):
                cf.append(a)
                if len(cf) >= args.terms:
                    return cf
        cf = policy.run(by_count)
    rows = [
        {"index": i, "a": str(a), "p": str(p), "q": str(q)}
        for i, (a, (p, q)) in enumerate(zip(cf.partial_quotients, cf.convergents))
    ]
    _emit(rows, args)
    return EXIT_OK


def cmd_bound(args) -> int:
    prec = args.precision_start
    if args.what == "index":
        if args.k is None:
            raise UsageError("bound index needs -k")
        n_max, m_max = index_bounds(args.k, _policy(args))
        rows = [{"k": args.k, "n_max": str(n_max), "m_max": str(m_max)}]
    elif args.what == "matveev":
        if not (args.s and args.d and args.D and args.B):
            raise UsageError("bound matveev needs --s, --d, --D and --B")
        params = MatveevParams(
            s=args.s,
            d_L=args.d,
            D=CertReal.exact(args.D, prec),
            B=tuple(CertReal.exact(b, prec) for b in args.B),
        )
        rows = [{"s": args.s, "d_L": args.d, "rhs": _ball(matveev_rhs(params))}]
    else:
        replay = {
            "small-k": replay_small_k_bound,
            "large-k": replay_large_k_bound,
            "reduction-constants": replay_small_k_reduction_constants,
        }[args.what](prec)
        rows = [
            {"label": c.label, "lhs": _ball(_as_ball(c.lhs, prec)), "rhs": _ball(_as_ball(c.rhs, prec)), "holds": c.holds}
            for c in replay.checks
        ]
        rows += [{"label": name, "value": str(v)} for name, v in replay.integers.items()]
    _emit(rows, args)
    return EXIT_OK if all(r.get("holds", True) for r in rows) else EXIT_FALSE


def _as_ball(v, prec) -> CertReal:
    return v if isinstance(v, CertReal) else CertReal.exact(v, prec)


def _outcome_row(outcome, **extra) -> dict:
    row = {
        "label": outcome.label,
        "M": str(outcome.M),
        "q": str(outcome.q),
        "convergent_index": outcome.convergent_index,
        "attempts": outcome.attempts,
        "precision": outcome.precision,
        "epsilon": _ball(outcome.epsilon),
        "t_bound": _ball(outcome.t_bound),
        "t_max": outcome.t_max,
    }
    row.update(extra)
    return row


def cmd_reduce(args) -> int:
    policy = _policy(args)
    explicit = [args.tau, args.mu, args.A, args.C, args.M]
    if args.preset and any(v is not None for v in explicit):
        raise UsageError("a preset excludes --tau/--mu/--A/--C/--M")
    if args.preset == "large-k-chain":
        k0 = replay_large_k_bound(args.precision_start).integers["k_max"]
        chain = large_k_chain(k0, policy)
        rows = [_outcome_row(s.outcome, stage=i + 1, k_in=str(s.k_in), k_out=s.k_out) for i, s in enumerate(chain.stages)]
    elif args.preset and args.preset.startswith("small-k:"):
        try:
            k = int(args.preset.split(":", 1)[1])
            inst = small_k_instance(k)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        rows = [_outcome_row(dujella_petho(inst, policy), k=k)]
    elif args.preset:
        raise UsageError(f"unknown preset {args.preset!r}")
    else:
        if any(v is None for v in explicit):
            raise UsageError("explicit mode needs --tau, --mu, --A, --C and --M")
        inst = ReductionInstance(
            tau=provider(args.tau),
            mu=provider(args.mu),
            A=provider(args.A),
            C=provider(args.C),
            M=args.M,
            label="explicit",
        )
        rows = [_outcome_row(dujella_petho(inst, policy))]
    _emit(rows, args)
    return EXIT_OK


def cmd_search(args) -> int:
    recs = intersect_box(*args.k_range, *args.n_range, *args.m_range, filtered=not args.no_filter)
    rows = [{"n": r.n, "k": r.k, "m": r.m, "value": str(r.value), "kind": r.kind.value} for r in recs]
    _emit(rows, args)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.check:
        cert = load_certificate(args.check)
        problems = validate_certificate(cert)
        for p in problems:
            print(p, file=sys.stderr)
        ok = not problems and cert.verdict
        print(json.dumps({"certificate": args.check, "valid": not problems, "theorem_holds": cert.verdict}))
        return EXIT_OK if ok else EXIT_FALSE
    box = None
    if args.search_box:
        k0, k1, n0, n1, m0, m1 = args.search_box
        box = {"k": [k0, k1], "n": [n0, n1], "m": [m0, m1]}
    try:
        cfg = RunConfig(
            k_range=tuple(args.k_range),
            precision_start=args.precision_start,
            precision_cap=args.precision_cap,
            threads=args.threads,
            mode=args.mode,
            search_box=box,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    cert = verify_theorem(cfg)
    if args.output:
        _write(cert.to_json(), args)
    summary = {
        "theorem_holds": cert.verdict,
        "small_k_max_bound": cert.data.get("small_k_max_bound"),
        "large_k_final_bound": cert.data.get("large_k", {}).get("final_k_bound"),
        "diagnostics": cert.diagnostics,
    }
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK if cert.verdict else EXIT_FALSE


# ------------------------------------------------------------------ parser


def _add_globals(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--precision-start", type=int, default=d(256), help="starting precision in bits")
    p.add_argument("--precision-cap", type=int, default=d(1 << 20), help="precision escalation cap in bits")
    p.add_argument("--threads", type=int, default=d(1), help="worker processes for the small-k sweep")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", default=d(False), help="JSON lines output (default)")
    fmt.add_argument("--csv", action="store_true", default=d(False), help="CSV output")
    p.add_argument("--output", metavar="PATH", default=d(None), help="write output here instead of stdout")


def _pair(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(t) for t in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None
    if lo > hi:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pellnarayana", description="Certified replay of P_n^(k) = N_m.")
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    _add_globals(common, suppress=True)

    p = sub.add_parser("seq", parents=[common], help="dump sequence terms")
    p.add_argument("family", choices=["kpell", "pell", "narayana", "fibonacci"])
    p.add_argument("-k", type=int)
    p.add_argument("--start", type=int)
    p.add_argument("--count", type=int, default=10)
    p.set_defaults(func=cmd_seq)

    p = sub.add_parser("roots", parents=[common], help="certified constants and heights")
    p.add_argument("-k", type=int, action="append", help="repeatable")
    p.set_defaults(func=cmd_roots)

    p = sub.add_parser("cf", parents=[common], help="continued fraction of an expression")
    p.add_argument("expression", help="e.g. 'log(alpha)/log(phi)' or 'gamma(4)'")
    p.add_argument("--terms", type=int)
    p.add_argument("--min-q", type=int)
    p.set_defaults(func=cmd_cf)

    p = sub.add_parser("bound", parents=[common], help="evaluate bounds")
    p.add_argument("what", choices=["index", "matveev", "small-k", "large-k", "reduction-constants"])
    p.add_argument("-k", type=int)
    p.add_argument("--s", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--D", type=Fraction)
    p.add_argument("--B", type=Fraction, nargs="+")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("reduce", parents=[common], help="Dujella-Petho reduction")
    p.add_argument("preset", nargs="?", help="small-k:K or large-k-chain")
    p.add_argument("--tau")
    p.add_argument("--mu")
    p.add_argument("--A")
    p.add_argument("--C")
    p.add_argument("--M", type=int)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("search", parents=[common], help="search a box for common values")
    p.add_argument("--k-range", type=_pair, default=(2, 360))
    p.add_argument("--n-range", type=_pair, default=(1, 265))
    p.add_argument("--m-range", type=_pair, default=(0, 329))
    p.add_argument("--no-filter", action="store_true")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("verify", parents=[common], help="full replay with certificate")
    p.add_argument("--mode", choices=["full", "small-k", "large-k", "search-only"], default="full")
    p.add_argument("--k-range", type=_pair, default=(2, 360))
    p.add_argument("--search-box", type=int, nargs=6, metavar=("K0", "K1", "N0", "N1", "M0", "M1"))
    p.add_argument("--check", metavar="CERT", help="re-validate an existing certificate instead")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ExpressionError) as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ProverError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FALSE


if __name__ == "__main__":
    sys.exit(main())
