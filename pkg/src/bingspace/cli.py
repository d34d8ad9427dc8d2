"""Command-line front end.

Exit codes: 0 ok, 2 input error, 3 verification failure, 4 resource cap.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .certificate import CertificateError, loads, parse_pairs, resume, run, verify
from .engine import (EngineConfig, EngineError, StageLimitError, VerificationError,
                     continuity_audit)
from .exact import fmt_rational, parse_rational
from .topology import (BasicNbhd, Point, closure_hits, example1_audit, example1_family,
                       integer_window, theta_discrete_finite)

OK, INPUT_ERROR, VERIFY_FAILED, CAP_EXCEEDED = 0, 2, 3, 4


class InputError(Exception):
    pass


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _load_cert(path: str):
    try:
        return loads(_read_text(path))
    except CertificateError as exc:
        raise InputError(str(exc)) from exc


def _point(text: str) -> Point:
    try:
        return Point.parse(text)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _rational(text: str):
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True, indent=1) + "\n")


def cmd_extend(args: argparse.Namespace) -> int:
    if args.stages < 0:
        raise InputError("--stages must be >= 0")
    try:
        pairs = parse_pairs(json.loads(_read_text(args.pairs)))
    except (json.JSONDecodeError, ValueError, KeyError, TypeError) as exc:
        raise InputError(f"invalid pairs file: {exc}") from exc
    try:
        _, text = run(pairs, args.stages, EngineConfig(search_cap=args.search_cap))
    except VerificationError as exc:
        print(f"stage {exc.n} failed verification:", file=sys.stderr)
        for key, msg in exc.report.failures().items():
            print(f"  condition {key}: {msg}", file=sys.stderr)
        return VERIFY_FAILED
    Path(args.out).write_text(text)
    return OK


def cmd_eval(args: argparse.Namespace) -> int:
    cert = _load_cert(args.cert)
    z = _point(args.point)
    engine = resume(cert)
    image = engine.evaluate(z, max_stages=args.max_stages)
    print(image)
    return OK


def cmd_verify(args: argparse.Namespace) -> int:
    cert = _load_cert(args.file)
    outcome = verify(cert)
    if outcome.ok:
        print(outcome.describe())
        return OK
    print(outcome.describe(), file=sys.stderr)
    return VERIFY_FAILED


def _example1(eps_list: list, k: Optional[int]) -> dict:
    # members a_j with j >= K(eps) all lie in the closure, so count up to 2K
    table = [{"eps": fmt_rational(e), "K": example1_audit(e)} for e in eps_list]
    top = k if k is not None else 2 * max((row["K"] for row in table), default=1)
    origin = Point(0, 0)
    for row, e in zip(table, eps_list):
        span = max(top, 2 * row["K"])
        hits = closure_hits(BasicNbhd(origin, e), [example1_family(i) for i in range(1, span + 1)])
        row["members_checked"] = span
        row["family_members_in_closure"] = len(hits)
        row["theta_discrete_at_origin"] = len(hits) == 0
    return {
        "name": "example1",
        "points": [origin.to_json()] + [example1_family(i).to_json() for i in range(1, top + 1)],
        "audit": table,
    }


def _example2(k: int) -> dict:
    window = integer_window(-k, k)
    witness = theta_discrete_finite(window)
    r = witness.radius
    checks = []
    for z in window:
        hits = closure_hits(BasicNbhd(z, r), window) if r is not None else [z]
        checks.append({"point": z.to_json(), "closure_hits": len(hits), "ok": hits == [z]})
    return {
        "name": "example2",
        "points": [z.to_json() for z in window],
        "separation_radius": None if r is None else fmt_rational(r),
        "pairwise_checks": checks,
        "all_pass": all(c["ok"] for c in checks),
        "note": ("the integer window is theta-discrete with a uniform witness radius, while "
                 "example1 fails theta-discreteness at the origin; theta-discreteness is a "
                 "topological invariant, so no homeomorphism carries one set onto the other"),
    }


def cmd_example(args: argparse.Namespace) -> int:
    if args.name == "example1":
        eps_list = [_rational(t) for t in (args.eps or "1/2").split(",")]
        if any(e <= 0 for e in eps_list):
            raise InputError("every eps must be positive")
        if args.k is not None and args.k < 1:
            raise InputError("--k must be >= 1")
        _emit(_example1(eps_list, args.k))
    elif args.name == "example2":
        k = 5 if args.k is None else args.k
        if k < 0:
            raise InputError("--k must be >= 0")
        _emit(_example2(k))
    else:
        raise InputError(f"unknown example {args.name!r}")
    return OK


def cmd_audit(args: argparse.Namespace) -> int:
    cert = _load_cert(args.cert)
    z = _point(args.point)
    eps = _rational(args.eps)
    if eps <= 0 or args.height < 1:
        raise InputError("--eps must be positive and --height >= 1")
    engine = resume(cert)
    result = continuity_audit(engine, z, eps, args.height, max_stages=args.max_stages)
    _emit(result.to_json())
    return OK if result.ok else VERIFY_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bingspace",
                                     description="Extend finite bijections of the Bing space.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extend", help="run the engine and write a certificate")
    p.add_argument("--pairs", required=True)
    p.add_argument("--stages", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--search-cap", type=int, default=64)
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("eval", help="evaluate the extended map at a point")
    p.add_argument("--cert", required=True)
    p.add_argument("--point", required=True)
    p.add_argument("--max-stages", type=int, default=128)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("verify", help="re-check and replay a certificate")
    p.add_argument("file")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("example", help="emit an example family with its audit")
    p.add_argument("name")
    p.add_argument("--eps")
    p.add_argument("--k", type=int)
    p.set_defaults(func=cmd_example)

    p = sub.add_parser("audit", help="sampled continuity audit at a point")
    p.add_argument("--cert", required=True)
    p.add_argument("--point", required=True)
    p.add_argument("--eps", required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--max-stages", type=int, default=64)
    p.set_defaults(func=cmd_audit)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return INPUT_ERROR if exc.code else OK
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR
    except StageLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return CAP_EXCEEDED
    except VerificationError as exc:
        print(f"stage {exc.n} failed verification: {exc.report.failures()}", file=sys.stderr)
        return VERIFY_FAILED
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return VERIFY_FAILED


if __name__ == "__main__":
    sys.exit(main())
