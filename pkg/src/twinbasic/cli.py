"""Command-line front end: ``eval``, ``verify``, ``convert`` and ``table``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction

from . import dsl
from .identities import get_identity, list_identities, run_suite, summarize
from .numkernel import (
    DivergenceError,
    DomainError,
    ToleranceSpec,
    TruncationPolicy,
    format_scalar,
    parse_scalar,
    precision,
)
from .pqcore import BasePair, pq_binomial

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2, 3


@dataclass(frozen=True)
class CliConfig:
    precision_digits: int = 50
    tol: str = "1e-30"
    max_terms: int = 100_000
    seed: int = 0
    output: str = "text"
    json_path: str | None = None

    def __post_init__(self) -> None:
        if self.precision_digits < 10:
            raise ValueError("precision must be at least 10 digits")
        if self.max_terms < 1:
            raise ValueError("max-terms must be at least 1")
        if self.output not in ("text", "json"):
            raise ValueError("output must be text or json")

    def tolerance(self) -> ToleranceSpec:
        return ToleranceSpec(Fraction(0), parse_scalar(self.tol))

    def truncation(self) -> TruncationPolicy:
        return TruncationPolicy(max_terms=self.max_terms)


class _UsageError(Exception):
    pass


GLOBAL_DEFAULTS = {"precision": 50, "tol": "1e-30", "max_terms": 100_000, "json_path": None, "output": "text"}


def _global_flags(ap: argparse.ArgumentParser, suppress: bool) -> None:
    # registered on the main parser and on every subcommand, so the flags
    # may come before or after the command name
    d = (lambda k: argparse.SUPPRESS) if suppress else GLOBAL_DEFAULTS.get
    ap.add_argument("--precision", type=int, default=d("precision"), help="decimal digits (default 50)")
    ap.add_argument("--tol", default=d("tol"), help="relative tolerance (default 1e-30)")
    ap.add_argument("--max-terms", type=int, default=d("max_terms"), help="series truncation limit")
    ap.add_argument("--json", dest="json_path", metavar="PATH", default=d("json_path"),
                    help="write JSON output to PATH")
    ap.add_argument("--output", choices=("text", "json"), default=d("output"))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="twinbasic", description="Twin-basic (p,q) series calculator and verifier.")
    _global_flags(ap, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = ap.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", parents=[common], help="evaluate an expression")
    p_eval.add_argument("expr")
    p_eval.add_argument("--let", action="append", default=[], metavar="NAME=VALUE",
                        help="bind a symbol (repeatable)")

    p_ver = sub.add_parser("verify", parents=[common], help="verify a named identity, or all of them")
    p_ver.add_argument("target")
    p_ver.add_argument("--grid", type=int, default=10, help="samples per identity")
    p_ver.add_argument("--seed", type=int, default=0)

    p_conv = sub.add_parser("convert", parents=[common], help="convert between phi and Phi forms")
    p_conv.add_argument("--direction", choices=("q2pq", "pq2q"), required=True)
    p_conv.add_argument("expr")
    p_conv.add_argument("--param-p", help="comma-separated p-components for the numerator parameters")
    p_conv.add_argument("--den-p", help="comma-separated p-components for the denominator parameters")
    p_conv.add_argument("--base-p", help="p-component of the base (default 1)")

    p_tab = sub.add_parser("table", parents=[common], help="print tables")
    p_tab.add_argument("what", choices=("binom",))
    p_tab.add_argument("--n", type=int, required=True)
    p_tab.add_argument("--p", required=True)
    p_tab.add_argument("--q", required=True)
    return ap


def _emit(cfg: CliConfig, text: str, payload) -> None:
    if cfg.output == "json":
        print(json.dumps(payload, indent=2))
    else:
        print(text)
    if cfg.json_path:
        with open(cfg.json_path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")


def _bindings(pairs) -> dict:
    env = {}
    for item in pairs:
        if "=" not in item:
            raise _UsageError(f"--let expects NAME=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        try:
            env[k.strip()] = dsl.evaluate_text(v)
        except dsl.ParseError as exc:
            raise _UsageError(f"--let {k}: {exc}") from exc
    return env


def cmd_eval(args, cfg: CliConfig) -> int:
    env = _bindings(args.let)
    try:
        tree = dsl.parse_expr(args.expr)
    except dsl.ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        value = dsl.Evaluator(env, cfg.truncation())(tree)
    except dsl.UnboundSymbolError as exc:
        print(f"unbound symbol {exc.args[0]} (bind it with --let)", file=sys.stderr)
        return EXIT_USAGE
    text = format_scalar(value, cfg.precision_digits)
    _emit(cfg, text, {"expr": dsl.to_text(tree), "value": text})
    return EXIT_OK


def cmd_verify(args, cfg: CliConfig) -> int:
    if args.grid < 0:
        raise _UsageError("--grid must be nonnegative")
    if args.target == "all":
        names = [c.name for c in list_identities()]
    else:
        try:
            get_identity(args.target)
        except KeyError:
            print(f"unknown identity {args.target!r}", file=sys.stderr)
            return EXIT_USAGE
        names = [args.target]
    reports = run_suite(seed=args.seed, samples=args.grid, names=names, tol=cfg.tolerance(),
                        trunc=cfg.truncation())
    summary = summarize(reports)
    lines = []
    for name in names:
        s = summary.get(name, {"passed": 0, "failed": 0, "worst_rel_residual": "0"})
        total = s["passed"] + s["failed"]
        status = "PASS" if s["failed"] == 0 else "FAIL"
        lines.append(f"{status} {name}: {s['passed']}/{total} passed, worst rel residual {s['worst_rel_residual']}")
        for r in reports:
            if r.identity == name and not r.passed:
                lines.append("    " + "; ".join(r.notes))
    all_pass = all(r.passed for r in reports)
    lines.append(f"{'all passed' if all_pass else 'FAILURES'}: {sum(r.passed for r in reports)}/{len(reports)}")
    payload = [r.to_json() for r in reports]
    if cfg.output == "json":
        print(json.dumps(payload, indent=2))
    else:
        print("\n".join(lines))
    if cfg.json_path:
        with open(cfg.json_path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    return EXIT_OK if all_pass else EXIT_FAIL


def _lift_list(text: str | None):
    if text is None:
        return None
    return [dsl.parse_expr(t) for t in text.split(",")] if text.strip() else []


def cmd_convert(args, cfg: CliConfig) -> int:
    try:
        tree = dsl.parse_expr(args.expr)
        if args.direction == "pq2q":
            out = dsl.project_to_phi(tree)
        else:
            base_p = dsl.parse_expr(args.base_p) if args.base_p else None
            out = dsl.embed_to_Phi(tree, _lift_list(args.param_p), _lift_list(args.den_p), base_p)
    except dsl.ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = dsl.to_text(out)
    _emit(cfg, text, {"direction": args.direction, "input": dsl.to_text(tree), "output": text})
    return EXIT_OK


def cmd_table(args, cfg: CliConfig) -> int:
    if args.n < 0:
        raise _UsageError("--n must be nonnegative")
    base = BasePair(parse_scalar(args.p), parse_scalar(args.q))
    rows = [[format_scalar(pq_binomial(m, k, base), cfg.precision_digits) for k in range(m + 1)]
            for m in range(args.n + 1)]
    text = "\n".join(f"n={m}: " + "  ".join(row) for m, row in enumerate(rows))
    _emit(cfg, text, {"table": "binom", "p": args.p, "q": args.q, "rows": rows})
    return EXIT_OK


COMMANDS = {"eval": cmd_eval, "verify": cmd_verify, "convert": cmd_convert, "table": cmd_table}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = CliConfig(args.precision, args.tol, args.max_terms, getattr(args, "seed", 0), args.output,
                        args.json_path)
        parse_scalar(cfg.tol)
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        with precision(cfg.precision_digits):
            return COMMANDS[args.command](args, cfg)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, DivergenceError, ZeroDivisionError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
