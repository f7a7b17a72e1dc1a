"""Command-line interface: check, run, consult, serve."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .consult import Consultation
from .engine import EngineConfig
from .krl import KrlSyntaxError, KrlValidationError, parse_kb, parse_text, validate_kb
from .krl.normalize import normalize_kb
from .memory import TypeMismatchError
from .sim import ScenarioError, load_scenario, run_simulation
from .values import to_literal, value_from_literal


def _read_file(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        print(f"error: no such file: {path}", file=sys.stderr)
        raise SystemExit(2)
    return p.read_text(encoding="utf-8")


def _load_kb(path: str):
    text = _read_file(path)
    try:
        return parse_kb(text)
    except (KrlSyntaxError, KrlValidationError) as exc:
        _print_kb_errors(path, exc)
        raise SystemExit(1)


def _print_kb_errors(path: str, exc: Exception):
    if isinstance(exc, KrlSyntaxError):
        expected = f" (expected {', '.join(exc.expected)})" if exc.expected else ""
        print(f"{path}:{exc.line}:{exc.col}: {exc.message}{expected}", file=sys.stderr)
    elif isinstance(exc, KrlValidationError):
        for diag in exc.diagnostics:
            print(f"{path}:{diag.loc}: {diag.message}", file=sys.stderr)


def cmd_check(args) -> int:
    text = _read_file(args.kb)
    try:
        kb = normalize_kb(parse_text(text))
    except KrlSyntaxError as exc:
        _print_kb_errors(args.kb, exc)
        return 1
    diagnostics = validate_kb(kb)
    for diag in diagnostics:
        print(f"{args.kb}:{diag.loc}: {diag.message}", file=sys.stderr)
    return 1 if diagnostics else 0


def cmd_run(args) -> int:
    kb = _load_kb(args.kb)
    try:
        scenario = load_scenario(args.scenario) if Path(args.scenario).is_file() else None
        if scenario is None:
            print(f"error: no such file: {args.scenario}", file=sys.stderr)
            return 2
        overrides = json.loads(_read_file(args.config)) if args.config else None
        config = EngineConfig.from_kb(kb, overrides)
        trace = run_simulation(kb, scenario, args.ticks, config)
    except (ScenarioError, TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for record in trace.records:
        print(f"tick={record.tick} fired={len(record.fired)} origins={len(record.origins)}")
    if args.trace:
        trace.write(args.trace)
    return 0


def _parse_answer(raw: str, domain: dict):
    """A value literal (JSON or bare word) or None for 'unknown'; the
    declared domain decides whether a bare word is acceptable."""
    text = raw.strip()
    if not text:
        raise ValueError("empty answer")
    if text.lower() == "unknown":
        return None
    try:
        literal = json.loads(text)
    except json.JSONDecodeError:
        if text[0] in "{[\"":
            raise ValueError("unparseable JSON literal")
        literal = text  # bare word answers a string/term parameter
    value = value_from_literal(literal)
    kind = domain.get("kind")
    payload = value.payload
    if kind == "number" and isinstance(payload, str):
        if payload not in domain.get("terms", ()):
            raise ValueError(f"{payload!r} is not a number or known term")
    if kind == "boolean" and not isinstance(payload, bool):
        raise ValueError("expected true/false")
    return value


def cmd_consult(args) -> int:
    kb = _load_kb(args.kb)
    try:
        consultation = Consultation(kb, args.goal)
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return 1
    while not consultation.done:
        question = consultation.pending
        domain = json.dumps(question.domain)
        print(f"? {question.ref} {domain}")
        value = None
        for _ in range(3):
            print("> ", end="", file=sys.stderr, flush=True)
            line = sys.stdin.readline()
            if not line:
                break  # EOF: treat as unknown
            try:
                value = _parse_answer(line, question.domain)
                break
            except (ValueError, TypeError) as exc:
                print(f"malformed answer ({exc}); value literal or 'unknown'", file=sys.stderr)
        try:
            consultation.answer(value)
        except TypeMismatchError as exc:
            print(f"rejected: {exc}", file=sys.stderr)
            consultation.answer(None)
    if consultation.result is None:
        print("undetermined")
    else:
        value = consultation.result
        literal = json.dumps(to_literal(value.with_certainty(1.0)))
        print(f"result: {args.goal} = {literal} (cf {value.certainty:g})")
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    server = serve(args.port, args.static)
    host, port = server.server_address
    print(f"listening on http://{host}:{port}/")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tickrules",
        description="Temporal production-rule engine: validate knowledge bases, "
        "run scenario simulations, consult interactively, serve sessions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="parse and validate a knowledge base")
    p_check.add_argument("kb")
    p_check.set_defaults(func=cmd_check)

    p_run = sub.add_parser("run", help="run a scenario simulation")
    p_run.add_argument("--kb", required=True)
    p_run.add_argument("--scenario", required=True)
    p_run.add_argument("--ticks", type=int, required=True)
    p_run.add_argument("--trace", help="trace output path (.trace.jsonl)")
    p_run.add_argument("--config", help="sidecar JSON config overriding the KRL config block")
    p_run.set_defaults(func=cmd_run)

    p_consult = sub.add_parser("consult", help="interactive backward-chaining consultation")
    p_consult.add_argument("--kb", required=True)
    p_consult.add_argument("--goal", required=True, help="goal attribute, e.g. panel.verdict")
    p_consult.set_defaults(func=cmd_consult)

    p_serve = sub.add_parser("serve", help="HTTP session service")
    p_serve.add_argument("--port", type=int, default=8077)
    p_serve.add_argument("--static", help="directory of static UI assets to serve at /")
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
