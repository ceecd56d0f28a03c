"""Command-line front end: validate, solve, oracle, explain, evaluate.

Exit status: 0 success, 1 validation failure (or another modelling error),
2 parse error, 3 a resource bound was exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from typing import Sequence, TextIO

from .abduction import Explainer
from .errors import ICLError, ParseError, ResourceLimitError
from .model import Theory
from .oracle import DEFAULT_MAX_STRATEGIES, information_states, optimal_strategy, resolve_strategy_lines, strategy_count
from .parser import _round, emit_policy_json, parse_file, parse_formula, parse_strategy
from .solver import SolveResult, expected_value, solve, substitute_strategy
from .validation import DEFAULT_MAX_WORLDS, PROB_TOLERANCE, ValidationReport, require_valid, validate

EXIT_OK, EXIT_INVALID, EXIT_PARSE, EXIT_TOO_LARGE = 0, 1, 2, 3
COMMANDS = ("validate", "solve", "oracle", "explain", "evaluate")


@dataclass(frozen=True)
class CliConfig:
    command: str
    input: str
    format: str = "text"
    tolerance: float = PROB_TOLERANCE
    max_worlds: int = DEFAULT_MAX_WORLDS
    max_strategies: int = DEFAULT_MAX_STRATEGIES
    query: str | None = None
    strategy: str | None = None
    strategy_out: str | None = None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("input", help="theory file")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--tolerance", type=float, default=PROB_TOLERANCE, help="probability-sum tolerance")
    common.add_argument("--max-worlds", type=int, default=DEFAULT_MAX_WORLDS)
    common.add_argument("--max-strategies", type=int, default=DEFAULT_MAX_STRATEGIES)

    ap = argparse.ArgumentParser(prog="icldt", description="Decision-theoretic independent choice logic solver.")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="static and semantic checks")
    p = sub.add_parser("solve", parents=[common], help="optimal compact policy")
    p.add_argument("--strategy-out", help="also write the policy as a strategy file")
    sub.add_parser("oracle", parents=[common], help="brute-force optimum over all strategies")
    p = sub.add_parser("explain", parents=[common], help="explanations of a query and its probability")
    p.add_argument("--query", required=True)
    p = sub.add_parser("evaluate", parents=[common], help="exact expected utility of a strategy file")
    p.add_argument("--strategy", required=True)
    return ap


def parse_args(argv: Sequence[str] | None = None) -> CliConfig:
    ns = build_parser().parse_args(argv)
    return CliConfig(
        command=ns.command,
        input=ns.input,
        format=ns.format,
        tolerance=ns.tolerance,
        max_worlds=ns.max_worlds,
        max_strategies=ns.max_strategies,
        query=getattr(ns, "query", None),
        strategy=getattr(ns, "strategy", None),
        strategy_out=getattr(ns, "strategy_out", None),
    )


# -- rendering -------------------------------------------------------------------


def _set(atoms) -> str:
    return "{" + ", ".join(map(str, atoms)) + "}"


def render_report(report: ValidationReport, fmt: str) -> str:
    if fmt == "json":
        issue = lambda i: {"code": i.code, "message": i.message, "location": i.location}  # noqa: E731
        return json.dumps(
            {
                "ok": report.ok,
                "errors": [issue(i) for i in report.errors],
                "warnings": [issue(i) for i in report.warnings],
                "semantic_checks_run": report.semantic_checks_run,
            },
            sort_keys=True,
        ) + "\n"
    lines = [f"error {i}" for i in report.errors] + [f"warning {i}" for i in report.warnings]
    lines.append(f"{len(report.errors)} errors, {len(report.warnings)} warnings")
    return "\n".join(lines) + "\n"


def render_policy(result: SolveResult, fmt: str) -> str:
    if fmt == "json":
        return emit_policy_json(result)
    lines = []
    for p in result.policies:
        lines.append(f"decision {p.decision} observes {_set(p.observed)}")
        for e in p.entries:
            cond = ", ".join(sorted(map(str, e.condition)))
            lines.append(f"  ⟨{e.action}, {{{cond}}}, {_round(e.value):.12g}⟩")
        for r in p.indifferent:
            lines.append(f"  indifferent {{{', '.join(sorted(map(str, r.choice)))}}} utility {r.value:g}")
        lines.append(f"  default {p.default_action}")
    lines.append(f"value {result.value!r}")
    return "\n".join(lines) + "\n"


def strategy_text(result: SolveResult) -> str:
    """The solved policy as a strategy file, earliest decision first."""
    lines = []
    for p in reversed(result.policies):
        for e in p.entries:
            cond = ", ".join(sorted(map(str, e.condition)))
            lines.append(f"{p.decision}: {cond} -> {e.action}" if cond else f"{p.decision}: -> {e.action}")
        lines.append(f"{p.decision}: default -> {p.default_action}")
    return "\n".join(lines) + "\n"


# -- commands ------------------------------------------------------------------------


def _cmd_validate(cfg: CliConfig, theory: Theory, out: TextIO) -> int:
    report = validate(theory, cfg.max_worlds, cfg.tolerance)
    out.write(render_report(report, cfg.format))
    return EXIT_OK if report.ok else EXIT_INVALID


def _cmd_solve(cfg: CliConfig, theory: Theory, out: TextIO) -> int:
    require_valid(theory, cfg.max_worlds, cfg.tolerance)
    result = solve(theory)
    out.write(render_policy(result, cfg.format))
    if cfg.strategy_out:
        with open(cfg.strategy_out, "w", encoding="utf-8") as fh:
            fh.write(strategy_text(result))
    return EXIT_OK


def _cmd_oracle(cfg: CliConfig, theory: Theory, out: TextIO) -> int:
    require_valid(theory, cfg.max_worlds, cfg.tolerance)
    sigma, value = optimal_strategy(theory, cfg.max_strategies, cfg.max_worlds)
    count = strategy_count(theory)
    if cfg.format == "json":
        doc = {
            "decisions": [
                {
                    "id": d.id,
                    "table": [
                        {"state": [str(a) for a in s], "action": str(sigma.action(d.id, s))}
                        for s in information_states(theory, d)
                    ],
                }
                for d in theory.decisions
            ],
            "strategies": count,
            "value": _round(value),
        }
        out.write(json.dumps(doc, sort_keys=True) + "\n")
        return EXIT_OK
    for d in theory.decisions:
        out.write(f"decision {d.id}\n")
        for s in information_states(theory, d):
            out.write(f"  {_set(s)} -> {sigma.action(d.id, s)}\n")
    out.write(f"strategies {count}\nvalue {value!r}\n")
    return EXIT_OK


def _cmd_explain(cfg: CliConfig, theory: Theory, out: TextIO) -> int:
    require_valid(theory, cfg.max_worlds, cfg.tolerance)
    query = parse_formula(cfg.query)
    E = Explainer(theory)
    K = E.expl(query)
    members = [sorted(k, key=theory.atom_rank.get) for k in K]
    mentions_agent = any(theory.is_agent_choice(a) for k in K for a in k)
    prob = None if mentions_agent else E.prob_set(E.make_exclusive(K))
    if cfg.format == "json":
        doc = {
            "query": cfg.query,
            "explanations": [[str(a) for a in k] for k in members],
            "probability": None if prob is None else _round(prob),
        }
        out.write(json.dumps(doc, sort_keys=True) + "\n")
        return EXIT_OK
    for k in members:
        out.write(_set(k) + "\n")
    out.write(f"{len(members)} explanations\n")
    if prob is None:
        out.write("probability undefined: explanations mention decisions\n")
    else:
        out.write(f"probability {prob!r}\n")
    return EXIT_OK


def _cmd_evaluate(cfg: CliConfig, theory: Theory, out: TextIO) -> int:
    require_valid(theory, cfg.max_worlds, cfg.tolerance)
    with open(cfg.strategy, encoding="utf-8") as fh:
        lines = parse_strategy(fh.read())
    decisions = resolve_strategy_lines(theory, lines)
    value = expected_value(substitute_strategy(theory, decisions))
    if cfg.format == "json":
        out.write(json.dumps({"value": _round(value)}, sort_keys=True) + "\n")
    else:
        out.write(f"value {value!r}\n")
    return EXIT_OK


_HANDLERS = {
    "validate": _cmd_validate,
    "solve": _cmd_solve,
    "oracle": _cmd_oracle,
    "explain": _cmd_explain,
    "evaluate": _cmd_evaluate,
}


def run(cfg: CliConfig, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        theory = parse_file(cfg.input)
        return _HANDLERS[cfg.command](cfg, theory, out)
    except ParseError as exc:
        err.write(f"parse error: {exc}\n")
        return EXIT_PARSE
    except ResourceLimitError as exc:
        err.write(f"resource bound: {exc}\n")
        return EXIT_TOO_LARGE
    except ICLError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INVALID
    except OSError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INVALID


def main(argv: Sequence[str] | None = None) -> int:
    return run(parse_args(argv))


if __name__ == "__main__":
    sys.exit(main())
