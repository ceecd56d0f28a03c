"""Text format for theories, queries and strategies; JSON policy output.

Theory grammar (``%`` starts a line comment, statements end with ``.``)::

    nature a { a(lo): 0.2, a(med): 0.3, a(hi): 0.5 }.
    decision d { d(0), d(1) } observes { ta, as }.
    observable as { as(pos), as(neg) }.
    as(pos) <- ta(hi) & a(hi).
    utility(10) <- a(hi) & d(1).
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from .errors import ParseError, SourceSpan
from .model import AGENT, NATURE, Alternative, Atom, ObservationAlternative, Rule, Theory, format_number, utility_atom
from .program import TRUE, And, Formula, Or

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>%[^\n]*)
  | (?P<arrow><-|->)
  | (?P<number>[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[a-z][A-Za-z0-9_]*)
  | (?P<punct>[{}(),:.&|])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    span: SourceSpan


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", SourceSpan(line, col, 1))
        kind = m.lastgroup
        lexeme = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, lexeme, SourceSpan(line, col, len(lexeme))))
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            line_start = pos + lexeme.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", SourceSpan(line, pos - line_start + 1, 0)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def fail(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        found = tok.text or "end of input"
        return ParseError(f"{message}, found {found!r}", tok.span)

    def expect(self, text: str) -> Token:
        if self.tok.text != text:
            raise self.fail(f"expected {text!r}")
        tok = self.tok
        self.i += 1
        return tok

    def accept(self, text: str) -> bool:
        if self.tok.text == text:
            self.i += 1
            return True
        return False

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            raise self.fail("expected identifier")
        tok = self.tok
        self.i += 1
        return tok

    def number(self) -> tuple[float, Token]:
        if self.tok.kind != "number":
            raise self.fail("expected number")
        tok = self.tok
        self.i += 1
        return float(tok.text), tok

    def atom(self) -> tuple[Atom, Token]:
        name = self.ident()
        if name.text == "utility":
            raise ParseError("'utility' is reserved for rule heads", name.span, "RESERVED_ATOM")
        args: list[str] = []
        if self.accept("("):
            args.append(self.constant())
            while self.accept(","):
                args.append(self.constant())
            self.expect(")")
        return Atom(name.text, tuple(args)), name

    def constant(self) -> str:
        # numerals are allowed as constants so that d(0) reads naturally
        if self.tok.kind == "number" and re.fullmatch(r"\d+", self.tok.text):
            self.i += 1
            return self.tokens[self.i - 1].text
        return self.ident().text

    # -- theory ---------------------------------------------------------------

    def theory(self) -> Theory:
        blocks: list = []
        rules: list[Rule] = []
        block_ids: dict[str, Token] = {}
        choice_owner: dict[Atom, str] = {}
        while self.tok.kind != "eof":
            keyword = self.tok.text if self.tok.kind == "ident" else None
            if keyword in ("nature", "decision", "observable") and self.peek().kind == "ident":
                self.i += 1
                id_tok = self.ident()
                if id_tok.text in block_ids:
                    raise ParseError(f"duplicate block id {id_tok.text!r}", id_tok.span, "DUPLICATE_BLOCK")
                block_ids[id_tok.text] = id_tok
                block = getattr(self, f"_{keyword}")(id_tok.text)
                if isinstance(block, Alternative):
                    for c, tok in zip(block.choices, self._last_atom_tokens):
                        if c in choice_owner:
                            raise ParseError(
                                f"atom {c} already belongs to alternative {choice_owner[c]!r}",
                                tok.span,
                                "DUPLICATE_ATOM",
                            )
                        choice_owner[c] = block.id
                blocks.append(block)
            else:
                rules.append(self._rule())
            self.expect(".")
        return Theory(tuple(blocks), tuple(rules))

    def _atom_list(self) -> list[Atom]:
        atoms, toks = [], []
        a, t = self.atom()
        atoms.append(a)
        toks.append(t)
        while self.accept(","):
            a, t = self.atom()
            if a in atoms:
                raise ParseError(f"atom {a} repeated in block", t.span, "DUPLICATE_ATOM")
            atoms.append(a)
            toks.append(t)
        self._last_atom_tokens = toks
        return atoms

    def _nature(self, id: str) -> Alternative:
        self.expect("{")
        atoms, probs, toks = [], [], []
        while True:
            a, t = self.atom()
            if a in atoms:
                raise ParseError(f"atom {a} repeated in block", t.span, "DUPLICATE_ATOM")
            self.expect(":")
            p, ptok = self.number()
            if not 0.0 <= p <= 1.0:
                raise ParseError(f"probability {ptok.text} outside [0,1]", ptok.span, "PROB_RANGE")
            atoms.append(a)
            probs.append(p)
            toks.append(t)
            if not self.accept(","):
                break
        self.expect("}")
        self._last_atom_tokens = toks
        return Alternative(id, NATURE, tuple(atoms), tuple(probs))

    def _decision(self, id: str) -> Alternative:
        self.expect("{")
        atoms = self._atom_list()
        toks = self._last_atom_tokens
        self.expect("}")
        self.expect("observes")
        self.expect("{")
        observes: list[str] = []
        if self.tok.text != "}":
            observes.append(self.ident().text)
            while self.accept(","):
                observes.append(self.ident().text)
        self.expect("}")
        self._last_atom_tokens = toks
        return Alternative(id, AGENT, tuple(atoms), (), tuple(observes))

    def _observable(self, id: str) -> ObservationAlternative:
        self.expect("{")
        atoms = self._atom_list()
        self.expect("}")
        return ObservationAlternative(id, tuple(atoms))

    def _rule(self) -> Rule:
        if self.tok.kind == "ident" and self.tok.text == "utility":
            self.i += 1
            self.expect("(")
            value, _ = self.number()
            self.expect(")")
            head = utility_atom(value)
        else:
            head, _ = self.atom()
        body: list[Atom] = []
        if self.accept("<-"):
            body.append(self.atom()[0])
            while self.accept("&"):
                body.append(self.atom()[0])
        return Rule(head, tuple(body))

    # -- formulas -----------------------------------------------------------------

    def formula(self) -> Formula:
        left = self._conj()
        while self.accept("|"):
            left = Or(left, self._conj())
        return left

    def _conj(self) -> Formula:
        left = self._prim()
        while self.accept("&"):
            left = And(left, self._prim())
        return left

    def _prim(self) -> Formula:
        if self.accept("("):
            f = self.formula()
            self.expect(")")
            return f
        if self.tok.kind == "ident" and self.tok.text == "true":
            self.i += 1
            return TRUE
        if self.tok.kind == "ident" and self.tok.text == "utility":
            self.i += 1
            self.expect("(")
            value, _ = self.number()
            self.expect(")")
            return utility_atom(value)
        return self.atom()[0]


def parse(text: str) -> Theory:
    """Parse theory text. Raises ParseError with a source span on failure."""
    return _Parser(text).theory()


def parse_file(path) -> Theory:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def parse_formula(text: str) -> Formula:
    p = _Parser(text)
    f = p.formula()
    if p.tok.kind != "eof":
        raise p.fail("unexpected trailing input")
    return f


# -- pretty printing ------------------------------------------------------------


def pretty_print(theory: Theory) -> str:
    lines = []
    for b in theory.blocks:
        if isinstance(b, ObservationAlternative):
            lines.append(f"observable {b.id} {{ {', '.join(map(str, b.atoms))} }}.")
        elif b.kind == NATURE:
            items = ", ".join(f"{c}: {format_number(p)}" for c, p in zip(b.choices, b.probs))
            lines.append(f"nature {b.id} {{ {items} }}.")
        else:
            lines.append(
                f"decision {b.id} {{ {', '.join(map(str, b.choices))} }} observes {{ {', '.join(b.observes)} }}."
            )
    lines.extend(str(r) for r in theory.rules)
    return "\n".join(lines) + ("\n" if lines else "")


# -- strategies -------------------------------------------------------------------


@dataclass(frozen=True)
class StrategyLine:
    """One line of a strategy file; ``condition`` is None for ``default``."""

    decision: str | None
    condition: tuple[Atom, ...] | None
    action: Atom
    line: int


def parse_strategy(text: str) -> list[StrategyLine]:
    """Parse ``decision: obs, obs -> action`` and ``default -> action`` lines.

    A ``default`` line may carry a decision prefix (``d: default -> d(0)``);
    without one, the decision is resolved later from the action atom.
    """
    out: list[StrategyLine] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("%", 1)[0].strip()
        if not line:
            continue
        p = _Parser(line)
        p.tokens = [Token(t.kind, t.text, SourceSpan(lineno, t.span.column, t.span.length)) for t in p.tokens]
        decision_id = None
        if p.tok.kind == "ident" and p.peek().text == ":":
            decision_id = p.ident().text
            p.expect(":")
        if p.tok.kind == "ident" and p.tok.text == "default" and p.peek().text == "->":
            p.i += 1
            condition = None
        else:
            atoms: list[Atom] = []
            if p.tok.text != "->":
                atoms.append(p.atom()[0])
                while p.accept(","):
                    atoms.append(p.atom()[0])
            condition = tuple(atoms)
            if decision_id is None:
                raise ParseError("strategy line needs a 'decision:' prefix", p.tok.span)
        p.expect("->")
        action, _ = p.atom()
        if p.tok.kind != "eof":
            raise p.fail("unexpected trailing input")
        out.append(StrategyLine(decision_id, condition, action, lineno))
    return out


# -- JSON -------------------------------------------------------------------------


def _round(value: float) -> float | int:
    if not math.isfinite(value):
        return value
    return float(f"{value:.12g}")


def policy_dict(result) -> dict:
    return {
        "decisions": [
            {
                "id": p.decision,
                "entries": [
                    {
                        "action": str(e.action),
                        "condition": sorted(str(a) for a in e.condition),
                        "expected_utility": _round(e.value),
                    }
                    for e in p.entries
                ],
                "indifferent_default": str(p.default_action),
            }
            for p in result.policies
        ],
        "value": _round(result.value),
    }


def emit_policy_json(result) -> str:
    return json.dumps(policy_dict(result), sort_keys=True) + "\n"
