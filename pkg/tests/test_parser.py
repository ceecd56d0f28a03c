import json

import pytest
from hypothesis import given, settings

from icldt.errors import ParseError
from icldt.model import atom
from icldt.parser import emit_policy_json, parse, parse_formula, parse_strategy, pretty_print, tokenize
from icldt.program import And, Or
from icldt.solver import solve

from conftest import seeds, theory_from_seed


def test_test_treat_shape(test_treat):
    assert len(test_treat.nature) == 4
    assert len(test_treat.decisions) == 2
    assert len(test_treat.effective_observables) == 3
    assert test_treat.block_by_id["d"].observes == ("ta", "as", "bs")


def test_empty_input():
    t = parse("% nothing here\n")
    assert t.blocks == () and t.rules == ()


def test_missing_comma_span():
    text = "nature n { a: 0.5 b: 0.5 }."
    with pytest.raises(ParseError) as exc:
        parse(text)
    span = exc.value.span
    assert (span.line, span.column) == (1, text.index("b:") + 1)
    assert exc.value.code == "SYNTAX"


@pytest.mark.parametrize(
    "text, code",
    [
        ("nature n { a: 0.5, b: 0.5 }. nature n { c: 1 }.", "DUPLICATE_BLOCK"),
        ("nature n { a: 0.5, a: 0.5 }.", "DUPLICATE_ATOM"),
        ("nature n { a: 1 }. decision d { a, b } observes { }.", "DUPLICATE_ATOM"),
        ("nature n { a: 1.5, b: -0.5 }.", "PROB_RANGE"),
        ("nature n { utility: 1 }.", "RESERVED_ATOM"),
    ],
)
def test_error_codes(text, code):
    with pytest.raises(ParseError) as exc:
        parse(text)
    assert exc.value.code == code


def test_error_span_on_later_line():
    with pytest.raises(ParseError) as exc:
        parse("nature n { a: 1 }.\n\n  p <- & q.")
    assert exc.value.span.line == 3
    assert exc.value.span.column == 8


def test_unexpected_character():
    with pytest.raises(ParseError) as exc:
        parse("p <- q $ r.")
    assert exc.value.span.column == 8


def test_numeral_arguments_and_utilities():
    t = parse("decision d { d(0), d(1) } observes { }. utility(-2.5) <- d(0). utility(3) <- d(1).")
    assert t.decisions[0].choices == (atom("d(0)"), atom("d(1)"))
    assert sorted(t.utility_values) == [-2.5, 3.0]


def test_keywords_usable_as_atoms():
    t = parse("nature. decision <- nature. utility(1).")
    assert [str(r.head) for r in t.rules] == ["nature", "decision", "utility(1)"]


def test_formula_grammar():
    f = parse_formula("a & (b | c(x))")
    assert isinstance(f, And) and isinstance(f.right, Or)
    with pytest.raises(ParseError):
        parse_formula("a &")


def test_round_trip_examples(test_treat, full_obs):
    for t in (test_treat, full_obs):
        assert parse(pretty_print(t)) == t


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_round_trip_random(seed):
    t = theory_from_seed(seed)
    assert parse(pretty_print(t)) == t


def test_tokens_carry_spans():
    for tok in tokenize("nature n {\n a: 1 }."):
        assert tok.span.line >= 1 and tok.span.column >= 1


def test_strategy_lines():
    lines = parse_strategy(
        """
        % comment
        ta: -> ta(hi)
        d: as(pos), ta(hi) -> d(1)
        d: default -> d(0)
        default -> ta(lo)
        """
    )
    assert [(ln.decision, ln.condition, str(ln.action)) for ln in lines] == [
        ("ta", (), "ta(hi)"),
        ("d", (atom("as(pos)"), atom("ta(hi)")), "d(1)"),
        ("d", None, "d(0)"),
        (None, None, "ta(lo)"),
    ]


def test_strategy_needs_decision_prefix():
    with pytest.raises(ParseError):
        parse_strategy("as(pos) -> d(1)")


def test_policy_json(full_obs):
    text = emit_policy_json(solve(full_obs))
    assert text.endswith("\n")
    doc = json.loads(text)
    assert list(doc) == ["decisions", "value"]
    (d,) = doc["decisions"]
    assert d["id"] == "d" and d["indifferent_default"] == "d1"
    assert len(d["entries"]) == 4
    assert doc["value"] == 6.75


def test_policy_json_without_decisions():
    t = parse("nature n { a: 0.25, b: 0.75 }. utility(4) <- a. utility(0) <- b.")
    assert json.loads(emit_policy_json(solve(t))) == {"decisions": [], "value": 1.0}
