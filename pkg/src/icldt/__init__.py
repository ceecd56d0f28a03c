"""Decision-theoretic independent choice logic: theories, abduction, policy solving."""

from .abduction import Explainer, ExplanationSet
from .errors import ICLError, ParseError, ResourceLimitError
from .model import Alternative, Atom, ObservationAlternative, Rule, Theory, atom
from .oracle import Strategy, expected_utility, optimal_strategy, verify_explanations
from .parser import emit_policy_json, parse, parse_file, parse_formula, pretty_print
from .solver import SolveResult, solve
from .validation import ValidationReport, decision_order, validate

__version__ = "0.1.0"

__all__ = [
    "Alternative",
    "Atom",
    "Explainer",
    "ExplanationSet",
    "ICLError",
    "ObservationAlternative",
    "ParseError",
    "ResourceLimitError",
    "Rule",
    "SolveResult",
    "Strategy",
    "Theory",
    "ValidationReport",
    "atom",
    "decision_order",
    "emit_policy_json",
    "expected_utility",
    "optimal_strategy",
    "parse",
    "parse_file",
    "parse_formula",
    "pretty_print",
    "solve",
    "validate",
    "verify_explanations",
]
