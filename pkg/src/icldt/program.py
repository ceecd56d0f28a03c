"""Least-model evaluation of acyclic definite programs over possible worlds."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from graphlib import CycleError, TopologicalSorter
from typing import Iterable, Iterator, Mapping, Union

from .errors import ICLError
from .model import Atom, Rule, Theory

# -- formulas ---------------------------------------------------------------


class _Top:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "true"

    __str__ = __repr__

    def __reduce__(self):
        return (_Top, ())


TRUE = _Top()


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"({self.left} & {self.right})"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"({self.left} | {self.right})"


Formula = Union[Atom, And, Or, _Top]


def conj(*parts: Formula) -> Formula:
    """Right-nested conjunction; the empty conjunction is ``TRUE``."""
    if not parts:
        return TRUE
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = And(p, out)
    return out


def disj(*parts: Formula) -> Formula:
    if not parts:
        raise ValueError("empty disjunction")
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Or(p, out)
    return out


def holds(formula: Formula, true_atoms: frozenset[Atom] | set[Atom]) -> bool:
    if formula is TRUE:
        return True
    if isinstance(formula, Atom):
        return formula in true_atoms
    if isinstance(formula, And):
        return holds(formula.left, true_atoms) and holds(formula.right, true_atoms)
    if isinstance(formula, Or):
        return holds(formula.left, true_atoms) or holds(formula.right, true_atoms)
    raise TypeError(f"not a formula: {formula!r}")


def formula_atoms(formula: Formula) -> Iterator[Atom]:
    if isinstance(formula, Atom):
        yield formula
    elif isinstance(formula, (And, Or)):
        yield from formula_atoms(formula.left)
        yield from formula_atoms(formula.right)


# -- acyclicity ---------------------------------------------------------------


class CyclicProgramError(ICLError):
    def __init__(self, cycle: list[Atom]):
        super().__init__("CYCLIC_PROGRAM", "cycle through " + " -> ".join(map(str, cycle)))
        self.cycle = cycle


def acyclic_order(rules: Iterable[Rule], atoms: Iterable[Atom] = ()) -> list[Atom]:
    """Topological order of the atom dependency graph (body atom before head).

    Raises CyclicProgramError carrying the atoms of one cycle.
    """
    ts: TopologicalSorter = TopologicalSorter()
    for a in atoms:
        ts.add(a)
    for r in rules:
        ts.add(r.head, *r.body)
    try:
        return list(ts.static_order())
    except CycleError as exc:
        witness = list(exc.args[1])
        # graphlib reports the cycle closed (first node repeated) in reverse edge order
        if len(witness) > 1 and witness[0] == witness[-1]:
            witness = witness[:-1]
        witness.reverse()
        start = min(range(len(witness)), key=lambda i: str(witness[i]))
        raise CyclicProgramError(witness[start:] + witness[:start]) from None


# -- worlds -------------------------------------------------------------------

Selector = Mapping[str, Atom]


def least_model(theory: Theory, choices: Iterable[Atom]) -> frozenset[Atom]:
    """Least model of the facts together with the given atomic choices.

    Works for any set of choices, total or partial; rules are fired once
    each in topological order, which reaches the fixpoint for acyclic
    programs.
    """
    true = set(choices)
    for r in theory.ordered_rules:
        if r.head not in true and all(b in true for b in r.body):
            true.add(r.head)
    return frozenset(true)


def world(theory: Theory, selector: Selector) -> frozenset[Atom]:
    return least_model(theory, selector.values())


def truth(theory: Theory, selector: Selector, query: Formula) -> bool:
    return holds(query, world(theory, selector))


def utilities_in(true_atoms: Iterable[Atom]) -> set[float]:
    return {a.utility_value for a in true_atoms if a.is_utility}


def world_utility(theory: Theory, selector: Selector) -> float:
    values = utilities_in(world(theory, selector))
    if not values:
        raise ICLError("UTILITY_INCOMPLETE", f"no utility in world {_show(selector)}")
    if len(values) > 1:
        raise ICLError(
            "UTILITY_INCONSISTENT",
            f"utilities {sorted(values)} in world {_show(selector)}",
        )
    return values.pop()


def _show(selector: Selector) -> str:
    return "{" + ", ".join(str(a) for a in selector.values()) + "}"


def world_count(theory: Theory) -> int:
    n = 1
    for alt in theory.alternatives:
        n *= len(alt.choices)
    return n


def enumerate_worlds(theory: Theory) -> Iterator[dict[str, Atom]]:
    """Every selector over all alternatives, lexicographic in declaration order."""
    alts = theory.alternatives
    ids = [a.id for a in alts]
    for combo in itertools.product(*(a.choices for a in alts)):
        yield dict(zip(ids, combo))


def nature_weight(theory: Theory, selector: Selector) -> float:
    w = 1.0
    for alt in theory.nature:
        w *= alt.prob(selector[alt.id])
    return w
