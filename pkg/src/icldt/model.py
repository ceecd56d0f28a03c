"""Domain types for single-agent independent choice theories.

A theory is a list of declared blocks (nature alternatives, decision
alternatives, observation alternatives) plus a ground definite program.
Everything is immutable; derived indices are computed lazily and cached.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterable, Mapping, Sequence, Union

UTILITY = "utility"


@dataclass(frozen=True, order=True)
class Atom:
    name: str
    args: tuple[str, ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return self.name
        return f"{self.name}({','.join(self.args)})"

    __repr__ = __str__

    @property
    def is_utility(self) -> bool:
        return self.name == UTILITY

    @property
    def utility_value(self) -> float:
        if not self.is_utility:
            raise ValueError(f"{self} is not a utility atom")
        return float(self.args[0])


def format_number(value: float) -> str:
    """Shortest round-tripping text for a float, without a trailing ``.0``."""
    text = repr(float(value))
    return text[:-2] if text.endswith(".0") else text


def utility_atom(value: float) -> Atom:
    return Atom(UTILITY, (format_number(value),))


def atom(text: str) -> Atom:
    """Build an atom from ``name`` or ``name(a,b)`` text (no validation)."""
    text = text.strip()
    if "(" not in text:
        return Atom(text)
    name, rest = text.split("(", 1)
    args = tuple(a.strip() for a in rest.rstrip(")").split(","))
    return Atom(name.strip(), args)


NATURE = "nature"
AGENT = "agent"


@dataclass(frozen=True)
class Alternative:
    """A choice alternative: mutually exclusive, exhaustive atomic choices.

    Nature alternatives carry ``probs`` aligned with ``choices``; agent
    alternatives (decisions) carry ``observes``, the ids of the blocks
    whose value is known when the decision is made.
    """

    id: str
    kind: str
    choices: tuple[Atom, ...]
    probs: tuple[float, ...] = ()
    observes: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in (NATURE, AGENT):
            raise ValueError(f"unknown alternative kind {self.kind!r}")

    @property
    def is_decision(self) -> bool:
        return self.kind == AGENT

    def prob(self, a: Atom) -> float:
        return self.probs[self.choices.index(a)]

    @property
    def atoms(self) -> tuple[Atom, ...]:
        return self.choices


def nature(id: str, probs: Mapping[str | Atom, float]) -> Alternative:
    items = [(x if isinstance(x, Atom) else atom(x), float(p)) for x, p in probs.items()]
    return Alternative(id, NATURE, tuple(a for a, _ in items), tuple(p for _, p in items))


def decision(id: str, choices: Iterable[str | Atom], observes: Iterable[str] = ()) -> Alternative:
    return Alternative(
        id, AGENT, tuple(x if isinstance(x, Atom) else atom(x) for x in choices), (), tuple(observes)
    )


@dataclass(frozen=True)
class ObservationAlternative:
    id: str
    atoms: tuple[Atom, ...]


Block = Union[Alternative, ObservationAlternative]


@dataclass(frozen=True)
class Rule:
    head: Atom
    body: tuple[Atom, ...] = ()

    @property
    def is_utility(self) -> bool:
        return self.head.is_utility

    def __str__(self) -> str:
        if not self.body:
            return f"{self.head}."
        return f"{self.head} <- {' & '.join(map(str, self.body))}."


def rule(head: str | Atom, *body: str | Atom) -> Rule:
    def conv(x):
        return x if isinstance(x, Atom) else atom(x)

    return Rule(conv(head), tuple(conv(b) for b in body))


@dataclass(frozen=True)
class Theory:
    blocks: tuple[Block, ...] = ()
    rules: tuple[Rule, ...] = ()

    # -- views ------------------------------------------------------------

    @property
    def nature(self) -> list[Alternative]:
        return [b for b in self.blocks if isinstance(b, Alternative) and b.kind == NATURE]

    @property
    def decisions(self) -> list[Alternative]:
        return [b for b in self.blocks if isinstance(b, Alternative) and b.kind == AGENT]

    @property
    def observables(self) -> list[ObservationAlternative]:
        return [b for b in self.blocks if isinstance(b, ObservationAlternative)]

    @cached_property
    def alternatives(self) -> tuple[Alternative, ...]:
        """Choice alternatives (nature and agent) in declaration order."""
        return tuple(b for b in self.blocks if isinstance(b, Alternative))

    @cached_property
    def block_by_id(self) -> dict[str, Block]:
        out: dict[str, Block] = {}
        for b in self.blocks:
            out.setdefault(b.id, b)
        return out

    @cached_property
    def choice_of(self) -> dict[Atom, Alternative]:
        """Maps each atomic choice to its alternative (first one wins on overlap)."""
        out: dict[Atom, Alternative] = {}
        for alt in self.alternatives:
            for c in alt.choices:
                out.setdefault(c, alt)
        return out

    def is_choice(self, a: Atom) -> bool:
        return a in self.choice_of

    def is_agent_choice(self, a: Atom) -> bool:
        alt = self.choice_of.get(a)
        return alt is not None and alt.kind == AGENT

    @cached_property
    def rules_by_head(self) -> dict[Atom, tuple[Rule, ...]]:
        out: dict[Atom, list[Rule]] = {}
        for r in self.rules:
            out.setdefault(r.head, []).append(r)
        return {h: tuple(rs) for h, rs in out.items()}

    @cached_property
    def ordered_rules(self) -> tuple[Rule, ...]:
        """Rules sorted so every head comes after the heads its body needs."""
        from .program import acyclic_order

        pos = {a: i for i, a in enumerate(acyclic_order(self.rules))}
        return tuple(sorted(self.rules, key=lambda r: pos[r.head]))

    @cached_property
    def utility_values(self) -> tuple[float, ...]:
        """Distinct utility values with rules, in order of first appearance."""
        seen: dict[float, None] = {}
        for r in self.rules:
            if r.is_utility:
                seen.setdefault(r.head.utility_value, None)
        return tuple(seen)

    @cached_property
    def atom_rank(self) -> dict[Atom, int]:
        """Global declaration order over every atom mentioned in the theory."""
        rank: dict[Atom, int] = {}

        def see(a: Atom) -> None:
            if a not in rank:
                rank[a] = len(rank)

        for b in self.blocks:
            if isinstance(b, Alternative):
                for c in b.choices:
                    see(c)
        for b in self.blocks:
            if isinstance(b, ObservationAlternative):
                for c in b.atoms:
                    see(c)
        for r in self.rules:
            see(r.head)
            for x in r.body:
                see(x)
        return rank

    @cached_property
    def alt_rank(self) -> dict[str, int]:
        return {alt.id: i for i, alt in enumerate(self.alternatives)}

    def sort_atoms(self, atoms: Iterable[Atom]) -> list[Atom]:
        rank = self.atom_rank
        return sorted(atoms, key=lambda a: (rank.get(a, len(rank)), str(a)))

    def choice_key(self, kappa: Iterable[Atom]) -> tuple:
        """Sort key for a composite choice under the global atom order."""
        rank = self.atom_rank
        return tuple(sorted(rank.get(a, len(rank)) for a in kappa))

    # -- observation structure -------------------------------------------

    def observation_block(self, block_id: str) -> ObservationAlternative:
        """Resolve a block id into the observation alternative it denotes."""
        b = self.block_by_id[block_id]
        if isinstance(b, ObservationAlternative):
            return b
        return ObservationAlternative(b.id, b.choices)

    def observed(self, d: Alternative) -> list[ObservationAlternative]:
        """The observation alternatives available to decision ``d``."""
        return [self.observation_block(i) for i in d.observes if i in self.block_by_id]

    @cached_property
    def effective_observables(self) -> tuple[ObservationAlternative, ...]:
        """Declared observables plus every block referenced by some decision."""
        ids: dict[str, None] = {}
        for b in self.blocks:
            if isinstance(b, ObservationAlternative):
                ids.setdefault(b.id, None)
        for d in self.decisions:
            for i in d.observes:
                if i in self.block_by_id:
                    ids.setdefault(i, None)
        return tuple(self.observation_block(i) for i in ids)

    @cached_property
    def obs_block_of(self) -> dict[Atom, ObservationAlternative]:
        out: dict[Atom, ObservationAlternative] = {}
        for o in self.effective_observables:
            for a in o.atoms:
                out.setdefault(a, o)
        return out

    # -- transformation ----------------------------------------------------

    def substitute_decision(self, decision_id: str, policy_rules: Sequence[Rule]) -> "Theory":
        """Remove a decision from the agent's choices and define it by rules."""
        blocks = tuple(b for b in self.blocks if b.id != decision_id)
        blocks = tuple(
            replace(b, observes=tuple(i for i in b.observes if i != decision_id))
            if isinstance(b, Alternative) and b.is_decision
            else b
            for b in blocks
        )
        return Theory(blocks, self.rules + tuple(policy_rules))
