"""Explanations as sets of composite choices.

A composite choice is a ``frozenset`` of atomic choices with at most one
atom per alternative. An explanation set is a DNF over atomic choices:
the worlds it covers are those extending at least one member.
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import ICLError
from .model import Alternative, Atom, Theory
from .program import TRUE, And, Formula, Or

CompositeChoice = frozenset  # frozenset[Atom]


class UndefinedAtomWarning(UserWarning):
    """An atom is neither an atomic choice nor a rule head; it is never true."""


@dataclass(frozen=True)
class ExplanationSet:
    choices: tuple[frozenset[Atom], ...] = ()
    exclusive: bool = False

    def __iter__(self) -> Iterator[frozenset[Atom]]:
        return iter(self.choices)

    def __len__(self) -> int:
        return len(self.choices)

    def __bool__(self) -> bool:
        return bool(self.choices)

    def as_set(self) -> frozenset[frozenset[Atom]]:
        return frozenset(self.choices)


EMPTY = ExplanationSet((), True)


class Explainer:
    """Abduction over one theory: expl, combination, splitting, exclusivity, probability.

    Results of ``expl`` on atoms are memoized, so reuse one instance for
    repeated queries against the same theory.
    """

    def __init__(self, theory: Theory, quiet: bool = False):
        self.theory = theory
        self.quiet = quiet
        self.choice_of = theory.choice_of
        self._prob = {c: p for alt in theory.nature for c, p in zip(alt.choices, alt.probs)}
        self._memo: dict[Atom, ExplanationSet] = {}

    # -- basics -----------------------------------------------------------------

    def alt_id(self, a: Atom) -> str:
        try:
            return self.choice_of[a].id
        except KeyError:
            raise ICLError("NOT_ATOMIC_CHOICE", f"{a} is not an atomic choice") from None

    def consistent(self, kappa: Iterable[Atom]) -> bool:
        ids = [self.alt_id(a) for a in kappa]
        return len(ids) == len(set(ids))

    def compatible(self, k1: frozenset[Atom], k2: frozenset[Atom]) -> bool:
        """True iff the union of two consistent composite choices is consistent."""
        choice_of = self.choice_of
        alts1 = {choice_of[a].id: a for a in k1}
        for a in k2:
            other = alts1.get(choice_of[a].id)
            if other is not None and other != a:
                return False
        return True

    def alternatives(self, K: Iterable[frozenset[Atom]]) -> set[str]:
        """Ids of all alternatives mentioned anywhere in ``K``."""
        return {self.choice_of[a].id for kappa in K for a in kappa}

    def ordered(self, K: Iterable[frozenset[Atom]]) -> tuple[frozenset[Atom], ...]:
        key = self.theory.choice_key
        return tuple(sorted(set(K), key=lambda k: (len(k), key(k))))

    def minimize(self, K: Iterable[frozenset[Atom]]) -> tuple[frozenset[Atom], ...]:
        """Drop every member that is a superset of another member."""
        kept: list[frozenset[Atom]] = []
        for kappa in self.ordered(K):
            if not any(k <= kappa for k in kept):
                kept.append(kappa)
        key = self.theory.choice_key
        return tuple(sorted(kept, key=key))

    def make_set(self, K: Iterable[frozenset[Atom]], exclusive: bool = False) -> ExplanationSet:
        return ExplanationSet(self.minimize(K), exclusive)

    def is_exclusive(self, K: Iterable[frozenset[Atom]]) -> bool:
        members = list(K)
        for i, k1 in enumerate(members):
            for k2 in members[i + 1 :]:
                if self.compatible(k1, k2):
                    return False
        return True

    # -- combination ------------------------------------------------------------------

    def combine(self, K1: ExplanationSet, K2: ExplanationSet) -> ExplanationSet:
        unions = [k1 | k2 for k1 in K1 for k2 in K2 if self.compatible(k1, k2)]
        members = self.minimize(unions)
        exclusive = K1.exclusive and K2.exclusive and self.is_exclusive(members)
        return ExplanationSet(members, exclusive)

    def union(self, K1: ExplanationSet, K2: ExplanationSet) -> ExplanationSet:
        return self.make_set(list(K1) + list(K2))

    # -- expl ---------------------------------------------------------------------------

    def expl(self, g: Formula) -> ExplanationSet:
        """Covering set of explanations of a ground formula, subsumption-minimal."""
        if g is TRUE:
            return ExplanationSet((frozenset(),), True)
        if isinstance(g, And):
            return self.combine(self.expl(g.left), self.expl(g.right))
        if isinstance(g, Or):
            return self.union(self.expl(g.left), self.expl(g.right))
        if isinstance(g, Atom):
            return self._expl_atom(g)
        raise TypeError(f"not a formula: {g!r}")

    def _expl_atom(self, g: Atom) -> ExplanationSet:
        cached = self._memo.get(g)
        if cached is not None:
            return cached
        if g in self.choice_of:
            result = ExplanationSet((frozenset([g]),), True)
        else:
            rules = self.theory.rules_by_head.get(g, ())
            if not rules and not self.quiet:
                warnings.warn(f"UNDEFINED_ATOM: {g} has no rules and is not an atomic choice", UndefinedAtomWarning)
            members: list[frozenset[Atom]] = []
            for r in rules:
                body = ExplanationSet((frozenset(),), True)
                for b in r.body:
                    body = self.combine(body, self._expl_atom(b))
                    if not body:
                        break
                members.extend(body)
            result = self.make_set(members)
            if len(result) <= 1:
                result = ExplanationSet(result.choices, True)
        self._memo[g] = result
        return result

    # -- splitting ------------------------------------------------------------------------

    def split(self, kappa: frozenset[Atom], alt: Alternative) -> list[frozenset[Atom]]:
        if any(c in kappa for c in alt.choices):
            raise ICLError("ALREADY_SPLIT", f"composite choice already selects from {alt.id!r}")
        return [kappa | {c} for c in alt.choices]

    def make_exclusive(self, K: ExplanationSet | Iterable[frozenset[Atom]]) -> ExplanationSet:
        """An equivalent, pairwise-incompatible explanation set.

        Members are inserted in the deterministic order; a newcomer that is
        compatible with an accepted member is either dropped (if subsumed)
        or split on the first alternative of the accepted member it lacks.
        """
        if isinstance(K, ExplanationSet) and K.exclusive:
            return K
        key = self.theory.choice_key
        alt_rank = self.theory.alt_rank
        queue = deque(sorted(set(K), key=key))
        accepted: list[frozenset[Atom]] = []
        while queue:
            kappa = queue.popleft()
            for r in accepted:
                if not self.compatible(kappa, r):
                    continue
                if r <= kappa:
                    break
                missing = min((self.choice_of[a] for a in r - kappa), key=lambda alt: alt_rank[alt.id])
                queue.extendleft(reversed(self.split(kappa, missing)))
                break
            else:
                accepted.append(kappa)
        return ExplanationSet(tuple(sorted(accepted, key=key)), True)

    # -- probability ------------------------------------------------------------------------

    def prob(self, kappa: Iterable[Atom], conditioning: Iterable[Atom] = ()) -> float:
        """Product of nature probabilities; agent choices must be conditioned on."""
        cond = conditioning if isinstance(conditioning, (set, frozenset)) else set(conditioning)
        rank = self.theory.atom_rank
        p = 1.0
        # fixed multiplication order keeps results identical across processes
        for a in sorted(kappa, key=rank.__getitem__):
            q = self._prob.get(a)
            if q is None:
                alt = self.choice_of.get(a)
                if alt is None:
                    raise ICLError("NOT_ATOMIC_CHOICE", f"{a} is not an atomic choice")
                if a not in cond:
                    raise ICLError(
                        "UNCONDITIONED_AGENT_CHOICE",
                        f"agent choice {a} is not among the conditioning atoms",
                    )
                continue
            p *= q
        return p

    def prob_set(self, K: ExplanationSet, conditioning: Iterable[Atom] = ()) -> float:
        if not K.exclusive:
            raise ICLError("NOT_EXCLUSIVE", "probability of a non-exclusive explanation set")
        cond = set(conditioning)
        return sum(self.prob(kappa, cond) for kappa in K)

    def probability(self, g: Formula) -> float:
        """Probability of a formula whose explanations mention only nature choices."""
        return self.prob_set(self.make_exclusive(self.expl(g)))


def covers(K: Iterable[frozenset[Atom]], choices: frozenset[Atom] | set[Atom]) -> bool:
    """True iff some member of ``K`` is contained in the given choices."""
    return any(kappa <= choices for kappa in K)
