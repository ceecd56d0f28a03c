"""Structured dynamic programming for the last decision, and backward induction.

For one decision ``d`` the pipeline is::

    S0 = initial_prepolicies()          # explanations of each utility value
    S1 = expand(S0)                     # case analysis on relevant observations
    T  = expectation(S1)                # expected utility per (action, condition)
    P  = optimize(T)                    # dominance pruning and splitting

Only the observations that can change the utility of some action are ever
split on, so ``P`` is usually much smaller than one entry per information
state. Earlier decisions are handled by turning ``P`` into rules that
define the decision's atoms and solving the reduced theory again.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .abduction import ExplanationSet, Explainer
from .errors import ICLError
from .model import Alternative, Atom, ObservationAlternative, Rule, Theory, utility_atom
from .validation import decision_order

VALUE_TOLERANCE = 1e-12
ZERO_PROBABILITY = 1e-15


class ZeroProbabilityWarning(UserWarning):
    """An (action, condition) group has no probability mass and was dropped."""


@dataclass(frozen=True)
class AlphaEntry:
    observation: Atom
    explanations: ExplanationSet


@dataclass(frozen=True)
class PrePolicy:
    action: Atom
    condition: frozenset[Atom]
    explanations: ExplanationSet
    utility: float

    def __str__(self) -> str:
        K = ", ".join("{" + ", ".join(sorted(map(str, k))) + "}" for k in self.explanations)
        return f"<{self.action}, {_show(self.condition)}, {{{K}}}, {self.utility:g}>"


@dataclass(frozen=True)
class ExpectedTuple:
    action: Atom
    condition: frozenset[Atom]
    value: float

    def __str__(self) -> str:
        return f"<{self.action}, {_show(self.condition)}, {self.value:.12g}>"


@dataclass(frozen=True)
class IndifferentRegion:
    """Explanation of a utility value that mentions no action of the decision."""

    choice: frozenset[Atom]
    value: float


def _show(atoms: Iterable[Atom]) -> str:
    return "{" + ", ".join(sorted(map(str, atoms))) + "}"


@dataclass
class CompactPolicy:
    decision: str
    entries: list[ExpectedTuple]
    indifferent: list[IndifferentRegion]
    default_action: Atom
    observed: list[str]
    rules: tuple[Rule, ...] = ()
    stats: dict[str, int] = field(default_factory=dict)

    def action_for(self, state: Iterable[Atom]) -> Atom:
        """Action prescribed when the given observation atoms are true."""
        s = set(state)
        for e in self.entries:
            if e.condition <= s:
                return e.action
        return self.default_action


@dataclass
class SolveResult:
    policies: list[CompactPolicy]  # last decision first
    value: float
    theory: Theory  # every decision replaced by its policy rules

    def policy(self, decision_id: str) -> CompactPolicy:
        for p in self.policies:
            if p.decision == decision_id:
                return p
        raise KeyError(decision_id)


def autonomous(explainer: Explainer, K1: Iterable[frozenset[Atom]], K2: Iterable[frozenset[Atom]]) -> bool:
    """Explanation sets are autonomous when they mention disjoint alternatives."""
    return explainer.alternatives(K1).isdisjoint(explainer.alternatives(K2))


class DecisionStage:
    """All the structure needed to optimize one decision of a theory.

    ``decision`` must be the last decision: every other decision that
    matters to utility is observed by it.
    """

    def __init__(self, theory: Theory, decision: Alternative, explainer: Explainer | None = None):
        self.theory = theory
        self.decision = decision
        self.actions = decision.choices
        self.E = explainer or Explainer(theory, quiet=True)
        self.observed: list[ObservationAlternative] = theory.observed(decision)
        self.block_of: dict[Atom, ObservationAlternative] = {a: o for o in self.observed for a in o.atoms}
        self._rank = theory.atom_rank
        self._alpha: dict[str, list[AlphaEntry]] | None = None
        self._alpha_alts: dict[str, set[str]] = {}
        self.stats: dict[str, int] = {}

    # -- observations -----------------------------------------------------------------

    def alpha(self) -> dict[str, list[AlphaEntry]]:
        """Exclusive explanations of each atom of each observed alternative."""
        if self._alpha is None:
            self._alpha = {}
            for o in self.observed:
                entries = [AlphaEntry(a, self.E.make_exclusive(self.E.expl(a))) for a in o.atoms]
                self._alpha[o.id] = entries
                self._alpha_alts[o.id] = self.E.alternatives(k for e in entries for k in e.explanations)
        return self._alpha

    def obs_consistent(self, condition: Iterable[Atom]) -> bool:
        blocks = [self.block_of[a].id for a in condition]
        return len(blocks) == len(set(blocks))

    def _first(self, atoms: Iterable[Atom]) -> Atom:
        return min(atoms, key=lambda a: self._rank.get(a, math.inf))

    def _is_autonomous_of(self, K: ExplanationSet, block_id: str) -> bool:
        self.alpha()
        return self.E.alternatives(K).isdisjoint(self._alpha_alts[block_id])

    # -- pre-policies ------------------------------------------------------------------

    def initial_prepolicies(self) -> tuple[list[PrePolicy], list[IndifferentRegion]]:
        """Pre-policies with empty conditions, plus action-free explanations."""
        S: list[PrePolicy] = []
        indifferent: list[IndifferentRegion] = []
        actions = set(self.actions)
        for u in self.theory.utility_values:
            K = self.E.make_exclusive(self.E.expl(utility_atom(u)))
            for a in self.actions:
                members = tuple(k for k in K if a in k)
                if members:
                    S.append(PrePolicy(a, frozenset(), ExplanationSet(members, True), u))
            indifferent.extend(IndifferentRegion(k, u) for k in K if not (k & actions))
        return S, indifferent

    def observation_full(self, p: PrePolicy) -> bool:
        return self._relevant_block(p) is None

    def _relevant_block(self, p: PrePolicy) -> ObservationAlternative | None:
        """First observed alternative not in the condition that p's explanations touch."""
        fixed = {self.block_of[a].id for a in p.condition}
        for o in self.observed:
            if o.id not in fixed and not self._is_autonomous_of(p.explanations, o.id):
                return o
        return None

    def split_prepolicy(self, p: PrePolicy, o: ObservationAlternative) -> list[PrePolicy]:
        """Case analysis of p on every value of observation alternative o."""
        out = []
        for entry in self.alpha()[o.id]:
            K = self.E.combine(p.explanations, entry.explanations)
            if K:
                out.append(PrePolicy(p.action, p.condition | {entry.observation}, K, p.utility))
        return out

    def expand(self, S: Sequence[PrePolicy]) -> list[PrePolicy]:
        out: list[PrePolicy] = []
        stack = list(reversed(S))
        while stack:
            p = stack.pop()
            o = self._relevant_block(p)
            if o is None:
                out.append(p)
            else:
                stack.extend(reversed(self.split_prepolicy(p, o)))
        return out

    # -- expectation ----------------------------------------------------------------------

    def _unfixed_decision(self, p: PrePolicy) -> ObservationAlternative | None:
        """An observed decision whose choice p's explanations use but p's condition does not fix."""
        fixed = {self.block_of[a].id for a in p.condition}
        for k in p.explanations:
            for a in k:
                if a in self.block_of and a != p.action and self.theory.is_agent_choice(a):
                    o = self.block_of[a]
                    if o.id not in fixed:
                        return o
        return None

    def _align_once(self, S: list[PrePolicy]) -> bool:
        for i, p in enumerate(S):
            o = self._unfixed_decision(p)
            if o is not None:
                S[i : i + 1] = self.split_prepolicy(p, o)
                return True
        for p in S:
            for j, q in enumerate(S):
                if p is q or p.action != q.action:
                    continue
                if p.condition <= q.condition or not self.obs_consistent(p.condition | q.condition):
                    continue
                omega = self._first(p.condition - q.condition)
                S[j : j + 1] = self.split_prepolicy(q, self.block_of[omega])
                return True
        return False

    def expectation(self, S: Sequence[PrePolicy]) -> list[ExpectedTuple]:
        """Expected utility of each action under each relevant observation condition."""
        S = list(S)
        while self._align_once(S):
            pass
        groups: dict[tuple[Atom, frozenset[Atom]], list[PrePolicy]] = {}
        for p in S:
            groups.setdefault((p.action, p.condition), []).append(p)
        out = []
        for (action, condition), members in groups.items():
            conditioning = condition | {action}
            weights = [self.E.prob_set(p.explanations, conditioning) for p in members]
            total = sum(weights)
            if total <= ZERO_PROBABILITY:
                warnings.warn(
                    f"ZERO_PROBABILITY_CONDITION: {action} under {_show(condition)} dropped",
                    ZeroProbabilityWarning,
                )
                continue
            values = {p.utility for p in members}
            if len(values) == 1:
                value = values.pop()
            else:
                value = sum(w * p.utility for w, p in zip(weights, members)) / total
            out.append(ExpectedTuple(action, condition, value))
        return self._sorted(out)

    def _sorted(self, T: Iterable[ExpectedTuple]) -> list[ExpectedTuple]:
        action_rank = {a: i for i, a in enumerate(self.actions)}
        key = self.theory.choice_key
        return sorted(T, key=lambda t: (key(t.condition), action_rank[t.action]))

    # -- optimization --------------------------------------------------------------------

    def _drop_dominated(self, T: list[ExpectedTuple]) -> bool:
        removed = False
        i = 0
        while i < len(T):
            ti = T[i]
            dominated = False
            for j, tj in enumerate(T):
                if i == j or not tj.condition <= ti.condition:
                    continue
                if tj.condition == ti.condition and abs(ti.value - tj.value) <= VALUE_TOLERANCE:
                    dominated = j < i
                else:
                    dominated = ti.value <= tj.value + VALUE_TOLERANCE
                if dominated:
                    break
            if dominated:
                del T[i]
                removed = True
            else:
                i += 1
        return removed

    def _split_weaker(self, T: list[ExpectedTuple]) -> bool:
        for i, ti in enumerate(T):
            for tj in T:
                if ti.action == tj.action or not ti.value < tj.value - VALUE_TOLERANCE:
                    continue
                if not self.obs_consistent(ti.condition | tj.condition):
                    continue
                o = self.block_of[self._first(tj.condition - ti.condition)]
                T[i : i + 1] = [ExpectedTuple(ti.action, ti.condition | {c}, ti.value) for c in o.atoms]
                return True
        return False

    def optimize(self, T: Sequence[ExpectedTuple]) -> list[ExpectedTuple]:
        T = list(T)
        while True:
            self._drop_dominated(T)
            if not self._split_weaker(T):
                return T

    # -- policy as rules ------------------------------------------------------------------

    def run(self) -> CompactPolicy:
        S0, indifferent = self.initial_prepolicies()
        S1 = self.expand(S0)
        T = self.expectation(S1)
        entries = self.optimize(T)
        default = self.actions[0]
        rules = policy_rules(
            self.theory, self.decision, [(e.condition, e.action) for e in entries], default
        )
        states = 1
        for o in self.observed:
            states *= len(o.atoms)
        self.stats.update(
            initial_prepolicies=len(S0),
            expanded_prepolicies=len(S1),
            groups=len(T),
            entries=len(entries),
            information_states=states,
            naive_groups=states * len(self.actions),
        )
        return CompactPolicy(
            self.decision.id,
            entries,
            indifferent,
            default,
            [o.id for o in self.observed],
            rules,
            dict(self.stats),
        )


def policy_rules(
    theory: Theory,
    decision: Alternative,
    entries: Sequence[tuple[Iterable[Atom], Atom]],
    default: Atom,
) -> tuple[Rule, ...]:
    """Exclusive, exhaustive rules defining a decision from its observations.

    ``entries`` are (condition, action) pairs read first-match-wins; every
    observation state no entry covers gets ``default``. Conditions are
    carved into disjoint regions by splitting on observed alternatives.
    """
    observed = theory.observed(decision)
    block_of = {a: o for o in observed for a in o.atoms}
    rank = theory.atom_rank
    for cond, action in entries:
        for a in cond:
            if a not in block_of:
                raise ICLError("NOT_OBSERVED", f"{a} is not observed by decision {decision.id!r}")
        if action not in decision.choices:
            raise ICLError("NOT_AN_ACTION", f"{action} is not a choice of decision {decision.id!r}")

    def consistent(atoms: Iterable[Atom]) -> bool:
        ids = [block_of[a].id for a in atoms]
        return len(ids) == len(set(ids))

    remaining: list[frozenset[Atom]] = [frozenset()]
    regions: list[tuple[frozenset[Atom], Atom]] = []
    for cond, action in entries:
        cond = frozenset(cond)
        still: list[frozenset[Atom]] = []
        for r in remaining:
            if not consistent(r | cond):
                still.append(r)
                continue
            cur = r
            for o in sorted(cond - r, key=rank.get):
                still.extend(cur | {c} for c in block_of[o].atoms if c != o)
                cur = cur | {o}
            regions.append((cur, action))
        remaining = still
    regions.extend((r, default) for r in remaining)
    return tuple(Rule(action, tuple(sorted(region, key=rank.get))) for region, action in regions)


def expected_value(theory: Theory, explainer: Explainer | None = None) -> float:
    """Expected utility of a theory with no agent choices left."""
    if theory.decisions:
        raise ICLError("UNRESOLVED_DECISION", "theory still has decisions")
    E = explainer or Explainer(theory, quiet=True)
    total = 0.0
    for u in theory.utility_values:
        total += u * E.prob_set(E.make_exclusive(E.expl(utility_atom(u))))
    return total


def solve(theory: Theory) -> SolveResult:
    """Optimal policy for every decision, last decision first."""
    order = decision_order(theory)
    current = theory
    policies: list[CompactPolicy] = []
    for d in reversed(order):
        stage = DecisionStage(current, current.block_by_id[d.id])
        policy = stage.run()
        policies.append(policy)
        current = current.substitute_decision(d.id, policy.rules)
    return SolveResult(policies, expected_value(current), current)


def substitute_strategy(theory: Theory, decisions: dict[str, tuple[list[tuple[tuple[Atom, ...], Atom]], Atom]]) -> Theory:
    """Replace each decision by rules built from (entries, default), last decision first."""
    current = theory
    for d in reversed(decision_order(theory)):
        entries, default = decisions.get(d.id, ([], d.choices[0]))
        current = current.substitute_decision(d.id, policy_rules(current, current.block_by_id[d.id], entries, default))
    return current
