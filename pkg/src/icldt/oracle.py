"""Brute-force ground truth: strategies, expected utility, explanation checks.

Everything here enumerates possible worlds (and, for ``optimal_strategy``,
every pure strategy) and uses none of the explanation machinery, so it can
serve as an independent check on the solver.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ICLError, ResourceLimitError
from .model import Alternative, Atom, Theory
from .parser import StrategyLine
from .program import Formula, enumerate_worlds, holds, least_model, nature_weight, world, world_count, world_utility
from .validation import DEFAULT_MAX_WORLDS, decision_order

DEFAULT_MAX_STRATEGIES = 10**6

State = tuple[Atom, ...]


@dataclass(frozen=True)
class Strategy:
    """For each decision id, a table from information state to action.

    An information state lists one true atom per observed alternative, in
    the order the decision declares its observations.
    """

    tables: dict[str, dict[State, Atom]]

    def action(self, decision_id: str, state: State) -> Atom:
        return self.tables[decision_id][state]

    def __hash__(self) -> int:  # pragma: no cover - tables are dicts
        return id(self)


def information_states(theory: Theory, d: Alternative) -> list[State]:
    return list(itertools.product(*(o.atoms for o in theory.observed(d))))


def observation_state(theory: Theory, d: Alternative, true_atoms: frozenset[Atom]) -> State:
    state = []
    for o in theory.observed(d):
        hits = [a for a in o.atoms if a in true_atoms]
        if len(hits) != 1:
            raise ICLError(
                "OBSERVATION_INCOMPLETE" if not hits else "OBSERVATION_INCONSISTENT",
                f"observation alternative {o.id!r} has {len(hits)} true atoms",
            )
        state.append(hits[0])
    return tuple(state)


def strategy_count(theory: Theory) -> int:
    n = 1
    for d in theory.decisions:
        n *= len(d.choices) ** len(information_states(theory, d))
    return n


def _check_worlds(theory: Theory, max_worlds: int) -> None:
    n = world_count(theory)
    if n > max_worlds:
        raise ResourceLimitError(f"{n} worlds exceed the bound of {max_worlds}", n)


def world_probabilities(theory: Theory, sigma: Strategy, max_worlds: int = DEFAULT_MAX_WORLDS) -> list[float]:
    """p(sigma, tau) for every selector tau, in enumeration order."""
    _check_worlds(theory, max_worlds)
    decisions = theory.decisions
    out = []
    for sel in enumerate_worlds(theory):
        true = world(theory, sel)
        follows = all(sel[d.id] == sigma.action(d.id, observation_state(theory, d, true)) for d in decisions)
        out.append(nature_weight(theory, sel) if follows else 0.0)
    return out


def expected_utility(theory: Theory, sigma: Strategy, max_worlds: int = DEFAULT_MAX_WORLDS) -> float:
    """Exact expected utility of a strategy by summing over every world."""
    _check_worlds(theory, max_worlds)
    decisions = theory.decisions
    terms = []
    for sel in enumerate_worlds(theory):
        true = world(theory, sel)
        if all(sel[d.id] == sigma.action(d.id, observation_state(theory, d, true)) for d in decisions):
            terms.append(nature_weight(theory, sel) * world_utility(theory, sel))
    return math.fsum(terms)


@dataclass
class _WorldTable:
    weight_utility: np.ndarray  # P0 weight times utility, per world
    state_index: list[np.ndarray]  # per decision: index of the observation state
    action_index: list[np.ndarray]  # per decision: index of the selected action
    states: list[list[State]]
    decisions: list[Alternative]


def _world_table(theory: Theory) -> _WorldTable:
    decisions = theory.decisions
    states = [information_states(theory, d) for d in decisions]
    state_pos = [{s: i for i, s in enumerate(ss)} for ss in states]
    wu, sidx, aidx = [], [[] for _ in decisions], [[] for _ in decisions]
    for sel in enumerate_worlds(theory):
        true = world(theory, sel)
        wu.append(nature_weight(theory, sel) * world_utility(theory, sel))
        for k, d in enumerate(decisions):
            sidx[k].append(state_pos[k][observation_state(theory, d, true)])
            aidx[k].append(d.choices.index(sel[d.id]))
    return _WorldTable(
        np.array(wu, dtype=float),
        [np.array(x, dtype=np.int64) for x in sidx],
        [np.array(x, dtype=np.int64) for x in aidx],
        states,
        decisions,
    )


def optimal_strategy(
    theory: Theory,
    max_strategies: int = DEFAULT_MAX_STRATEGIES,
    max_worlds: int = DEFAULT_MAX_WORLDS,
) -> tuple[Strategy, float]:
    """Maximize expected utility over every pure strategy.

    Strategies are visited in lexicographic order of their tables (each
    decision in declaration order, states in product order, actions in
    declaration order); the first maximizer wins ties.
    """
    count = strategy_count(theory)
    if count > max_strategies:
        raise ResourceLimitError(f"{count} strategies exceed the bound of {max_strategies}", count)
    _check_worlds(theory, max_worlds)
    table = _world_table(theory)
    per_decision = [
        itertools.product(range(len(d.choices)), repeat=len(ss)) for d, ss in zip(table.decisions, table.states)
    ]
    best_value, best = -math.inf, None
    for combo in itertools.product(*(list(p) for p in per_decision)):
        mask = np.ones(len(table.weight_utility), dtype=bool)
        for k, choice in enumerate(combo):
            mask &= np.asarray(choice, dtype=np.int64)[table.state_index[k]] == table.action_index[k]
        value = float(table.weight_utility[mask].sum())
        if best is None or value > best_value + 1e-12:
            best_value, best = value, combo
    tables = {
        d.id: {s: d.choices[a] for s, a in zip(ss, choice)}
        for d, ss, choice in zip(table.decisions, table.states, best)
    }
    sigma = Strategy(tables)
    return sigma, expected_utility(theory, sigma, max_worlds)


def conditional_values(theory: Theory, d: Alternative, sigma: Strategy) -> dict[State, dict[Atom, float]]:
    """Unnormalized expected utility of each action of ``d`` in each state.

    Other decisions follow ``sigma``. Dividing by the state probability
    would not change which action is best, so it is left out.
    """
    out: dict[State, dict[Atom, float]] = {s: {a: 0.0 for a in d.choices} for s in information_states(theory, d)}
    others = [x for x in theory.decisions if x.id != d.id]
    for sel in enumerate_worlds(theory):
        true = world(theory, sel)
        if not all(sel[x.id] == sigma.action(x.id, observation_state(theory, x, true)) for x in others):
            continue
        s = observation_state(theory, d, true)
        out[s][sel[d.id]] += nature_weight(theory, sel) * world_utility(theory, sel)
    return out


def sample_value(theory: Theory, sigma: Strategy, n: int, seed: int = 0) -> float:
    """Monte Carlo estimate of a strategy's value (cross-check only)."""
    rng = np.random.default_rng(seed)
    order = decision_order(theory)
    nature = theory.nature
    total = 0.0
    for _ in range(n):
        chosen = [alt.choices[rng.choice(len(alt.choices), p=alt.probs)] for alt in nature]
        for d in order:
            true = least_model(theory, chosen)
            chosen.append(sigma.action(d.id, observation_state(theory, d, true)))
        total += world_utility(theory, dict(zip([a.id for a in nature] + [d.id for d in order], chosen)))
    return total / n


# -- strategies from policies and files ---------------------------------------------


def strategy_from_rules(theory: Theory, entries: dict[str, tuple[Sequence[tuple[Iterable[Atom], Atom]], Atom]]) -> Strategy:
    """Tabulate first-match (condition -> action) lists with per-decision defaults."""
    tables = {}
    for d in theory.decisions:
        rows, default = entries.get(d.id, ([], d.choices[0]))
        rows = [(frozenset(c), a) for c, a in rows]
        table = {}
        for s in information_states(theory, d):
            ss = set(s)
            table[s] = next((a for c, a in rows if c <= ss), default)
        tables[d.id] = table
    return Strategy(tables)


def strategy_from_result(theory: Theory, result) -> Strategy:
    return strategy_from_rules(
        theory,
        {p.decision: ([(e.condition, e.action) for e in p.entries], p.default_action) for p in result.policies},
    )


def resolve_strategy_lines(theory: Theory, lines: Iterable[StrategyLine]) -> dict[str, tuple[list[tuple[tuple[Atom, ...], Atom]], Atom]]:
    """Group parsed strategy lines by decision, checking atoms against the theory."""
    out: dict[str, tuple[list, Atom | None]] = {d.id: ([], None) for d in theory.decisions}
    for ln in lines:
        alt = theory.choice_of.get(ln.action)
        if alt is None or not alt.is_decision:
            raise ICLError("NOT_AN_ACTION", f"line {ln.line}: {ln.action} is not a decision's atom")
        did = ln.decision or alt.id
        if did != alt.id:
            raise ICLError("NOT_AN_ACTION", f"line {ln.line}: {ln.action} is not a choice of {did!r}")
        rows, default = out[did]
        if ln.condition is None:
            if default is not None:
                raise ICLError("DUPLICATE_DEFAULT", f"line {ln.line}: second default for {did!r}")
            out[did] = (rows, ln.action)
        else:
            observed = {a for o in theory.observed(alt) for a in o.atoms}
            for a in ln.condition:
                if a not in observed:
                    raise ICLError("NOT_OBSERVED", f"line {ln.line}: {a} is not observed by {did!r}")
            rows.append((ln.condition, ln.action))
    return {
        did: (rows, default if default is not None else theory.block_by_id[did].choices[0])
        for did, (rows, default) in out.items()
    }


# -- explanation checks ---------------------------------------------------------------


@dataclass
class ExplanationReport:
    sound: bool = True
    covering: bool = True
    exclusive: bool | None = None
    counterexamples: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.sound and self.covering and self.exclusive is not False


def verify_explanations(
    theory: Theory,
    g: Formula,
    K: Iterable[frozenset[Atom]],
    exclusive: bool | None = None,
    max_worlds: int = DEFAULT_MAX_WORLDS,
) -> ExplanationReport:
    """Check soundness, covering and (optionally) exclusivity by enumeration."""
    _check_worlds(theory, max_worlds)
    members = list(K)
    if exclusive is None:
        exclusive = getattr(K, "exclusive", False)
    report = ExplanationReport(exclusive=True if exclusive else None)

    def show(sel) -> str:
        return "{" + ", ".join(str(a) for a in sel.values()) + "}"

    for sel in enumerate_worlds(theory):
        choices = set(sel.values())
        g_true = holds(g, world(theory, sel))
        hits = [k for k in members if k <= choices]
        if hits and not g_true:
            report.sound = False
            report.counterexamples.append(f"unsound: {set(map(str, hits[0]))} holds but g is false in {show(sel)}")
        if g_true and not hits:
            report.covering = False
            report.counterexamples.append(f"not covering: g is true in {show(sel)}")
        if exclusive and len(hits) > 1:
            report.exclusive = False
            report.counterexamples.append(f"not exclusive: {len(hits)} explanations hold in {show(sel)}")
    return report


def covered_worlds(theory: Theory, K: Iterable[frozenset[Atom]]) -> set[tuple[Atom, ...]]:
    """Worlds (as tuples of choices) extending some member of ``K``."""
    members = list(K)
    out = set()
    for sel in enumerate_worlds(theory):
        choices = set(sel.values())
        if any(k <= choices for k in members):
            out.add(tuple(sel.values()))
    return out
