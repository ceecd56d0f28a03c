"""Random small theories for property tests.

Utilities and derived observations come from random decision trees over
the choice alternatives, so every world gets exactly one utility and
exactly one atom of each observation alternative. Tree paths are then
generalized (literals dropped while the value stays fixed), which makes
explanations overlap, and some rule bodies are factored through helper
atoms so the program has more than one layer.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .model import AGENT, NATURE, Alternative, Atom, ObservationAlternative, Rule, Theory, utility_atom
from .oracle import Strategy, information_states, strategy_count
from .validation import validate


@dataclass(frozen=True)
class GeneratorConfig:
    max_nature: int = 3
    max_atoms: int = 3
    max_decisions: int = 2
    max_decision_atoms: int = 3
    max_rules: int = 12
    max_utility: int = 10
    max_strategies: int = 20_000
    derived_observable_prob: float = 0.4
    generalize_prob: float = 0.6
    factor_prob: float = 0.3
    max_tries: int = 1000


# A tree is either a leaf value or (alternative, {choice: subtree}).
Tree = object


def _grow(rng, alts: list[Alternative], leaf, depth: int, max_depth: int, force_split: bool = False) -> Tree:
    if not alts or (not force_split and (depth >= max_depth or rng.random() < 0.25 + 0.2 * depth)):
        return leaf()
    k = int(rng.integers(len(alts)))
    alt = alts[k]
    rest = alts[:k] + alts[k + 1 :]
    return (alt, {c: _grow(rng, rest, leaf, depth + 1, max_depth) for c in alt.choices})


def _paths(tree: Tree, prefix: tuple[Atom, ...] = ()):
    if isinstance(tree, tuple):
        _, children = tree
        for c, sub in children.items():
            yield from _paths(sub, prefix + (c,))
    else:
        yield prefix, tree


def _lookup(tree: Tree, choices: set[Atom]):
    while isinstance(tree, tuple):
        alt, children = tree
        tree = next(sub for c, sub in children.items() if c in choices)
    return tree


def _generalize(rng, tree: Tree, alts: list[Alternative], prob: float) -> list[tuple[tuple[Atom, ...], object]]:
    """Tree paths with literals dropped where the leaf value is unaffected."""
    worlds = [set(w) for w in itertools.product(*(a.choices for a in alts))]
    out = []
    for path, value in _paths(tree):
        body = list(path)
        if rng.random() < prob:
            for lit in rng.permutation(len(path)):
                cand = [a for a in body if a != path[lit]]
                if all(_lookup(tree, w) == value for w in worlds if set(cand) <= w):
                    body = cand
        out.append((tuple(body), value))
    return out


def _order(body, rank) -> tuple[Atom, ...]:
    return tuple(sorted(body, key=rank.__getitem__))


def random_theory(rng: np.random.Generator, config: GeneratorConfig = GeneratorConfig()) -> Theory:
    """One valid random theory within the configured bounds."""
    # fix the decision count first so rejection does not bias it downward
    n_decisions = int(rng.integers(1, config.max_decisions + 1))
    for _ in range(config.max_tries):
        theory = _attempt(rng, config, n_decisions)
        if theory is not None:
            return theory
    raise RuntimeError("no theory satisfied the generator bounds")


def _attempt(rng, cfg: GeneratorConfig, n_decisions: int) -> Theory | None:
    letters = "abc"
    nature_alts = []
    for i in range(int(rng.integers(1, cfg.max_nature + 1))):
        n = int(rng.integers(2, cfg.max_atoms + 1))
        probs = rng.dirichlet(np.ones(n))
        probs = np.round(probs, 2)
        probs[-1] = round(1.0 - float(probs[:-1].sum()), 2)
        if probs[-1] < 0:
            return None
        atoms = tuple(Atom(f"n{i}", (letters[j],)) for j in range(n))
        nature_alts.append(Alternative(f"n{i}", NATURE, atoms, tuple(float(p) for p in probs)))

    blocks: list = list(nature_alts)
    rules: list[Rule] = []
    decisions: list[Alternative] = []
    observes: list[str] = []
    for k in range(n_decisions):
        # what this decision sees beyond the previous one
        visible = list(nature_alts) + decisions
        if rng.random() < cfg.derived_observable_prob:
            oid = f"o{k}"
            n = int(rng.integers(2, 4))
            obs_atoms = tuple(Atom(oid, (letters[j],)) for j in range(n))
            tree = _grow(rng, visible, lambda: obs_atoms[int(rng.integers(n))], 0, 2, force_split=True)
            for body, head in _generalize(rng, tree, visible, cfg.generalize_prob):
                rules.append(Rule(head, body))
            blocks.append(ObservationAlternative(oid, obs_atoms))
            new = [oid]
        else:
            unseen = [a.id for a in nature_alts if a.id not in observes]
            new = [unseen[int(rng.integers(len(unseen)))]] if unseen and rng.random() < 0.8 else []
        if decisions:
            new = [decisions[-1].id] + new
        observes = observes + new
        n = int(rng.integers(2, cfg.max_decision_atoms + 1))
        d = Alternative(f"d{k}", AGENT, tuple(Atom(f"d{k}", (letters[j],)) for j in range(n)), (), tuple(observes))
        decisions.append(d)
        blocks.append(d)

    alts = nature_alts + decisions
    leaf = lambda: int(rng.integers(0, cfg.max_utility + 1))  # noqa: E731
    tree = _grow(rng, alts, leaf, 0, 3, force_split=True)
    for body, value in _generalize(rng, tree, alts, cfg.generalize_prob):
        rules.append(Rule(utility_atom(value), body))

    theory = Theory(tuple(blocks), tuple(rules))
    rank = theory.atom_rank
    rules = [Rule(r.head, _order(r.body, rank)) for r in rules]
    rules = _factor(rng, rules, cfg.factor_prob)
    if len(rules) > cfg.max_rules:
        return None
    theory = Theory(tuple(blocks), tuple(rules))
    if strategy_count(theory) > cfg.max_strategies:
        return None
    if not validate(theory).ok:
        return None
    return theory


def _factor(rng, rules: list[Rule], prob: float) -> list[Rule]:
    """Route a prefix of some bodies through helper atoms."""
    helpers: dict[tuple[Atom, ...], Atom] = {}
    out: list[Rule] = []
    extra: list[Rule] = []
    for r in rules:
        if len(r.body) >= 2 and rng.random() < prob:
            cut = int(rng.integers(1, len(r.body)))
            prefix = r.body[:cut]
            h = helpers.get(prefix)
            if h is None:
                h = Atom(f"h{len(helpers)}")
                helpers[prefix] = h
                extra.append(Rule(h, prefix))
            out.append(Rule(r.head, (h,) + r.body[cut:]))
        else:
            out.append(r)
    return extra + out


def random_strategy(rng: np.random.Generator, theory: Theory) -> Strategy:
    tables = {}
    for d in theory.decisions:
        tables[d.id] = {s: d.choices[int(rng.integers(len(d.choices)))] for s in information_states(theory, d)}
    return Strategy(tables)


def random_explanation_set(rng: np.random.Generator, theory: Theory, max_members: int = 5) -> list[frozenset[Atom]]:
    """Random consistent composite choices over all alternatives (may overlap)."""
    alts = theory.alternatives
    out = []
    for _ in range(int(rng.integers(1, max_members + 1))):
        picked = [a for a in alts if rng.random() < 0.5]
        out.append(frozenset(a.choices[int(rng.integers(len(a.choices)))] for a in picked))
    return out
