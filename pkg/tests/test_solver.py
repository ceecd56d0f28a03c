import dataclasses
import warnings

import pytest
from hypothesis import given, settings, strategies as st

from icldt.abduction import ExplanationSet
from icldt.errors import ICLError
from icldt.model import Rule, Theory, atom, utility_atom
from icldt.oracle import (
    conditional_values,
    information_states,
    optimal_strategy,
    strategy_from_result,
)
from icldt.parser import parse
from icldt.program import enumerate_worlds, world
from icldt.solver import (
    DecisionStage,
    ExpectedTuple,
    PrePolicy,
    autonomous,
    expected_value,
    policy_rules,
    solve,
    substitute_strategy,
)

from conftest import atoms, seeds, theory_from_seed


def eset(*members):
    return {frozenset(atom(a) for a in m) for m in members}


@pytest.fixture()
def stage_tt(test_treat):
    return DecisionStage(test_treat, test_treat.block_by_id["d"])


@pytest.fixture()
def stage_fo(full_obs):
    return DecisionStage(full_obs, full_obs.block_by_id["d"])


def pp(action, condition, members, u):
    return PrePolicy(atom(action), atoms(*condition), ExplanationSet(tuple(frozenset(map(atom, m)) for m in members), True), u)


def test_alpha_listing(stage_tt):
    alpha = {o: {str(e.observation): e.explanations.as_set() for e in entries} for o, entries in stage_tt.alpha().items()}
    assert alpha == {
        "ta": {"ta(hi)": eset(["ta(hi)"]), "ta(lo)": eset(["ta(lo)"])},
        "as": {
            "as(pos)": eset(["ta(hi)", "a(hi)"], ["ta(lo)", "a(lo)"]),
            "as(neg)": eset(["ta(hi)", "a(lo)"], ["a(med)"], ["ta(lo)", "a(hi)"]),
        },
        "bs": {
            "bs(pos)": eset(["b(pos)", "true_pos"], ["b(neg)", "false_pos"]),
            "bs(neg)": eset(["b(neg)", "true_neg"], ["b(pos)", "false_neg"]),
        },
    }


def test_alpha_of_atomic_choice_observation(full_obs):
    stage = DecisionStage(full_obs, full_obs.block_by_id["d"])
    for entries in stage.alpha().values():
        for e in entries:
            assert e.explanations.as_set() == {frozenset([e.observation])}


def test_initial_prepolicies(stage_tt, stage_fo):
    S, indifferent = stage_tt.initial_prepolicies()
    assert pp("d(0)", [], [["d(0)"]], 4) in S
    assert pp("d(1)", [], [["d(1)", "a(hi)"]], 10) in S
    assert pp("d(1)", [], [["d(1)", "a(med)"]], 3) in S
    assert indifferent == []
    _, indifferent = stage_fo.initial_prepolicies()
    assert [(set(map(str, r.choice)), r.value) for r in indifferent] == [({"a2", "e2", "c2"}, 4)]


def test_autonomy(stage_tt):
    K10 = ExplanationSet((atoms("d(1)", "a(hi)"),), True)
    alpha = stage_tt.alpha()
    assert autonomous(stage_tt.E, K10, [k for e in alpha["bs"] for k in e.explanations])
    assert not autonomous(stage_tt.E, K10, [k for e in alpha["as"] for k in e.explanations])
    assert not autonomous(stage_tt.E, [atoms("a(hi)")], [atoms("a(hi)")])


def test_observation_full(stage_tt):
    assert stage_tt.observation_full(pp("d(0)", [], [["d(0)"]], 4))
    assert not stage_tt.observation_full(pp("d(1)", [], [["d(1)", "a(hi)"]], 10))
    assert stage_tt.observation_full(pp("d(1)", ["as(pos)", "ta(hi)"], [["d(1)", "a(hi)", "ta(hi)"]], 10))


def test_expand_example(stage_tt):
    out = set(stage_tt.expand([pp("d(1)", [], [["d(1)", "a(hi)"]], 10)]))
    assert out == {
        pp("d(1)", ["as(pos)", "ta(hi)"], [["d(1)", "a(hi)", "ta(hi)"]], 10),
        pp("d(1)", ["as(neg)", "ta(lo)"], [["d(1)", "a(hi)", "ta(lo)"]], 10),
    }


def test_expand_is_a_fixpoint(stage_tt, stage_fo):
    for stage in (stage_tt, stage_fo):
        S = stage.expand(stage.initial_prepolicies()[0])
        assert all(stage.observation_full(p) for p in S)
        assert stage.expand(S) == S


def test_full_observability_conditions_match_rule_bodies(full_obs, stage_fo):
    S = stage_fo.expand(stage_fo.initial_prepolicies()[0])
    bodies = {frozenset(b for b in r.body if b not in stage_fo.actions) for r in full_obs.rules}
    for p in S:
        (k,) = p.explanations
        assert k - {p.action} == p.condition
        assert p.condition in bodies


def test_expectation_examples(stage_tt):
    S = stage_tt.expand(stage_tt.initial_prepolicies()[0])
    T = stage_tt.expectation(S)
    d0 = [t for t in T if t.action == atom("d(0)")]
    assert d0 == [ExpectedTuple(atom("d(0)"), frozenset(), 4)]
    t = next(t for t in T if t.action == atom("d(1)") and t.condition == atoms("as(pos)", "ta(hi)"))
    assert t.value == 10


def test_expectation_constant_utility_is_exact(stage_fo):
    T = stage_fo.expectation(stage_fo.expand(stage_fo.initial_prepolicies()[0]))
    values = {r.head.utility_value for r in stage_fo.theory.rules}
    assert all(t.value in values for t in T)


def test_optimize_examples(stage_fo):
    T = stage_fo.expectation(stage_fo.expand(stage_fo.initial_prepolicies()[0]))
    P = stage_fo.optimize(T)
    assert {(str(t.action), frozenset(map(str, t.condition)), t.value) for t in P} == {
        ("d1", frozenset({"a1"}), 7),
        ("d2", frozenset({"a2", "e1", "c2"}), 6),
        ("d1", frozenset({"a2", "e1", "c1"}), 7),
        ("d2", frozenset({"a2", "e2", "c1"}), 9),
    }
    single = [ExpectedTuple(atom("d1"), atoms("a1"), 3.0)]
    assert stage_fo.optimize(single) == single
    pair = [ExpectedTuple(atom("d1"), atoms("a1"), 3.0), ExpectedTuple(atom("d1"), atoms("a1", "e1"), 3.0)]
    assert stage_fo.optimize(pair) == pair[:1]


def test_solve_values(test_treat, full_obs):
    assert solve(full_obs).value == pytest.approx(6.75, abs=1e-12)
    r = solve(test_treat)
    assert [p.decision for p in r.policies] == ["d", "ta"]
    assert r.policy("ta").entries[0].action == atom("ta(hi)")
    assert r.value == pytest.approx(8.51, abs=1e-9)


def test_solve_without_decisions():
    t = parse("nature n { a: 0.2, b: 0.8 }. utility(5) <- a. utility(1) <- b.")
    r = solve(t)
    assert r.policies == []
    assert r.value == pytest.approx(0.2 * 5 + 0.8 * 1, abs=1e-15)


def test_expected_value_rejects_open_decisions(test_treat):
    with pytest.raises(ICLError) as exc:
        expected_value(test_treat)
    assert exc.value.code == "UNRESOLVED_DECISION"


def test_policy_rules_are_exclusive_and_exhaustive(test_treat):
    d = test_treat.block_by_id["d"]
    entries = [(atoms("as(pos)"), atom("d(1)")), (atoms("bs(neg)", "ta(lo)"), atom("d(2)")), (atoms("as(pos)", "ta(hi)"), atom("d(2)"))]
    rules = policy_rules(test_treat, d, entries, atom("d(0)"))
    for state in information_states(test_treat, d):
        s = set(state)
        fired = [r for r in rules if set(r.body) <= s]
        assert len(fired) == 1
        expected = next((a for c, a in entries if c <= s), atom("d(0)"))
        assert fired[0].head == expected


def test_policy_rules_errors(test_treat):
    d = test_treat.block_by_id["d"]
    with pytest.raises(ICLError) as exc:
        policy_rules(test_treat, d, [(atoms("a(hi)"), atom("d(1)"))], atom("d(0)"))
    assert exc.value.code == "NOT_OBSERVED"
    with pytest.raises(ICLError) as exc:
        policy_rules(test_treat, d, [(atoms("as(pos)"), atom("ta(hi)"))], atom("d(0)"))
    assert exc.value.code == "NOT_AN_ACTION"


def test_structure_counts(stage_fo):
    stage_fo.run()
    assert stage_fo.stats["groups"] < stage_fo.stats["naive_groups"] == 32


def test_zero_probability_group_dropped():
    t = parse(
        """
        nature n { a: 1, b: 0 }.
        decision d { x, y } observes { n }.
        utility(1) <- a & x.
        utility(0) <- a & y.
        utility(0) <- b & x.
        utility(5) <- b & y.
        """
    )
    with pytest.warns(UserWarning, match="ZERO_PROBABILITY"):
        r = solve(t)
    assert r.value == 1.0


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_expanded_prepolicies_cover_each_world_once(seed):
    theory = theory_from_seed(seed)
    stage = DecisionStage(theory, theory.decisions[-1])
    S0, indifferent = stage.initial_prepolicies()
    S1 = stage.expand(S0)
    for sel in enumerate_worlds(theory):
        choices = set(sel.values())
        true = world(theory, sel)
        hits = [p for p in S1 if p.action in choices and any(k <= choices for k in p.explanations)]
        assert all(p.condition <= true for p in hits)
        if any(r.choice <= choices for r in indifferent):
            assert not hits
        else:
            assert len(hits) == 1


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_expand_fixpoint_random(seed):
    theory = theory_from_seed(seed)
    stage = DecisionStage(theory, theory.decisions[-1])
    S = stage.expand(stage.initial_prepolicies()[0])
    assert stage.expand(S) == S


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_solver_matches_oracle(seed):
    theory = theory_from_seed(seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        r = solve(theory)
    _, best = optimal_strategy(theory)
    assert r.value == pytest.approx(best, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_policy_is_optimal_per_state(seed):
    theory = theory_from_seed(seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        r = solve(theory)
    sigma = strategy_from_result(theory, r)
    for d in theory.decisions:
        for state, values in conditional_values(theory, d, sigma).items():
            assert values[sigma.action(d.id, state)] >= max(values.values()) - 1e-9


def _scale(theory: Theory, factor: float) -> Theory:
    rules = tuple(
        Rule(utility_atom(r.head.utility_value * factor), r.body) if r.is_utility else r for r in theory.rules
    )
    return dataclasses.replace(theory, rules=rules)


@settings(max_examples=30, deadline=None)
@given(seeds, st.sampled_from([0.5, 2.0, 3.0, 10.0]))
def test_argmax_invariant_under_scaling(seed, factor):
    theory = theory_from_seed(seed)
    scaled = _scale(theory, factor)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        r1, r2 = solve(theory), solve(scaled)
    s1, s2 = strategy_from_result(theory, r1), strategy_from_result(scaled, r2)
    assert r2.value == pytest.approx(factor * r1.value, abs=1e-9)
    for d in theory.decisions:
        for state in information_states(theory, d):
            if s1.action(d.id, state) != s2.action(d.id, state):
                # allowed only where the two actions are tied
                values = conditional_values(theory, d, s1)[state]
                assert values[s1.action(d.id, state)] == pytest.approx(values[s2.action(d.id, state)], abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_substitute_strategy_reproduces_value(seed):
    theory = theory_from_seed(seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        r = solve(theory)
    plan = {p.decision: ([(e.condition, e.action) for e in p.entries], p.default_action) for p in r.policies}
    assert expected_value(substitute_strategy(theory, plan)) == r.value
