"""Temporal logic semantics: direct evaluation, progression folding, and
compiled acceptors must agree everywhere; derived operators must match their
core-grammar rewrites."""

import itertools
import random

import pytest

from resplan import ltl
from resplan.ltl import (Always, And, Atom, Eventually, FALSE, Next, Not, Or,
                        Release, TRUE, Until, WeakNext)

A, B, C = Atom("a"), Atom("b"), Atom("c")


def traces_over(atoms, max_len):
    labels = [frozenset(c) for r in range(len(atoms) + 1)
              for c in itertools.combinations(atoms, r)]
    for n in range(1, max_len + 1):
        for combo in itertools.product(labels, repeat=n):
            yield list(combo)


FORMULA_BATTERY = [
    TRUE,
    FALSE,
    A,
    Not(A),
    And(A, B),
    Or(A, B),
    Next(A),
    WeakNext(A),
    Not(Next(A)),
    Until(A, B),
    Release(A, B),
    Eventually(A),
    Always(A),
    Always(Not(A)),
    Eventually(And(A, B)),
    Always(Or(Not(A), Eventually(B))),          # request-response
    Or(Always(Not(B)), Until(Not(B), And(A, Not(B)))),  # a before b
    Until(A, Until(B, A)),
    Eventually(And(A, WeakNext(FALSE))),        # a at the end
    And(Eventually(A), Always(Or(A, B))),
]


def random_formula(rng, depth, atoms):
    if depth == 0 or rng.random() < 0.25:
        return rng.choice([Atom(p) for p in atoms] + [TRUE, FALSE])
    unary = [Not, Next, WeakNext, Eventually, Always]
    binary = [And, Or, Until, Release]
    if rng.random() < 0.5:
        return rng.choice(unary)(random_formula(rng, depth - 1, atoms))
    cls = rng.choice(binary)
    return cls(random_formula(rng, depth - 1, atoms),
               random_formula(rng, depth - 1, atoms))


def random_trace(rng, atoms, max_len):
    n = rng.randint(1, max_len)
    return [frozenset(p for p in atoms if rng.random() < 0.5)
            for _ in range(n)]


# ---------------------------------------------------------------------------
# Direct semantics
# ---------------------------------------------------------------------------

def test_always_on_constant_trace():
    assert ltl.evaluate(Always(A), [frozenset({"a"})] * 3)


def test_strong_next_false_at_final_position():
    trace = [frozenset({"a"})]
    assert not ltl.evaluate(Next(A), trace, 0)
    assert ltl.evaluate(WeakNext(A), trace, 0)


def test_until_requires_right_operand_to_occur():
    trace = [frozenset({"a"}), frozenset({"a"}), frozenset()]
    assert not ltl.evaluate(Until(A, B), trace)


def test_until_satisfied_at_occurrence():
    trace = [frozenset({"a"}), frozenset({"b"})]
    assert ltl.evaluate(Until(A, B), trace)


def test_position_out_of_range_is_error():
    with pytest.raises(ValueError):
        ltl.evaluate(A, [frozenset()], 1)
    with pytest.raises(ValueError):
        ltl.evaluate(A, [frozenset()], -1)


def test_evaluate_at_interior_positions():
    trace = [frozenset(), frozenset({"a"}), frozenset()]
    assert not ltl.evaluate(A, trace, 0)
    assert ltl.evaluate(A, trace, 1)
    assert ltl.evaluate(Eventually(A), trace, 0)
    assert not ltl.evaluate(Eventually(A), trace, 2)


# ---------------------------------------------------------------------------
# Progression
# ---------------------------------------------------------------------------

def test_progress_always_is_stable_while_satisfied():
    assert ltl.progress(Always(A), frozenset({"a"})) == Always(A)
    assert ltl.progress(Always(A), frozenset()) == FALSE


def test_progress_eventually():
    assert ltl.progress(Eventually(B), frozenset()) == Eventually(B)
    assert ltl.progress(Eventually(B), frozenset({"b"})) == TRUE


def test_progress_until_unrolls():
    assert ltl.progress(Until(A, B), frozenset({"a"})) == Until(A, B)
    assert ltl.progress(Until(A, B), frozenset({"b"})) == TRUE
    assert ltl.progress(Until(A, B), frozenset()) == FALSE


def test_end_check_values():
    assert ltl.end_check(Always(A))
    assert not ltl.end_check(Eventually(A))
    assert ltl.end_check(Not(Next(A)))
    assert not ltl.end_check(A)
    assert ltl.end_check(WeakNext(FALSE))


def test_progression_property_on_random_pairs():
    # progress peels exactly one label: (label . t) |= f  <=>  t |= progress
    rng = random.Random(7)
    for _ in range(300):
        f = random_formula(rng, 3, ["a", "b", "c"])
        trace = random_trace(rng, ["a", "b", "c"], 5)
        if len(trace) < 2:
            continue
        left = ltl.evaluate(f, trace, 0)
        right = ltl.evaluate(ltl.progress(f, trace[0]), trace[1:], 0)
        assert left == right, ltl.render(f)


# ---------------------------------------------------------------------------
# Simplifier
# ---------------------------------------------------------------------------

def test_simplify_constant_folding():
    assert ltl.simplify(And(TRUE, A)) == A
    assert ltl.simplify(And(FALSE, A)) == FALSE
    assert ltl.simplify(Or(TRUE, A)) == TRUE
    assert ltl.simplify(Not(Not(A))) == A
    assert ltl.simplify(And(A, Not(A))) == FALSE
    assert ltl.simplify(Or(A, Not(A))) == TRUE


def test_simplify_is_idempotent_and_semantics_preserving():
    rng = random.Random(11)
    for _ in range(300):
        f = random_formula(rng, 4, ["a", "b"])
        s = ltl.simplify(f)
        assert ltl.simplify(s) == s
        for trace in [random_trace(rng, ["a", "b"], 4) for _ in range(5)]:
            assert ltl.evaluate(f, trace, 0) == ltl.evaluate(s, trace, 0)
        assert ltl.end_check(f) == ltl.end_check(s)


def test_simplify_orders_conjuncts_canonically():
    assert ltl.simplify(And(B, A)) == ltl.simplify(And(A, B))
    assert ltl.simplify(Or(B, Or(A, B))) == ltl.simplify(Or(A, B))


# ---------------------------------------------------------------------------
# Automaton
# ---------------------------------------------------------------------------

def test_compile_eventually_two_states():
    aut = ltl.compile(Eventually(A))
    assert len(aut) == 2
    assert aut.states[aut.initial] == Eventually(A)
    accepting = {aut.states[i] for i in aut.accepting}
    assert accepting == {TRUE}


def test_compile_always_two_states():
    aut = ltl.compile(Always(A))
    assert {str(s) for s in aut.states} <= {str(Always(A)), str(FALSE)}
    assert aut.states[aut.initial] == Always(A)
    assert ltl.end_check(Always(A))
    assert aut.is_accepting(aut.initial)


def test_automaton_rejects_empty_trace():
    aut = ltl.compile(Eventually(A))
    with pytest.raises(ValueError):
        aut.accepts([])


def test_automaton_state_bound():
    f = Eventually(And(A, Eventually(And(B, Eventually(C)))))
    with pytest.raises(ltl.AutomatonTooLargeError):
        ltl.compile(f, state_bound=2)


def test_min_steps_to_accept():
    aut = ltl.compile(Eventually(A))
    assert aut.min_steps_to_accept[aut.initial] == 1
    aut2 = ltl.compile(Always(A))
    assert aut2.min_steps_to_accept[aut2.initial] == 0
    dead = aut2.step(aut2.initial, frozenset())
    assert aut2.min_steps_to_accept[dead] == float("inf")


# ---------------------------------------------------------------------------
# Triple equivalence and dualities
# ---------------------------------------------------------------------------

def test_triple_equivalence_exhaustive_small():
    # full battery over all traces of length <= 4 on two atoms; the
    # acceptance suite runs length 5 plus a large randomized battery
    for f in FORMULA_BATTERY:
        aut = ltl.compile(f)
        for trace in traces_over(["a", "b"], 4):
            direct = ltl.evaluate(f, trace, 0)
            folded = ltl.fold_evaluate(f, trace)
            accepted = aut.accepts(trace)
            assert direct == folded == accepted, (ltl.render(f), trace)


def test_negation_duality():
    rng = random.Random(23)
    for _ in range(200):
        f = random_formula(rng, 3, ["a", "b"])
        trace = random_trace(rng, ["a", "b"], 5)
        assert ltl.evaluate(Not(f), trace, 0) != ltl.evaluate(f, trace, 0)


def test_derived_operators_match_core_rewrites():
    rng = random.Random(31)
    for _ in range(300):
        f = random_formula(rng, 3, ["a", "b"])
        rewritten = ltl.core(f)
        for trace in [random_trace(rng, ["a", "b"], 5) for _ in range(4)]:
            assert (ltl.evaluate(f, trace, 0)
                    == ltl.evaluate(rewritten, trace, 0)), ltl.render(f)


def test_first_satisfaction_time():
    trace = [frozenset(), frozenset({"a"}), frozenset()]
    assert ltl.first_satisfaction_time(Eventually(A), trace) == 1
    assert ltl.first_satisfaction_time(Always(A), trace) is None
    assert ltl.first_satisfaction_time(Always(Not(A)), [frozenset()] * 2) == 0


def test_render_round_readable():
    f = Always(Or(Not(A), Eventually(B)))
    assert ltl.render(f) == "(always (or (not a) (eventually b)))"
