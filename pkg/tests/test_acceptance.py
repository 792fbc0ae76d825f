"""Acceptance suite: the release gate, one test per criterion.

Each test prints a PASS line (visible with ``pytest -s`` or ``-rP``) and
enforces its runtime budget. Run with::

    pytest tests/test_acceptance.py -v -s
"""

import itertools
import json
import random
import re
import time
from pathlib import Path

import pytest

from oracles import brute_force_expectimax, enumerate_optimal
from resplan import assess, domain, ltl, planner, prefs, scenarios
from resplan.assess import AssessmentModel, OutcomeRule
from resplan.domain import Goal, Grid, Pallet, Target, Uav, World
from resplan.planner import plan_baseline, plan_with_preferences
from resplan.prefs import PreferenceSet, parse

GOLDEN = json.loads(
    (Path(__file__).parent / "golden" / "scenario_returns.json").read_text())

collected_reports = []


def _conserved(report):
    collected_reports.append(report)
    assert report.probability_total == pytest.approx(1.0, abs=1e-9)
    return report


def _pass(name, detail):
    print(f"ACCEPTANCE {name}: PASS - {detail}")


# ---------------------------------------------------------------------------
# A1. Semantics triple-equivalence
# ---------------------------------------------------------------------------

def test_a1_semantics_triple_equivalence():
    from test_ltl import FORMULA_BATTERY, random_formula, random_trace

    start = time.perf_counter()
    assert len(FORMULA_BATTERY) == 20
    labels2 = [frozenset(c) for r in range(3)
               for c in itertools.combinations(["a", "b"], r)]
    checked = 0
    for f in FORMULA_BATTERY:
        aut = ltl.compile(f)
        for n in range(1, 6):
            for combo in itertools.product(labels2, repeat=n):
                trace = list(combo)
                direct = ltl.evaluate(f, trace, 0)
                assert direct == ltl.fold_evaluate(f, trace)
                assert direct == aut.accepts(trace)
                checked += 1

    rng = random.Random(20260809)
    automata = {}
    for _ in range(10_000):
        f = random_formula(rng, 4, ["a", "b", "c"])
        trace = random_trace(rng, ["a", "b", "c"], 6)
        direct = ltl.evaluate(f, trace, 0)
        assert direct == ltl.fold_evaluate(f, trace), ltl.render(f)
        if f not in automata:
            automata[f] = ltl.compile(f)
        assert direct == automata[f].accepts(trace), ltl.render(f)
        checked += 1
    elapsed = time.perf_counter() - start
    assert elapsed < 60, f"semantics battery took {elapsed:.1f}s"
    _pass("A1", f"evaluate = fold = automaton on {checked} cases "
                f"({elapsed:.1f}s)")


# ---------------------------------------------------------------------------
# A2. Planner exactness on enumerable instances
# ---------------------------------------------------------------------------

def _planner_instances():
    photo = World(
        grid=Grid(3, 3), uavs=(Uav("d1", (0, 0)),),
        targets=(Target("t1", ((2, 2),)),),
        assets=(domain.Asset("a1", (2, 2)),),
        horizon=6,
        mission_goals=(Goal("photo", "t1"), Goal("visit", "a1")),
    )
    mover = World(
        grid=Grid(4, 2), uavs=(Uav("d1", (0, 0)),),
        targets=(Target("t1", ((3, 0), (3, 1), (2, 1), (2, 1))),),
        horizon=6, mission_goals=(Goal("photo", "t1"),),
    )
    cargo = World(
        grid=Grid(2, 2), uavs=(Uav("d1", (0, 0)),),
        pallets=(Pallet("r1", (1, 0)),),
        assets=(domain.Asset("a1", (1, 1), needs_pallet="r1"),),
        horizon=6, mission_goals=(Goal("deliver", "a1"),),
    )
    pair = World(
        grid=Grid(3, 2),
        uavs=(Uav("d1", (0, 0)), Uav("d2", (2, 1))),
        targets=(Target("t1", ((1, 1), (2, 1))),),
        assets=(domain.Asset("a1", (2, 0)),),
        horizon=4,
        mission_goals=(Goal("photo", "t1"), Goal("visit", "a1")),
    )
    pair4 = World(
        grid=Grid(4, 1),
        uavs=(Uav("d1", (0, 0)), Uav("d2", (3, 0))),
        targets=(Target("t1", ((2, 0),)), Target("t2", ((1, 0),))),
        horizon=4,
        mission_goals=(Goal("photo", "t1"), Goal("photo", "t2")),
    )

    single_prefs = [
        "",
        "(preference p1 (sometime (agentloc d1 v1 v2)))",
        "(preference p1 (always (not (agentloc d1 v1 v1))))",
        "(preference p1 (at-most-once (agentloc d1 v0 v0)))",
        "(preference p1 (sometime (agentloc d1 v0 v2)))\n"
        "(preference p2 (sometime (have-photo t1 d1)))\n"
        "(ordering p1 p2)",
        "(preference p1 (sometime-after (agentloc d1 v1 v0) "
        "(agentloc d1 v2 v2)))",
        "(preference p1 (sometime-before (agentloc d1 v1 v1) "
        "(have-photo t1 d1)))",
        "(preference p1 (at-end (agentloc d1 v2 v2)))",
    ]
    for text in single_prefs:
        yield photo, text
    for text in ["",
                 "(preference p1 (always (not (agentloc d1 v2 v0))))",
                 "(preference p1 (sometime (t-eq 3)))",
                 "(preference p1 (sometime-after (have-photo t1 d1) "
                 "(agentloc d1 v0 v0)))",
                 "(preference p1 (at-end (agentloc d1 v0 v1)))",
                 "(preference p1 (at-most-once (agentloc d1 v3 v0)))"]:
        yield mover, text
    for text in ["",
                 "(preference p1 (at-end (agentloc d1 v0 v0)))",
                 "(preference p1 (always (not (carry-pallet r1 d1))))",
                 "(preference p1 (sometime-before (agentloc d1 v1 v0) "
                 "(delivered r1 a1)))",
                 "(preference p1 (sometime (t-eq 5)))"]:
        yield cargo, text
    for text in ["",
                 "(preference p1 (sometime (have-photo t1 d2)))",
                 "(preference p1 (always (not (have-photo t1 d1))))",
                 "(preference p1 (sometime (visited a1 d2)))"]:
        yield pair, text
    for text in ["",
                 "(forall (?t - target) (preference all (sometime "
                 "(have-photo ?t d2))))"]:
        yield pair4, text


def test_a2_planner_matches_enumeration():
    start = time.perf_counter()
    count = 0
    for world, text in _planner_instances():
        pset = parse(text, world)
        expected, _ = enumerate_optimal(world, pset)
        got = plan_with_preferences(world, pset)
        assert got.score == expected, (text, got.score, expected)
        count += 1
    elapsed = time.perf_counter() - start
    assert count >= 25
    assert elapsed < 300, f"planner exactness took {elapsed:.1f}s"
    _pass("A2", f"{count} instances match exhaustive enumeration exactly "
                f"({elapsed:.1f}s)")


# ---------------------------------------------------------------------------
# A3. Assessment exactness
# ---------------------------------------------------------------------------

def _stochastic_instances():
    EMPTY = PreferenceSet.empty()
    w1 = World(grid=Grid(3, 2), uavs=(Uav("d1", (0, 0)),),
               targets=(Target("t1", ((2, 1),)),), horizon=5,
               mission_goals=(Goal("photo", "t1"),))
    fog = OutcomeRule(name="fog", action="take-photo",
                      cells=frozenset({(2, 1)}), success_probability=0.5)
    flak = OutcomeRule(name="flak", action="move",
                       cells=frozenset({(1, 0)}), success_probability=0.6,
                       on_failure="uav-lost")
    yield AssessmentModel(world=w1, rules=(fog,)), EMPTY
    yield AssessmentModel(world=w1, rules=(fog, flak)), EMPTY
    yield AssessmentModel(world=w1, rules=(flak,)), EMPTY

    w2 = World(grid=Grid(3, 1), uavs=(Uav("d1", (0, 0)),),
               targets=(Target("t1", ((2, 0),)),), horizon=4,
               mission_goals=(Goal("photo", "t1"),))
    wind = OutcomeRule(name="wind", action="move", success_probability=0.0,
                       on_failure="action-wasted", stride=2)
    yield AssessmentModel(world=w2, rules=(wind,)), EMPTY
    yield AssessmentModel(world=w2, rules=(OutcomeRule(
        name="fuel", action="move", success_probability=0.7,
        on_failure="uav-lost", once=True),)), EMPTY

    w3 = World(grid=Grid(2, 2), uavs=(Uav("d1", (0, 0)),), horizon=4)
    soft = parse("(preference p1 (sometime (agentloc d1 v0 v1)))\n"
                 "(preference p2 (sometime (agentloc d1 v1 v1)))\n"
                 "(ordering p1 p2)", w3)
    yield AssessmentModel(world=w3, rules=(OutcomeRule(
        name="gust", action="move", success_probability=0.5,
        on_failure="no-effect"),)), soft

    w4 = World(grid=Grid(3, 1), uavs=(Uav("d1", (0, 0)),),
               pallets=(Pallet("r1", (0, 0)), Pallet("r2", (1, 0))),
               assets=(domain.Asset("a1", (2, 0), needs_pallet="r1"),),
               horizon=5, mission_goals=(Goal("deliver", "a1"),))
    hyp = (assess.Hypothesis(0.5, (("a1", "r1"),)),
           assess.Hypothesis(0.5, (("a1", "r2"),)))
    yield AssessmentModel(world=w4, hypotheses=hyp), EMPTY
    yield AssessmentModel(world=w4, hypotheses=hyp, rules=(OutcomeRule(
        name="slip", action="pickup", success_probability=0.8),)), EMPTY

    w5 = World(grid=Grid(2, 2), uavs=(Uav("d1", (0, 0)), Uav("d2", (1, 1))),
               targets=(Target("t1", ((0, 1),)),), horizon=3,
               mission_goals=(Goal("photo", "t1"),))
    yield AssessmentModel(world=w5, rules=(OutcomeRule(
        name="haze", action="take-photo", success_probability=0.5),)), EMPTY
    yield AssessmentModel(world=w5, rules=(
        OutcomeRule(name="haze", action="take-photo",
                    success_probability=0.5),
        OutcomeRule(name="burst", action="move", uav="d2",
                    success_probability=0.9, on_failure="uav-lost"),)), EMPTY


def test_a3_assessment_exactness():
    start = time.perf_counter()
    count = 0
    for model, pset in _stochastic_instances():
        expected = brute_force_expectimax(model, pset)
        got = assess.optimal_return(model, pset)
        assert got.policy_value == pytest.approx(expected, abs=1e-9)
        achieved = _conserved(assess._expected_of_actions(
            got.plan_actions, model, pset))
        assert achieved.expected_return == pytest.approx(got.plan_value,
                                                         abs=1e-9)
        assert got.plan_value <= got.policy_value + 1e-9
        count += 1
    elapsed = time.perf_counter() - start
    assert count >= 10
    _pass("A3", f"optimal_return matches brute-force expectimax on {count} "
                f"stochastic instances at 1e-9 ({elapsed:.1f}s)")


# ---------------------------------------------------------------------------
# A4. Reward arithmetic
# ---------------------------------------------------------------------------

def test_a4_reward_arithmetic():
    photo = World(
        grid=Grid(3, 3), uavs=(Uav("d1", (0, 0)),),
        targets=(Target("t1", ((2, 2),)),),
        assets=(domain.Asset("a1", (2, 2)),),
        horizon=8,
        mission_goals=(Goal("photo", "t1"), Goal("visit", "a1")),
    )
    plan = plan_baseline(photo)
    assert plan.action_count == 5
    det = _conserved(assess.expected_return(
        plan, AssessmentModel(world=photo), PreferenceSet.empty()))
    assert det.expected_return == 35.0

    foggy = World(grid=Grid(3, 3), uavs=(Uav("d1", (0, 0)),),
                  targets=(Target("t1", ((2, 2),)),), horizon=8,
                  mission_goals=(Goal("photo", "t1"),))
    fog_plan = plan_baseline(foggy)
    assert fog_plan.action_count == 5
    fog = _conserved(assess.expected_return(
        fog_plan,
        AssessmentModel(world=foggy, rules=(OutcomeRule(
            name="fog", action="take-photo", cells=frozenset({(2, 2)}),
            success_probability=0.5),)),
        PreferenceSet.empty()))
    assert fog.expected_return == 5.0

    pset = parse("(preference p1 (sometime (visited a1 d1)))\n"
                 "(preference p2 (sometime (have-photo t1 d1)))\n"
                 "(ordering p1 p2)", photo)
    ordered = plan_with_preferences(photo, pset)
    with_o = _conserved(assess.expected_return(
        ordered, AssessmentModel(world=photo), pset)).expected_return
    without = _conserved(assess.expected_return(
        ordered, AssessmentModel(world=photo),
        PreferenceSet(pset.preferences, ()))).expected_return
    assert with_o - without == 10.0
    _pass("A4", "deterministic 2-goal/5-action plan = 35; fog photo plan = 5; "
                "preserved ordering adds exactly 10")


# ---------------------------------------------------------------------------
# A5. Directionality across the six reconstructions (pinned regressions)
# ---------------------------------------------------------------------------

def test_a5_six_scenario_directionality():
    start = time.perf_counter()
    for name in scenarios.BUNDLED_NAMES:
        s = scenarios.bundled(name)
        model = s.assessment_model()
        scoring = s.assessment_preferences
        base = plan_with_preferences(s.world, s.operator_preferences)
        cons = plan_with_preferences(
            s.world, s.planning_preferences(s.reference_constraints))
        base_r = _conserved(assess.expected_return(base, model, scoring))
        cons_r = _conserved(assess.expected_return(cons, model, scoring))
        opt = assess.optimal_return(model, scoring)
        assert base_r.expected_return < cons_r.expected_return, name
        assert cons_r.expected_return <= opt.plan_value + 1e-9, name
        assert opt.plan_value <= opt.policy_value + 1e-9, name

        pins = GOLDEN[name]
        assert base_r.expected_return == pytest.approx(
            pins["baseline_return"], abs=1e-9), name
        assert cons_r.expected_return == pytest.approx(
            pins["constrained_return"], abs=1e-9), name
        assert opt.plan_value == pytest.approx(
            pins["optimal_return"], abs=1e-9), name
        assert opt.policy_value == pytest.approx(
            pins["policy_value"], abs=1e-9), name
        assert base.score == pins["baseline_score"], name
        assert cons.score == pins["constrained_score"], name
        assert base.action_count == pins["baseline_actions"], name
        assert cons.action_count == pins["constrained_actions"], name
    elapsed = time.perf_counter() - start
    assert elapsed < 600, f"six-scenario run took {elapsed:.1f}s"
    _pass("A5", f"all six reconstructions: baseline < constrained <= optimal, "
                f"values pinned ({elapsed:.1f}s)")


# ---------------------------------------------------------------------------
# A6. Empty-constraints identity
# ---------------------------------------------------------------------------

def test_a6_empty_constraints_identity():
    for name in scenarios.BUNDLED_NAMES:
        world = scenarios.bundled(name).world
        a = plan_baseline(world)
        b = plan_with_preferences(world, PreferenceSet.empty())
        assert a == b, name
    _pass("A6", "plan_with_preferences(empty) is bit-identical to "
                "plan_baseline on all six scenarios")


# ---------------------------------------------------------------------------
# A7. Format round-trips
# ---------------------------------------------------------------------------

def _random_pref_text(rng, world):
    atoms = ["(have-photo t1 uav1)", "(have-photo t2 d2)",
             "(visited a1 uav1)", "(carry-pallet r1 d2)",
             "(delivered r1 a1)", "(agentloc uav1 v3 v3)",
             "(agentloc d2 v1 v2)", "(t-eq 4)"]

    def cond(depth):
        if depth == 0 or rng.random() < 0.4:
            return rng.choice(atoms)
        op = rng.choice(["and", "or", "not"])
        if op == "not":
            return f"(not {cond(depth - 1)})"
        return f"({op} {cond(depth - 1)} {cond(depth - 1)})"

    n = rng.randint(1, 4)
    lines = []
    names = []
    for i in range(n):
        tpl = rng.choice(["sometime", "always", "at-most-once", "at-end"])
        if rng.random() < 0.3:
            body = f"(sometime-after {cond(1)} {cond(1)})"
        elif rng.random() < 0.3:
            body = f"(sometime-before {cond(1)} {cond(1)})"
        else:
            body = f"({tpl} {cond(2)})"
        weight = rng.choice(["", "", " 20", " 7.5"])
        names.append(f"p{i}")
        lines.append(f"(preference p{i} {body}{weight})")
    if len(names) >= 2 and rng.random() < 0.5:
        lines.append(f"(ordering {names[0]} {names[1]})")
    return "\n".join(lines)


def test_a7_round_trips():
    world = World(
        grid=Grid(8, 8),
        uavs=(Uav("uav1", (0, 0)), Uav("d2", (7, 7))),
        targets=(Target("t1", ((1, 1),)), Target("t2", ((2, 2),))),
        assets=(domain.Asset("a1", (3, 3)),),
        pallets=(domain.Pallet("r1", (4, 4)),),
    )
    rng = random.Random(1729)
    for _ in range(1000):
        text = _random_pref_text(rng, world)
        ps = parse(text, world)
        assert parse(prefs.render(ps), world) == ps
    for name in scenarios.BUNDLED_NAMES:
        s = scenarios.bundled(name)
        assert scenarios.parse_scenario(scenarios.render_scenario(s)) == s
        ref = prefs.render(s.reference_constraints)
        assert prefs.parse(ref, s.world) == s.reference_constraints
    _pass("A7", "1000 generated constraint sets and all bundled scenario "
                "files survive parse(render(.)) exactly")


# ---------------------------------------------------------------------------
# A8. CLI comparison format on T1
# ---------------------------------------------------------------------------

def test_a8_cli_compare_t1(tmp_path):
    from click.testing import CliRunner
    from resplan.cli import main as cli_main

    ref = tmp_path / "t1-ref.prefs"
    ref.write_text(prefs.render(scenarios.bundled("t1").reference_constraints))
    result = CliRunner().invoke(
        cli_main, ["compare", "t1", "--constraints", str(ref)])
    assert result.exit_code == 0
    row = result.output.strip().splitlines()[1].split()
    improvement = row[4]
    optimality = row[5]
    assert re.fullmatch(r"-?\d+\.\d%", improvement)
    assert re.fullmatch(r"-?\d+\.\d%", optimality)
    assert float(improvement.rstrip("%")) > 0
    assert float(optimality.rstrip("%")) <= 0
    _pass("A8", f"compare t1: improvement {improvement} (positive), "
                f"optimality {optimality} (non-positive), 1-decimal format")


# ---------------------------------------------------------------------------
# Conservation sweep over everything the suite computed
# ---------------------------------------------------------------------------

def test_a9_probability_conservation_everywhere():
    assert collected_reports, "run after the suite populated reports"
    for report in collected_reports:
        assert report.probability_total == pytest.approx(1.0, abs=1e-9)
    _pass("A9", f"outcome probabilities sum to 1 within 1e-9 on all "
                f"{len(collected_reports)} reports computed by this suite")
