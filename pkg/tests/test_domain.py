"""Base-model dynamics: applicability, effects, propositions, goals, and the
structural properties (determinism, monotonicity, frame, closure, grid
safety)."""

import dataclasses

import pytest
from hypothesis import given, settings, strategies as st

from resplan import domain
from resplan.domain import (Drop, Goal, Grid, JointState, Move, PickUp,
                           TakePhoto, Target, Uav, WAIT, World)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def test_grid_rejects_degenerate_dimensions():
    with pytest.raises(domain.WorldValidationError):
        Grid(0, 3)


def test_world_rejects_out_of_grid_entities():
    with pytest.raises(domain.WorldValidationError):
        World(grid=Grid(2, 2), uavs=(Uav("d1", (5, 0)),))
    with pytest.raises(domain.WorldValidationError):
        World(grid=Grid(2, 2), uavs=(Uav("d1", (0, 0)),),
              targets=(Target("t1", ((0, 0), (9, 9))),))


def test_world_rejects_duplicate_ids():
    with pytest.raises(domain.WorldValidationError):
        World(grid=Grid(2, 2),
              uavs=(Uav("x", (0, 0)),),
              targets=(Target("x", ((0, 0),)),))


def test_world_rejects_goal_for_undeclared_entity():
    with pytest.raises(domain.WorldValidationError):
        World(grid=Grid(2, 2), uavs=(Uav("d1", (0, 0)),),
              mission_goals=(Goal("photo", "ghost"),))


def test_target_holds_last_cell_after_trajectory():
    t = Target("t1", ((0, 0), (1, 0)))
    assert t.position(0) == (0, 0)
    assert t.position(1) == (1, 0)
    assert t.position(99) == (1, 0)


# ---------------------------------------------------------------------------
# Applicability
# ---------------------------------------------------------------------------

def test_one_by_one_grid_only_wait(tiny_world):
    state = domain.initial_state(tiny_world)
    actions = list(domain.applicable(state, tiny_world))
    assert actions == [(WAIT,)]


def test_colocated_target_enables_photo():
    w = World(grid=Grid(2, 2), uavs=(Uav("d1", (1, 1)),),
              targets=(Target("t1", ((1, 1),)),))
    state = domain.initial_state(w)
    per_uav = domain.uav_actions(state, w, 0)
    assert TakePhoto("t1") in per_uav


def test_joint_actions_are_cartesian_product():
    # two UAVs pinned in opposite corners of a 2x1 grid: each has exactly
    # move + wait... widen to get 3 each
    w = World(grid=Grid(3, 1),
              uavs=(Uav("d1", (0, 0)), Uav("d2", (2, 0))))
    state = domain.initial_state(w)
    per_0 = domain.uav_actions(state, w, 0)
    per_1 = domain.uav_actions(state, w, 1)
    joint = list(domain.applicable(state, w))
    assert len(joint) == len(per_0) * len(per_1)


def test_same_pallet_joint_pickup_filtered():
    w = World(grid=Grid(2, 1),
              uavs=(Uav("d1", (0, 0)), Uav("d2", (0, 0))),
              pallets=(domain.Pallet("r1", (0, 0)),))
    state = domain.initial_state(w)
    for joint in domain.applicable(state, w):
        picks = [a for a in joint if isinstance(a, PickUp)]
        assert len(picks) <= 1


def test_non_operational_uav_only_waits(pair_world):
    w = dataclasses.replace(
        pair_world,
        uavs=(pair_world.uavs[0],
              dataclasses.replace(pair_world.uavs[1], operational=False)))
    state = domain.initial_state(w)
    for joint in domain.applicable(state, w):
        assert joint[1] == WAIT


# ---------------------------------------------------------------------------
# Step effects
# ---------------------------------------------------------------------------

def test_move_updates_position(photo_world):
    state = domain.initial_state(photo_world)
    nxt = domain.step(state, (Move("E"),), photo_world)
    assert nxt.uav_at[0] == (1, 0)
    assert nxt.t == 1


def test_photo_records_pair(photo_world):
    w = photo_world
    state = JointState(t=0, uav_at=((2, 2),), carrying=(None,),
                       photos=frozenset(), visited=frozenset(),
                       delivered=frozenset())
    nxt = domain.step(state, (TakePhoto("t1"),), w)
    assert ("t1", "d1") in nxt.photos


def test_pickup_and_delivery_sequence(cargo_world):
    w = cargo_world
    trace = domain.run(w, [
        (Move("E"),), (PickUp("r1"),), (Move("N"),), (Drop("a1"),),
    ])
    final = trace[-1]
    assert ("r1", "a1") in final.delivered
    assert final.carrying == (None,)
    assert domain.goals_satisfied(trace, w) == {"deliver-a1"}


def test_inapplicable_action_names_uav_and_condition(photo_world):
    state = domain.initial_state(photo_world)
    with pytest.raises(domain.PreconditionError) as err:
        domain.step(state, (Move("W"),), photo_world)
    assert err.value.uav == "d1"
    assert "exits grid" in err.value.condition


def test_photo_requires_colocation_at_current_time():
    w = World(grid=Grid(3, 1), uavs=(Uav("d1", (0, 0)),),
              targets=(Target("t1", ((0, 0), (2, 0))),))
    state = domain.initial_state(w)
    moved = domain.step(state, (Move("E"),), w)  # target now at (2,0)
    with pytest.raises(domain.PreconditionError):
        domain.step(moved, (TakePhoto("t1"),), w)


def test_arrival_on_asset_records_visit(photo_world):
    trace = domain.run(photo_world, [(Move("E"),), (Move("E"),),
                                     (Move("N"),), (Move("N"),)])
    assert ("a1", "d1") in trace[-1].visited


def test_initial_state_visits_start_asset():
    w = World(grid=Grid(2, 2), uavs=(Uav("d1", (0, 0)),),
              assets=(domain.Asset("a1", (0, 0)),),
              mission_goals=(Goal("visit", "a1"),))
    trace = [domain.initial_state(w)]
    assert domain.goals_satisfied(trace, w) == {"visit-a1"}


def test_empty_plan_satisfies_nothing_off_asset(photo_world):
    trace = [domain.initial_state(photo_world)]
    assert domain.goals_satisfied(trace, photo_world) == frozenset()


def test_partial_goal_satisfaction(pair_world):
    # photograph t1 only
    w = pair_world
    trace = domain.run(w, [
        (Move("E"),  WAIT), (Move("N"), WAIT), (TakePhoto("t1"), WAIT),
    ])
    assert domain.goals_satisfied(trace, w) == {"photo-t1"}


# ---------------------------------------------------------------------------
# Propositions
# ---------------------------------------------------------------------------

def test_initial_propositions_hold_agentloc():
    w = World(grid=Grid(1, 8), uavs=(Uav("d1", (0, 7)),))
    props = domain.propositions(domain.initial_state(w), w)
    assert domain.agentloc("d1", 0, 7) in props
    assert domain.t_eq(0) in props


def test_no_photo_propositions_before_any_photo(photo_world):
    props = domain.propositions(domain.initial_state(photo_world), photo_world)
    assert not any(p.name == "have-photo" for p in props)


def test_propositions_after_three_step_plan():
    # derived by running the dynamics: move, move, photograph
    w = World(grid=Grid(3, 1), uavs=(Uav("d1", (0, 0)),),
              targets=(Target("t2", ((2, 0),)),))
    trace = domain.run(w, [(Move("E"),), (Move("E"),), (TakePhoto("t2"),)])
    props = domain.propositions(trace[-1], w)
    assert domain.have_photo("t2", "d1") in props
    assert domain.agentloc("d1", 2, 0) in props
    assert domain.t_eq(3) in props


def test_prop_rendering_uses_v_coordinates():
    assert domain.agentloc("d1", 4, 3).sexpr() == "(agentloc d1 v4 v3)"
    assert domain.carry_pallet("r1", "d2").sexpr() == "(carry-pallet r1 d2)"


# ---------------------------------------------------------------------------
# Structural properties
# ---------------------------------------------------------------------------

@st.composite
def action_choices(draw):
    return draw(st.lists(st.integers(min_value=0, max_value=10 ** 6),
                         min_size=0, max_size=8))


@settings(max_examples=60, deadline=None)
@given(action_choices())
def test_random_walk_stays_in_grid_and_monotone(choices):
    w = World(grid=Grid(3, 2),
              uavs=(Uav("d1", (0, 0)), Uav("d2", (2, 1))),
              targets=(Target("t1", ((1, 1), (2, 1))),),
              assets=(domain.Asset("a1", (2, 0)),),
              pallets=(domain.Pallet("r1", (1, 0)),),
              horizon=10)
    state = domain.initial_state(w)
    prev = state
    for pick in choices:
        options = list(domain.applicable(state, w))
        action = options[pick % len(options)]
        state = domain.step(state, action, w)
        for cell in state.uav_at:
            assert w.grid.contains(cell)
        assert prev.photos <= state.photos
        assert prev.visited <= state.visited
        assert prev.delivered <= state.delivered
        carried = [c for c in state.carrying if c is not None]
        assert len(carried) == len(set(carried))
        prev = state


def test_step_is_deterministic(photo_world):
    state = domain.initial_state(photo_world)
    a = (Move("N"),)
    assert domain.step(state, a, photo_world) == domain.step(
        state, a, photo_world)


def test_move_frame_only_changes_position(pair_world):
    state = domain.initial_state(pair_world)
    nxt = domain.step(state, (Move("E"), WAIT), pair_world)
    assert nxt.uav_at[1] == state.uav_at[1]
    assert nxt.carrying == state.carrying
    assert nxt.photos == state.photos
    assert nxt.delivered == state.delivered


def test_applicable_closure_exhaustive(cargo_world):
    # every joint action returned by applicable succeeds in step, explored
    # breadth-first over the full reachable space of the small cargo world
    seen = set()
    frontier = [domain.initial_state(cargo_world)]
    while frontier:
        state = frontier.pop()
        if state in seen or state.t >= cargo_world.horizon:
            continue
        seen.add(state)
        for action in domain.applicable(state, cargo_world):
            nxt = domain.step(state, action, cargo_world)  # must not raise
            frontier.append(nxt)
    assert len(seen) > 10
