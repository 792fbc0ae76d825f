"""Plan synthesis over the deterministic base model.

Two entry points share one engine: :func:`plan_baseline` maximises the net
mission score (goal rewards minus action costs) and
:func:`plan_with_preferences` additionally credits operator preferences and
their orderings. Preferences are soft - they shape the objective but never
prune - while mission goals stay hard.

The search is branch-and-bound best-first over product nodes pairing the
domain state with one acceptor state per preference. The bound assumes every
not-yet-impossible goal and preference will be achieved at a
Manhattan-distance-justified minimum of extra actions, which keeps it
admissible; search therefore returns score-optimal plans whenever it runs to
completion. Tie-breaking is the fixed lexicographic order over (uav order,
action order) recorded in domain.action_key, so identical inputs produce
identical plans.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import domain, ltl, prefs as prefs_mod
from .domain import (Goal, JointAction, JointState, Move, PickUp, TakePhoto,
                     Wait, World)
from .prefs import PreferenceSet

INF = float("inf")


class UnsolvableError(RuntimeError):
    """No plan achieves every mission goal within the horizon."""


class BudgetExceededError(RuntimeError):
    """Node budget exhausted before the search completed; carries the best
    partial plan found, if any."""

    def __init__(self, message: str, partial: Optional["Plan"] = None):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class RewardWeights:
    goal_reward: float = 20.0
    action_cost: float = 1.0
    ordering_default: float = prefs_mod.DEFAULT_ORDERING_WEIGHT


@dataclass(frozen=True)
class SearchConfig:
    horizon: Optional[int] = None  # None: use the world's horizon
    node_budget: int = 500_000
    beam_width: Optional[int] = None  # optional inadmissible narrowing
    weights: RewardWeights = RewardWeights()
    tie_break: str = "lexicographic"  # documented; no other order implemented


@dataclass(frozen=True)
class Plan:
    """A finite joint-action sequence with its derived trajectory.

    ``labels`` are the per-state proposition sets (the trace the temporal
    formulas are judged on); ``score`` is the deterministic net score under
    the weights the plan was produced with.
    """

    actions: tuple[JointAction, ...]
    trace: tuple[JointState, ...]
    labels: tuple[frozenset, ...]
    uav_ids: tuple[str, ...]
    provenance: str  # "baseline" | "constrained"
    score: float
    goals_satisfied: frozenset
    flags: tuple[str, ...] = ()

    @property
    def action_count(self) -> int:
        return count_actions(self.actions)

    @classmethod
    def from_actions(cls, world: World, actions: Sequence[JointAction],
                     provenance: str, score: float,
                     flags: tuple[str, ...] = ()) -> "Plan":
        trace = tuple(domain.run(world, actions))
        return cls(
            actions=tuple(actions),
            trace=trace,
            labels=tuple(domain.trace_labels(trace, world)),
            uav_ids=tuple(u.id for u in world.uavs),
            provenance=provenance,
            score=score,
            goals_satisfied=domain.goals_satisfied(trace, world),
            flags=flags,
        )


def count_actions(actions: Sequence[JointAction]) -> int:
    """Plan cost counts the non-wait per-UAV actions; waiting is free, so a
    vehicle parked at base does not bleed score."""
    return sum(1 for joint in actions for a in joint if not isinstance(a, Wait))


@dataclass(frozen=True)
class ProductNode:
    """A search node: domain state, one acceptor state per preference,
    earliest satisfaction times, and the action cost spent so far."""

    state: JointState
    aut: tuple[int, ...]
    first_sat: tuple[Optional[int], ...]
    cost: int


class _Context:
    """Per-search immutable data: compiled acceptors, weights, horizon."""

    def __init__(self, world: World, pset: PreferenceSet, config: SearchConfig):
        self.world = world
        self.pset = pset
        self.config = config
        self.weights = config.weights
        self.horizon = config.horizon if config.horizon is not None else world.horizon
        self.names = [p.name for p in pset.preferences]
        self.pref_weights = [p.weight for p in pset.preferences]
        self.automata = [ltl.compile(prefs_mod.lowered(p))
                         for p in pset.preferences]

    # -- node construction ---------------------------------------------------

    def root(self) -> ProductNode:
        state = domain.initial_state(self.world)
        label = domain.propositions(state, self.world)
        aut = []
        first_sat: list[Optional[int]] = []
        for a in self.automata:
            s = a.step(a.initial, label)
            aut.append(s)
            first_sat.append(0 if a.is_accepting(s) else None)
        return ProductNode(state, tuple(aut), tuple(first_sat), 0)

    def child(self, node: ProductNode, action: JointAction) -> ProductNode:
        state = domain.step(node.state, action, self.world)
        label = domain.propositions(state, self.world)
        aut = []
        first_sat = []
        for i, a in enumerate(self.automata):
            s = a.step(node.aut[i], label)
            aut.append(s)
            fs = node.first_sat[i]
            if fs is None and a.is_accepting(s):
                fs = state.t
            first_sat.append(fs)
        return ProductNode(state, tuple(aut), tuple(first_sat),
                           node.cost + count_actions([action]))

    # -- scoring ---------------------------------------------------------

    def unsatisfied_goals(self, state: JointState) -> list[Goal]:
        return [g for g in self.world.mission_goals
                if not g.satisfied(state, self.world)]

    def satisfaction_times(self, node: ProductNode) -> dict[str, Optional[int]]:
        """Times for the preferences accepted at this endpoint."""
        return {name: node.first_sat[i]
                for i, name in enumerate(self.names)
                if self.automata[i].is_accepting(node.aut[i])}

    def endpoint_score(self, node: ProductNode) -> float:
        """Deterministic net score if the plan ended at this node."""
        w = self.weights
        sat_goal_count = len(self.world.mission_goals) - len(
            self.unsatisfied_goals(node.state))
        total = w.goal_reward * sat_goal_count
        times = self.satisfaction_times(node)
        for i, name in enumerate(self.names):
            if name in times:
                total += self.pref_weights[i]
        total += prefs_mod.score_orderings(self.pset, times, w.ordering_default)
        total -= w.action_cost * node.cost
        return total

    def is_complete(self, node: ProductNode) -> bool:
        return not self.unsatisfied_goals(node.state)

    # -- admissible bound --------------------------------------------------

    def _goal_cost(self, state: JointState, goal: Goal) -> float:
        """Optimistic extra non-wait actions to finish one unsatisfied goal;
        inf when the goal is unreachable within the horizon."""
        remaining = self.horizon - state.t
        world = self.world
        if goal.kind == "photo":
            target = world.target(goal.entity)
            best = INF
            for i, uav in enumerate(world.uavs):
                if not uav.operational:
                    continue
                ux, uy = state.uav_at[i]
                for shoot_t in range(state.t, state.t + remaining):
                    tx, ty = target.position(shoot_t)
                    dist = abs(ux - tx) + abs(uy - ty)
                    if dist <= shoot_t - state.t:
                        best = min(best, dist + 1)
            return best
        if goal.kind == "visit":
            ax, ay = world.asset(goal.entity).location
            best = INF
            for i, uav in enumerate(world.uavs):
                if not uav.operational:
                    continue
                ux, uy = state.uav_at[i]
                dist = abs(ux - ax) + abs(uy - ay)
                if dist <= remaining:
                    best = min(best, dist)
            return best
        # deliver: the asset's needed pallet must reach the asset cell
        asset = world.asset(goal.entity)
        pallet_id = asset.needs_pallet
        if any(p == pallet_id and a != goal.entity for p, a in state.delivered):
            return INF  # pallet already installed elsewhere
        ax, ay = asset.location
        best = INF
        for i, uav in enumerate(world.uavs):
            ux, uy = state.uav_at[i]
            if state.carrying[i] == pallet_id:
                if not uav.operational:
                    return INF  # carrier can never move or drop again
                cost = abs(ux - ax) + abs(uy - ay) + 1
                return cost if cost <= remaining else INF
        ploc = domain.pallet_location(state, world, pallet_id)
        if ploc is None:
            return INF
        px, py = ploc
        for i, uav in enumerate(world.uavs):
            if not uav.operational or not uav.can_carry:
                continue
            ux, uy = state.uav_at[i]
            cost = abs(ux - px) + abs(uy - py) + 1 + abs(px - ax) + abs(py - ay) + 1
            if cost <= remaining:
                best = min(best, cost)
        return best

    def bound(self, node: ProductNode) -> float:
        """Optimistic completion score from this node; -inf when a hard goal
        is provably out of reach. Never below the true best completion."""
        w = self.weights
        state = node.state
        remaining = self.horizon - state.t
        unsat = self.unsatisfied_goals(state)
        worst_goal_cost = 0.0
        for g in unsat:
            c = self._goal_cost(state, g)
            if c == INF or c > remaining:
                return -INF
            worst_goal_cost = max(worst_goal_cost, c)
        goal_part = w.goal_reward * len(self.world.mission_goals)
        pref_part = 0.0
        reachable = []
        for i, a in enumerate(self.automata):
            ok = a.min_steps_to_accept[node.aut[i]] <= remaining
            reachable.append(ok)
            if ok:
                pref_part += self.pref_weights[i]
        ordering_part = 0.0
        idx = {name: i for i, name in enumerate(self.names)}
        for o in self.pset.orderings:
            ia, ib = idx[o.earlier], idx[o.later]
            if not (reachable[ia] and reachable[ib]):
                continue
            ta = node.first_sat[ia]
            tb = node.first_sat[ib]
            earliest_a = ta if ta is not None else state.t + 1
            latest_b = tb if tb is not None else INF
            if earliest_a <= latest_b:
                ordering_part += (o.weight if o.weight is not None
                                  else w.ordering_default)
        return (goal_part + pref_part + ordering_part
                - w.action_cost * (node.cost + worst_goal_cost))


def upper_bound(node: ProductNode, world: World, pset: PreferenceSet,
                config: Optional[SearchConfig] = None) -> float:
    """Admissible optimistic bound on the best completion score of a node."""
    ctx = _Context(world, pset, config or SearchConfig())
    return ctx.bound(node)


# ---------------------------------------------------------------------------
# Search
# ---------------------------------------------------------------------------

def plan_baseline(world: World, config: Optional[SearchConfig] = None) -> Plan:
    """Best plan for the mission goals alone (no operator preferences)."""
    return plan_with_preferences(world, PreferenceSet.empty(), config)


def plan_with_preferences(world: World, pset: PreferenceSet,
                          config: Optional[SearchConfig] = None) -> Plan:
    """Best plan under mission goals (hard) plus weighted preferences and
    orderings (soft). With an empty preference set this coincides exactly
    with plan_baseline, including provenance."""
    config = config or SearchConfig()
    ctx = _Context(world, pset, config)
    provenance = "baseline" if not pset.preferences else "constrained"

    root = ctx.root()
    root_bound = ctx.bound(root)

    counter = itertools.count()
    incumbent: Optional[tuple[float, ProductNode, tuple]] = None  # score, node, path
    best_partial: tuple[float, ProductNode, tuple] = (-INF, root, ())

    def consider(node: ProductNode, path: tuple) -> None:
        nonlocal incumbent, best_partial
        score = ctx.endpoint_score(node)
        if score > best_partial[0]:
            best_partial = (score, node, path)
        if ctx.is_complete(node):
            if incumbent is None or score > incumbent[0]:
                incumbent = (score, node, path)

    heap: list[tuple[float, int, ProductNode, tuple]] = []
    closed: dict[tuple, int] = {}

    def push(node: ProductNode, path: tuple, bound: float) -> None:
        key = (node.state, node.aut, node.first_sat)
        prior = closed.get(key)
        if prior is not None and prior <= node.cost:
            return
        closed[key] = node.cost
        heapq.heappush(heap, (-bound, next(counter), node, path))

    consider(root, ())
    if root_bound > -INF:
        push(root, (), root_bound)

    expanded = 0
    while heap:
        neg_bound, _, node, path = heapq.heappop(heap)
        bound = -neg_bound
        if incumbent is not None and bound <= incumbent[0]:
            break  # max-bound frontier can no longer strictly improve
        key = (node.state, node.aut, node.first_sat)
        if closed.get(key, node.cost) < node.cost:
            continue  # superseded by a cheaper route to the same product state
        if node.state.t >= ctx.horizon:
            continue
        expanded += 1
        if expanded > config.node_budget:
            if incumbent is not None:
                score, end, end_path = incumbent
                return _build(ctx, end_path, provenance, score,
                              flags=("budget-exhausted",))
            partial = None
            if best_partial[0] > -INF:
                partial = _build(ctx, best_partial[2], provenance,
                                 best_partial[0],
                                 flags=("budget-exhausted", "incomplete"))
            raise BudgetExceededError(
                f"node budget {config.node_budget} exhausted before any "
                f"goal-complete plan was found", partial)
        children = []
        for action in domain.applicable(node.state, ctx.world):
            child = ctx.child(node, action)
            consider(child, path + (action,))
            child_bound = ctx.bound(child)
            if child_bound == -INF:
                continue
            if incumbent is not None and child_bound <= incumbent[0]:
                continue
            children.append((child_bound, child, action))
        if config.beam_width is not None:
            children.sort(key=lambda c: -c[0])
            children = children[:config.beam_width]
        for child_bound, child, action in children:
            push(child, path + (action,), child_bound)

    if incumbent is None:
        raise UnsolvableError(
            f"no plan achieves all mission goals within horizon {ctx.horizon}")
    score, _, end_path = incumbent
    return _build(ctx, end_path, provenance, score)


def _build(ctx: _Context, path: tuple, provenance: str, score: float,
           flags: tuple[str, ...] = ()) -> Plan:
    return Plan.from_actions(ctx.world, list(path), provenance, score, flags)


# ---------------------------------------------------------------------------
# Explanation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PreferenceOutcome:
    name: str
    satisfied: bool
    first_time: Optional[int]
    weight: float
    kind: str  # control | declarative


@dataclass(frozen=True)
class OrderingOutcome:
    earlier: str
    later: str
    preserved: bool
    weight: float


@dataclass(frozen=True)
class SatisfactionReport:
    """Per-preference satisfaction, ordering outcomes, and a score
    decomposition that sums exactly to the plan's deterministic score."""

    goals: tuple[tuple[str, bool, Optional[int]], ...]
    preferences: tuple[PreferenceOutcome, ...]
    orderings: tuple[OrderingOutcome, ...]
    goal_total: float
    preference_total: float
    ordering_total: float
    action_cost_total: float

    @property
    def net_score(self) -> float:
        return (self.goal_total + self.preference_total + self.ordering_total
                - self.action_cost_total)

    def render_text(self) -> str:
        lines = ["goals:"]
        for gid, sat, t in self.goals:
            when = f" at t={t}" if t is not None else ""
            lines.append(f"  {'+' if sat else '-'} {gid}{when}")
        if self.preferences:
            lines.append("preferences:")
            for p in self.preferences:
                when = f" at t={p.first_time}" if p.first_time is not None else ""
                lines.append(f"  {'+' if p.satisfied else '-'} {p.name} "
                             f"[{p.kind}]{when}")
        if self.orderings:
            lines.append("orderings:")
            for o in self.orderings:
                lines.append(f"  {'+' if o.preserved else '-'} "
                             f"{o.earlier} before {o.later}")
        lines.append(f"score: goals {self.goal_total:g} "
                     f"+ preferences {self.preference_total:g} "
                     f"+ orderings {self.ordering_total:g} "
                     f"- actions {self.action_cost_total:g} "
                     f"= {self.net_score:g}")
        return "\n".join(lines)


def explain(plan: Plan, pset: PreferenceSet, world: World,
            weights: RewardWeights = RewardWeights()) -> SatisfactionReport:
    """Score decomposition and per-preference verdicts for a plan.

    Verdicts come from direct trace evaluation of each lowered formula, so
    this is an independent check on what the product search claimed.
    """
    labels = list(plan.labels)
    goal_times = domain.goal_first_times(plan.trace, world)
    goals = tuple((g.id, g.id in plan.goals_satisfied, goal_times.get(g.id))
                  for g in world.mission_goals)
    outcomes = []
    times: dict[str, Optional[int]] = {}
    for p in pset.preferences:
        formula = prefs_mod.lowered(p)
        sat = ltl.evaluate(formula, labels, 0)
        first = ltl.first_satisfaction_time(formula, labels) if sat else None
        if sat:
            times[p.name] = first
        outcomes.append(PreferenceOutcome(
            p.name, sat, first, p.weight, prefs_mod.classify(p)))
    ordering_outcomes = []
    ordering_total = 0.0
    for o in pset.orderings:
        ta, tb = times.get(o.earlier), times.get(o.later)
        preserved = ta is not None and tb is not None and ta <= tb
        w = o.weight if o.weight is not None else weights.ordering_default
        if preserved:
            ordering_total += w
        ordering_outcomes.append(OrderingOutcome(o.earlier, o.later, preserved, w))
    return SatisfactionReport(
        goals=goals,
        preferences=tuple(outcomes),
        orderings=tuple(ordering_outcomes),
        goal_total=weights.goal_reward * len(plan.goals_satisfied),
        preference_total=sum(p.weight for p in outcomes if p.satisfied),
        ordering_total=ordering_total,
        action_cost_total=weights.action_cost * plan.action_count,
    )


# ---------------------------------------------------------------------------
# Plan text format
# ---------------------------------------------------------------------------

def render_plan(plan: Plan) -> str:
    """Line-oriented plan text: one ``t=<k> uav:action ...`` line per step
    plus a score footer."""
    lines = []
    for k, joint in enumerate(plan.actions):
        parts = " ".join(f"{u}:{domain.render_action(a)}"
                         for u, a in zip(plan.uav_ids, joint))
        lines.append(f"t={k} {parts}")
    lines.append(f"score={plan.score:g} provenance={plan.provenance}")
    return "\n".join(lines) + "\n"


def parse_plan(text: str, world: World) -> Plan:
    """Rebuild a plan from its text rendering against a world."""
    actions: list[JointAction] = []
    score = 0.0
    provenance = "baseline"
    order = {u.id: i for i, u in enumerate(world.uavs)}
    for line in text.strip().splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("score="):
            head, _, tail = line.partition(" ")
            score = float(head.split("=", 1)[1])
            if tail.startswith("provenance="):
                provenance = tail.split("=", 1)[1]
            continue
        parts = line.split()
        if not parts[0].startswith("t="):
            raise ValueError(f"bad plan line: {line!r}")
        joint: list = [domain.WAIT] * len(world.uavs)
        for chunk in parts[1:]:
            uav, _, act = chunk.partition(":")
            joint[order[uav]] = domain.parse_action(act)
        actions.append(tuple(joint))
    return Plan.from_actions(world, actions, provenance, score)
