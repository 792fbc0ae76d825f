"""Stochastic assessment of plans: outcome rules, expected return of a fixed
plan, and the exact optimal expected return.

The planner's world stays deterministic; everything uncertain lives here as
outcome rules (per-action success probabilities with explicit failure
effects) and hypotheses (equally plausible readings of the objectives, e.g.
which of two sighted pallets an asset really needs). Scoring follows the
reward scheme: a configurable reward per achieved goal or preference, a cost
per executed action, and a reward per preserved preference ordering.

A plan is scored open loop: the action sequence is fixed, failures unfold
underneath it, and components that have become inapplicable on a branch are
skipped at no cost. The optimal return is computed both ways the notion can
be read: the best fixed action sequence (plan value, used in reports) and
the best adaptive policy (expectimax value, an upper bound on it).
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

from . import domain, ltl, prefs as prefs_mod
from .domain import (Cell, JointAction, JointState, Move, PickUp, TakePhoto,
                     Wait, World)
from .planner import Plan, count_actions
from .prefs import PreferenceSet

INF = float("inf")

FAILURE_EFFECTS = ("no-effect", "action-wasted", "uav-lost")
RULE_ACTIONS = ("move", "take-photo", "pickup", "drop", "wait", "any")

DEFAULT_LEAF_BOUND = 2 ** 20


class OutcomeTreeTooLargeError(RuntimeError):
    """The branch tree exceeded the leaf bound; consolidate rules."""


class ModelError(ValueError):
    """An assessment model violates a structural constraint."""


@dataclass(frozen=True)
class OutcomeRule:
    """One stochastic annotation: actions matching the pattern succeed with
    the given probability; failures apply the named effect.

    Failure effects: ``action-wasted`` pays the action cost but voids the
    effect; ``no-effect`` voids both; ``uav-lost`` pays the cost and removes
    the vehicle (and anything it carries) from service for the rest of the
    trace. ``stride`` makes only every n-th matching occurrence subject to
    the rule; ``once`` limits it to the first.
    """

    name: str
    action: str = "any"
    uav: Optional[str] = None
    entity: Optional[str] = None  # target / pallet / asset filter
    cells: Optional[frozenset] = None  # effect-cell filter
    success_probability: float = 0.5
    on_failure: str = "action-wasted"
    stride: int = 1
    once: bool = False

    def __post_init__(self):
        if not 0.0 <= self.success_probability <= 1.0:
            raise ModelError(f"rule {self.name}: probability out of [0,1]")
        if self.on_failure not in FAILURE_EFFECTS:
            raise ModelError(f"rule {self.name}: bad failure effect "
                             f"{self.on_failure!r}")
        if self.action not in RULE_ACTIONS:
            raise ModelError(f"rule {self.name}: bad action {self.action!r}")
        if self.stride < 1:
            raise ModelError(f"rule {self.name}: stride must be >= 1")


@dataclass(frozen=True)
class Hypothesis:
    """One equally-real reading of the objectives: a probability plus
    objective-side world patches (asset-needs overrides). Dynamics are never
    patched - the operator may change objectives, not the domain model."""

    probability: float
    needs: tuple[tuple[str, str], ...] = ()  # (asset id, pallet id)

    def patch(self, world: World) -> World:
        if not self.needs:
            return world
        return world.with_asset_needs(dict(self.needs))


@dataclass(frozen=True)
class AssessmentModel:
    world: World
    rules: tuple[OutcomeRule, ...] = ()
    hypotheses: tuple[Hypothesis, ...] = ()
    goal_reward: float = 20.0
    action_cost: float = 1.0
    ordering_reward: float = 10.0
    default_probability: float = 0.5
    discount: float = 1.0

    def __post_init__(self):
        if min(self.goal_reward, self.action_cost, self.ordering_reward) < 0:
            raise ModelError("reward constants must be nonnegative")
        if not 0.0 < self.discount <= 1.0:
            raise ModelError("discount must be in (0, 1]")
        if self.hypotheses:
            total = sum(h.probability for h in self.hypotheses)
            if abs(total - 1.0) > 1e-9:
                raise ModelError(f"hypothesis probabilities sum to {total}")
        for rule in self.rules:
            self._check_rule(rule)

    def _check_rule(self, rule: OutcomeRule) -> None:
        w = self.world
        known = ({u.id for u in w.uavs}, {t.id for t in w.targets},
                 {a.id for a in w.assets}, {p.id for p in w.pallets})
        if rule.uav is not None and rule.uav not in known[0]:
            raise ModelError(f"rule {rule.name}: unknown uav {rule.uav}")
        if rule.entity is not None and not any(rule.entity in g for g in known[1:]):
            raise ModelError(f"rule {rule.name}: unknown entity {rule.entity}")
        for cell in rule.cells or ():
            if not w.grid.contains(cell):
                raise ModelError(f"rule {rule.name}: cell {cell} outside grid")

    def effective_hypotheses(self) -> tuple[Hypothesis, ...]:
        return self.hypotheses or (Hypothesis(1.0),)


# ---------------------------------------------------------------------------
# Rule matching and step resolution
# ---------------------------------------------------------------------------

def _action_kind(action) -> str:
    if isinstance(action, Move):
        return "move"
    if isinstance(action, TakePhoto):
        return "take-photo"
    if isinstance(action, PickUp):
        return "pickup"
    if isinstance(action, domain.Drop):
        return "drop"
    return "wait"


def _action_entity(action) -> Optional[str]:
    if isinstance(action, TakePhoto):
        return action.target
    if isinstance(action, PickUp):
        return action.pallet
    if isinstance(action, domain.Drop):
        return action.asset
    return None


def _effect_cell(action, cell: Cell) -> Cell:
    if isinstance(action, Move):
        dx, dy = domain._DELTAS[action.direction]
        return (cell[0] + dx, cell[1] + dy)
    return cell


def _rule_matches(rule: OutcomeRule, action, uav_id: str, cell: Cell) -> bool:
    kind = _action_kind(action)
    if rule.action != "any" and rule.action != kind:
        return False
    if kind == "wait" and rule.action != "wait" and rule.action != "any":
        return False
    if rule.uav is not None and rule.uav != uav_id:
        return False
    if rule.entity is not None and rule.entity != _action_entity(action):
        return False
    if rule.cells is not None and _effect_cell(action, cell) not in rule.cells:
        return False
    return True


def _component_applicable(state: JointState, world: World, i: int,
                          action) -> bool:
    try:
        domain._check_component(state, world, i, action)
    except domain.PreconditionError:
        return False
    return True


@dataclass(frozen=True)
class _Branch:
    """One partial outcome while the components of a single step resolve."""
    prob: float
    effective: tuple
    lost: frozenset
    counters: tuple[int, ...]
    cost: int  # actions charged this step


def resolve_step(world: World, rules: Sequence[OutcomeRule], state: JointState,
                 lost: frozenset, counters: tuple[int, ...],
                 action: JointAction,
                 skip_inapplicable: bool) -> list[_Branch]:
    """All stochastic outcomes of attempting one joint action.

    Components are resolved in uav order: lost vehicles contribute nothing;
    inapplicable components are skipped at no cost when ``skip_inapplicable``
    (open-loop execution) and are rejected otherwise; the first matching rule
    whose stride/once gate fires decides success or failure. Effects are
    applied lock-step afterwards by the caller via domain.step.
    """
    branches = [_Branch(1.0, (), lost, counters, 0)]
    for i, component in enumerate(action):
        uav = world.uavs[i]
        nxt: list[_Branch] = []
        for b in branches:
            if i in b.lost:
                nxt.append(replace(b, effective=b.effective + (domain.WAIT,)))
                continue
            if not _component_applicable(state, world, i, component):
                if not skip_inapplicable:
                    raise domain.PreconditionError(
                        uav.id, f"inapplicable component {component!r}")
                nxt.append(replace(b, effective=b.effective + (domain.WAIT,)))
                continue
            is_wait = isinstance(component, Wait)
            base_cost = 0 if is_wait else 1
            rule, new_counters = _gate(rules, b.counters, component, uav.id,
                                       state.uav_at[i])
            if rule is None:
                nxt.append(_Branch(b.prob, b.effective + (component,), b.lost,
                                   new_counters, b.cost + base_cost))
                continue
            p = rule.success_probability
            outcomes = []
            if p > 0.0:
                outcomes.append((p, True))
            if p < 1.0:
                outcomes.append((1.0 - p, False))
            for op, success in outcomes:
                if success:
                    nxt.append(_Branch(b.prob * op,
                                       b.effective + (component,), b.lost,
                                       new_counters, b.cost + base_cost))
                elif rule.on_failure == "uav-lost":
                    nxt.append(_Branch(b.prob * op,
                                       b.effective + (domain.WAIT,),
                                       b.lost | {i}, new_counters,
                                       b.cost + base_cost))
                elif rule.on_failure == "action-wasted":
                    nxt.append(_Branch(b.prob * op,
                                       b.effective + (domain.WAIT,), b.lost,
                                       new_counters, b.cost + base_cost))
                else:  # no-effect
                    nxt.append(_Branch(b.prob * op,
                                       b.effective + (domain.WAIT,), b.lost,
                                       new_counters, b.cost))
        branches = nxt
    return branches


def _gate(rules: Sequence[OutcomeRule], counters: tuple[int, ...], component,
          uav_id: str, cell: Cell) -> tuple[Optional[OutcomeRule], tuple[int, ...]]:
    """Resolve one component against the rules: the first rule whose pattern
    matches consumes the occurrence; its stride/once gate decides whether it
    actually fires. Counters are tracked only for gated rules (stride > 1 or
    once) and are kept normalised (modular for strides, saturating for once)
    so they stay a small finite state component."""
    for idx, rule in enumerate(rules):
        if not _rule_matches(rule, component, uav_id, cell):
            continue
        if rule.stride == 1 and not rule.once:
            return rule, counters
        raw = counters[idx] + 1
        fires = (raw % rule.stride == 0) and (not rule.once or raw == rule.stride)
        if rule.once:
            stored = min(raw, rule.stride)  # saturates once it can't fire again
        else:
            stored = raw % rule.stride
        updated = counters[:idx] + (stored,) + counters[idx + 1:]
        return (rule if fires else None), updated
    return None, counters


# ---------------------------------------------------------------------------
# Expected return of a fixed plan
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Outcome:
    probability: float
    score: float
    goals: frozenset
    preferences: frozenset
    action_count: int


@dataclass(frozen=True)
class ReturnReport:
    expected_return: float
    outcomes: tuple[Outcome, ...]
    goal_component: float
    preference_component: float
    ordering_component: float
    action_cost_component: float

    @property
    def probability_total(self) -> float:
        return sum(o.probability for o in self.outcomes)


def expected_return(plan: Plan, model: AssessmentModel, pset: PreferenceSet,
                    leaf_bound: int = DEFAULT_LEAF_BOUND) -> ReturnReport:
    """Exact expected return of a fixed plan under the assessment model.

    Enumerates the full outcome tree; each leaf is scored per hypothesis:
    goal and preference rewards discounted at their first-satisfaction step,
    ordering rewards at the later member's step, action costs at the step
    paid. With the default discount of 1 this is the plain reward sum.
    """
    return _expected_of_actions(plan.actions, model, pset, leaf_bound)


def _expected_of_actions(actions: Sequence[JointAction], model: AssessmentModel,
                         pset: PreferenceSet,
                         leaf_bound: int = DEFAULT_LEAF_BOUND) -> ReturnReport:
    world = model.world
    lowered = [(p, prefs_mod.lowered(p)) for p in pset.preferences]
    # leaves: (prob, trace, cost_events) with cost_events as (t, count)
    leaves: list[tuple[float, list[JointState], list[tuple[int, int]]]] = []
    init = domain.initial_state(world)
    frontier = [(1.0, [init], frozenset(), tuple(0 for _ in model.rules), [])]
    for k, action in enumerate(actions):
        nxt = []
        for prob, trace, lost, counters, costs in frontier:
            state = trace[-1]
            for b in resolve_step(world, model.rules, state, lost, counters,
                                  action, skip_inapplicable=True):
                new_state = domain.step(state, b.effective, world)
                nxt.append((prob * b.prob, trace + [new_state],
                            b.lost, b.counters,
                            costs + ([(k, b.cost)] if b.cost else [])))
            if len(nxt) > leaf_bound:
                raise OutcomeTreeTooLargeError(
                    f"outcome tree exceeded {leaf_bound} leaves at step {k}; "
                    f"consolidate assessment rules")
        frontier = nxt
    leaves = [(prob, trace, costs) for prob, trace, _, _, costs in frontier]

    gamma = model.discount
    outcomes = []
    expected = 0.0
    goal_c = pref_c = ord_c = cost_c = 0.0
    for prob, trace, costs in leaves:
        labels = domain.trace_labels(trace, world)
        pref_sat: dict[str, Optional[int]] = {}
        pref_score = 0.0
        for p, formula in lowered:
            if ltl.evaluate(formula, labels, 0):
                t_sat = ltl.first_satisfaction_time(formula, labels)
                pref_sat[p.name] = t_sat
                pref_score += p.weight * gamma ** (t_sat or 0)
        ord_score = 0.0
        for o in pset.orderings:
            ta, tb = pref_sat.get(o.earlier), pref_sat.get(o.later)
            if ta is not None and tb is not None and ta <= tb:
                w = o.weight if o.weight is not None else model.ordering_reward
                ord_score += w * gamma ** max(ta, tb)
        cost_score = sum(count * model.action_cost * gamma ** t
                         for t, count in costs)
        action_total = sum(count for _, count in costs)
        for h in model.effective_hypotheses():
            world_h = h.patch(world)
            goal_times = domain.goal_first_times(trace, world_h)
            sat_goals = domain.goals_satisfied(trace, world_h)
            goal_score = sum(model.goal_reward * gamma ** goal_times[g]
                             for g in sat_goals)
            score = goal_score + pref_score + ord_score - cost_score
            p_out = prob * h.probability
            outcomes.append(Outcome(p_out, score, sat_goals,
                                    frozenset(pref_sat), action_total))
            expected += p_out * score
            goal_c += p_out * goal_score
            pref_c += p_out * pref_score
            ord_c += p_out * ord_score
            cost_c += p_out * cost_score
    return ReturnReport(expected, tuple(outcomes), goal_c, pref_c, ord_c, cost_c)


# ---------------------------------------------------------------------------
# Optimal expected return
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OptimalReturn:
    """Both readings of "optimal": the best fixed action sequence
    (plan_value, with a witness) and the best adaptive policy
    (policy_value >= plan_value). Reports and tables use plan_value."""

    plan_value: float
    plan_actions: tuple[JointAction, ...]
    policy_value: float


@dataclass(frozen=True)
class _AugState:
    """Markov state for the exact solvers. Preference satisfaction history is
    compressed to what the rewards need: the acceptor state, an ever-accepted
    bit per preference, and a preserved bit per ordering (set when the later
    member first accepts no earlier than the earlier member)."""

    state: JointState
    lost: frozenset
    counters: tuple[int, ...]
    aut: tuple[int, ...]
    seen: tuple[bool, ...]
    order_ok: tuple[bool, ...]


class _Assessor:
    """Shared machinery for the exact solvers: automaton tracking, terminal
    scores, memoized expectimax over augmented states."""

    def __init__(self, model: AssessmentModel, pset: PreferenceSet,
                 horizon: Optional[int], state_bound: int):
        if model.discount != 1.0:
            raise NotImplementedError(
                "optimal_return supports the undiscounted model only")
        self.model = model
        self.world = model.world
        self.pset = pset
        self.horizon = horizon if horizon is not None else model.world.horizon
        self.state_bound = state_bound
        self.names = [p.name for p in pset.preferences]
        self.index = {name: i for i, name in enumerate(self.names)}
        self.weights = [p.weight for p in pset.preferences]
        self.automata = [ltl.compile(prefs_mod.lowered(p))
                         for p in pset.preferences]
        self.hyp = [(h.probability, h.patch(self.world))
                    for h in model.effective_hypotheses()]
        self.memo: dict[_AugState, float] = {}

    def _track(self, aut: tuple[int, ...], prev_seen: tuple[bool, ...],
               prev_ok: tuple[bool, ...]) -> tuple[tuple[bool, ...], tuple[bool, ...]]:
        accepting = tuple(a.is_accepting(s) for a, s in zip(self.automata, aut))
        seen = tuple(p or a for p, a in zip(prev_seen, accepting))
        ok = list(prev_ok)
        for k, o in enumerate(self.pset.orderings):
            if ok[k]:
                continue
            ia, ib = self.index[o.earlier], self.index[o.later]
            if seen[ib] and not prev_seen[ib]:
                # later member accepted for the first time this step;
                # preserved iff the earlier member accepted by now (ties ok)
                ok[k] = seen[ia]
        return seen, tuple(ok)

    def root(self) -> _AugState:
        state = domain.initial_state(self.world)
        label = domain.propositions(state, self.world)
        aut = tuple(a.step(a.initial, label) for a in self.automata)
        no = tuple(False for _ in self.automata)
        seen, ok = self._track(aut, no, tuple(False for _ in self.pset.orderings))
        return _AugState(state, frozenset(), tuple(0 for _ in self.model.rules),
                         aut, seen, ok)

    def advance(self, aug: _AugState, branch: _Branch) -> _AugState:
        state = domain.step(aug.state, branch.effective, self.world)
        label = domain.propositions(state, self.world)
        aut = tuple(a.step(s, label) for a, s in zip(self.automata, aug.aut))
        seen, ok = self._track(aut, aug.seen, aug.order_ok)
        return _AugState(state, branch.lost, branch.counters, aut, seen, ok)

    def terminal(self, aug: _AugState) -> float:
        """Reward total if the trace ended at this augmented state (costs are
        charged on transitions, not here)."""
        accepting = [a.is_accepting(s) for a, s in zip(self.automata, aug.aut)]
        total = sum(w for w, acc in zip(self.weights, accepting) if acc)
        for k, o in enumerate(self.pset.orderings):
            if (aug.order_ok[k] and accepting[self.index[o.earlier]]
                    and accepting[self.index[o.later]]):
                total += (o.weight if o.weight is not None
                          else self.model.ordering_reward)
        for prob, world_h in self.hyp:
            sat = sum(1 for g in world_h.mission_goals
                      if g.satisfied(aug.state, world_h))
            total += prob * self.model.goal_reward * sat
        return total

    def actions_for(self, aug: _AugState) -> list[JointAction]:
        per_uav = []
        for i in range(len(self.world.uavs)):
            if i in aug.lost:
                per_uav.append([domain.WAIT])
            else:
                per_uav.append(domain.uav_actions(aug.state, self.world, i))
        out = []
        for combo in itertools.product(*per_uav):
            picks = [a.pallet for a in combo if isinstance(a, PickUp)]
            if len(picks) != len(set(picks)):
                continue
            out.append(combo)
        return out

    def policy_value(self, aug: _AugState) -> float:
        """Exact finite-horizon expectimax with the option to stop."""
        cached = self.memo.get(aug)
        if cached is not None:
            return cached
        if len(self.memo) >= self.state_bound:
            raise OutcomeTreeTooLargeError(
                f"expectimax state bound {self.state_bound} exceeded")
        best = self.terminal(aug)
        if aug.state.t < self.horizon:
            for action in self.actions_for(aug):
                value = 0.0
                for b in resolve_step(self.world, self.model.rules, aug.state,
                                      aug.lost, aug.counters, action,
                                      skip_inapplicable=False):
                    child = self.advance(aug, b)
                    value += b.prob * (self.policy_value(child)
                                       - self.model.action_cost * b.cost)
                best = max(best, value)
        self.memo[aug] = best
        return best


DEFAULT_STATE_BOUND = 2_000_000


def optimal_return(model: AssessmentModel, pset: PreferenceSet,
                   horizon: Optional[int] = None,
                   state_bound: int = DEFAULT_STATE_BOUND) -> OptimalReturn:
    """Exact maxima of expected return: the best fixed plan (branch-and-bound
    over belief states, bounded by the expectimax policy value) and the best
    adaptive policy. Deterministic tie-breaking throughout."""
    assessor = _Assessor(model, pset, horizon, state_bound)
    root = assessor.root()
    policy_value = assessor.policy_value(root)

    # Belief node: tuple of (aug, prob, cost_paid) sorted deterministically.
    def aug_key(aug: _AugState) -> tuple:
        return (aug.state.sort_key(), tuple(sorted(aug.lost)), aug.counters,
                aug.aut, aug.seen, aug.order_ok)

    def belief_key(belief) -> tuple:
        return tuple((aug_key(aug), prob, cost) for aug, prob, cost in belief)

    def stop_value(belief) -> float:
        return sum(p * (assessor.terminal(aug) - model.action_cost * cost)
                   for aug, p, cost in belief)

    def bound(belief) -> float:
        return sum(p * (assessor.policy_value(aug) - model.action_cost * cost)
                   for aug, p, cost in belief)

    def candidate_actions(belief) -> list[JointAction]:
        per_uav: list[list] = [[] for _ in model.world.uavs]
        for aug, _, _ in belief:
            for i in range(len(model.world.uavs)):
                if i in aug.lost:
                    continue
                for a in domain.uav_actions(aug.state, model.world, i):
                    if a not in per_uav[i]:
                        per_uav[i].append(a)
        for i, options in enumerate(per_uav):
            if not options:
                options.append(domain.WAIT)
            options.sort(key=domain.action_key)
        out = []
        for combo in itertools.product(*per_uav):
            picks = [a.pallet for a in combo if isinstance(a, PickUp)]
            if len(picks) != len(set(picks)):
                continue
            out.append(combo)
        return out

    root_belief = ((root, 1.0, 0),)
    counter = itertools.count()
    heap = [(-bound(root_belief), next(counter), root_belief, ())]
    best_value = stop_value(root_belief)
    best_path: tuple = ()
    seen = {belief_key(root_belief)}

    while heap:
        neg_b, _, belief, path = heapq.heappop(heap)
        if -neg_b <= best_value + 1e-12:
            break
        t = belief[0][0].state.t
        if t >= assessor.horizon:
            continue
        for action in candidate_actions(belief):
            merged: dict[tuple, tuple] = {}
            for aug, prob, cost in belief:
                for b in resolve_step(model.world, model.rules, aug.state,
                                      aug.lost, aug.counters, action,
                                      skip_inapplicable=True):
                    child = assessor.advance(aug, b)
                    key = (child, cost + b.cost)
                    prior = merged.get(key)
                    merged[key] = (child, (prior[1] if prior else 0.0) + prob * b.prob,
                                   cost + b.cost)
            new_belief = tuple(sorted(merged.values(),
                                      key=lambda x: (aug_key(x[0]), x[2])))
            value = stop_value(new_belief)
            new_path = path + (action,)
            if value > best_value + 1e-12:
                best_value = value
                best_path = new_path
            b_bound = bound(new_belief)
            if b_bound <= best_value + 1e-12:
                continue
            key = belief_key(new_belief)
            if key in seen:
                continue
            seen.add(key)
            heapq.heappush(heap, (-b_bound, next(counter), new_belief, new_path))

    actions = _trim_trailing_waits(best_path, model, pset, best_value)
    return OptimalReturn(best_value, actions, policy_value)


def _trim_trailing_waits(actions: tuple, model: AssessmentModel,
                         pset: PreferenceSet, value: float) -> tuple:
    actions = tuple(actions)
    while actions and all(isinstance(a, Wait) for a in actions[-1]):
        shorter = actions[:-1]
        if shorter and abs(_expected_of_actions(shorter, model, pset)
                           .expected_return - value) > 1e-9:
            break
        if not shorter and abs(_expected_of_actions(shorter, model, pset)
                               .expected_return - value) > 1e-9:
            break
        actions = shorter
    return actions


# ---------------------------------------------------------------------------
# Comparison
# ---------------------------------------------------------------------------

def improvement(baseline, candidate) -> float:
    """Signed percentage change from baseline to candidate expected return.
    Raises on a zero baseline."""
    base = getattr(baseline, "expected_return", baseline)
    cand = getattr(candidate, "expected_return", candidate)
    if base == 0:
        raise ZeroDivisionError("baseline expected return is zero")
    return (cand - base) / base * 100.0


@dataclass(frozen=True)
class ComparisonRow:
    """One row of the comparison table: baseline / optimal / constrained
    returns with improvement and optimality percentages (1-decimal
    rounding, round-half-even)."""

    scenario: str
    base_return: float
    optimal_return: float
    constrained_return: float

    @property
    def improvement_pct(self) -> float:
        return improvement(self.base_return, self.constrained_return)

    @property
    def optimality_pct(self) -> float:
        return improvement(self.optimal_return, self.constrained_return)

    def cells(self) -> tuple[str, ...]:
        return (self.scenario,
                f"{round(self.base_return, 1):.1f}",
                f"{round(self.optimal_return, 1):.1f}",
                f"{round(self.constrained_return, 1):.1f}",
                f"{round(self.improvement_pct, 1):.1f}%",
                f"{round(self.optimality_pct, 1):.1f}%")


COMPARISON_HEADER = ("Task", "Base", "Opt.", "Constrained",
                     "Improvement", "Optimality")


def render_comparison(rows: Sequence[ComparisonRow],
                      mean_row: bool = False) -> str:
    table = [COMPARISON_HEADER] + [r.cells() for r in rows]
    if mean_row and rows:
        mean_imp = sum(r.improvement_pct for r in rows) / len(rows)
        mean_opt = sum(r.optimality_pct for r in rows) / len(rows)
        table.append(("Ave.", "", "", "",
                      f"{round(mean_imp, 1):.1f}%", f"{round(mean_opt, 1):.1f}%"))
    widths = [max(len(row[i]) for row in table) for i in range(len(table[0]))]
    lines = []
    for row in table:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"
