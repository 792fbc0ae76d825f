"""Deterministic grid-world base model: entities, joint actions, transitions,
and the grounded proposition vocabulary every other layer consumes.

Coordinates are (x, y) with 0 <= x < width and 0 <= y < height; y grows
northward. All types are immutable values and every operation is a pure
function, so the model is safe to share across concurrent workers.

Concurrency model for actions: all operational UAVs act simultaneously each
timestep (lock-step joint actions). Non-operational UAVs implicitly wait.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Iterator, Optional, Sequence

Cell = tuple[int, int]

DIRECTIONS = ("N", "S", "E", "W")
_DELTAS = {"N": (0, 1), "S": (0, -1), "E": (1, 0), "W": (-1, 0)}

TARGET_STATUSES = ("unknown", "friendly", "hostile")


class WorldValidationError(ValueError):
    """A world description violates a structural invariant."""


class PreconditionError(ValueError):
    """An action component was applied in a state that does not satisfy its
    precondition; carries the offending UAV and the violated condition."""

    def __init__(self, uav: str, condition: str):
        super().__init__(f"uav {uav}: {condition}")
        self.uav = uav
        self.condition = condition


@dataclass(frozen=True)
class Grid:
    width: int
    height: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise WorldValidationError("grid must be at least 1x1")

    def contains(self, cell: Cell) -> bool:
        x, y = cell
        return 0 <= x < self.width and 0 <= y < self.height


@dataclass(frozen=True)
class Uav:
    id: str
    start: Cell
    can_carry: bool = True
    operational: bool = True


@dataclass(frozen=True)
class Target:
    id: str
    trajectory: tuple[Cell, ...]
    status: str = "unknown"

    def __post_init__(self):
        if not self.trajectory:
            raise WorldValidationError(f"target {self.id}: empty trajectory")
        if self.status not in TARGET_STATUSES:
            raise WorldValidationError(f"target {self.id}: bad status {self.status!r}")

    def position(self, t: int) -> Cell:
        """Cell at timestep t; targets hold the last cell once the known
        trajectory is exhausted."""
        if t < len(self.trajectory):
            return self.trajectory[t]
        return self.trajectory[-1]


@dataclass(frozen=True)
class Asset:
    id: str
    location: Cell
    needs_pallet: Optional[str] = None


@dataclass(frozen=True)
class Pallet:
    id: str
    location: Cell


@dataclass(frozen=True)
class Goal:
    """A mission objective: photograph a target, visit an asset, or deliver
    an asset's needed pallet - each achievable by any UAV."""

    kind: str  # "photo" | "visit" | "deliver"
    entity: str  # target id for photo; asset id for visit/deliver

    @property
    def id(self) -> str:
        return f"{self.kind}-{self.entity}"

    def satisfied(self, state: "JointState", world: "World") -> bool:
        if self.kind == "photo":
            return any(t == self.entity for t, _ in state.photos)
        if self.kind == "visit":
            return any(a == self.entity for a, _ in state.visited)
        if self.kind == "deliver":
            needed = world.asset(self.entity).needs_pallet
            return needed is not None and (needed, self.entity) in state.delivered
        raise WorldValidationError(f"unknown goal kind {self.kind!r}")


@dataclass(frozen=True)
class World:
    """The immutable base planning model. Operators may change objectives at
    runtime but never this structure."""

    grid: Grid
    uavs: tuple[Uav, ...]
    targets: tuple[Target, ...] = ()
    assets: tuple[Asset, ...] = ()
    pallets: tuple[Pallet, ...] = ()
    horizon: int = 20
    mission_goals: tuple[Goal, ...] = ()

    def __post_init__(self):
        if self.horizon < 1:
            raise WorldValidationError("horizon must be >= 1")
        ids: list[str] = []
        for group in (self.uavs, self.targets, self.assets, self.pallets):
            ids.extend(e.id for e in group)
        dup = {i for i in ids if ids.count(i) > 1}
        if dup:
            raise WorldValidationError(f"duplicate entity ids: {sorted(dup)}")
        for u in self.uavs:
            if not self.grid.contains(u.start):
                raise WorldValidationError(f"uav {u.id} starts outside grid")
        for t in self.targets:
            for c in t.trajectory:
                if not self.grid.contains(c):
                    raise WorldValidationError(
                        f"target {t.id} trajectory leaves grid at {c}")
        for a in self.assets:
            if not self.grid.contains(a.location):
                raise WorldValidationError(f"asset {a.id} outside grid")
            if a.needs_pallet is not None and not any(
                    p.id == a.needs_pallet for p in self.pallets):
                raise WorldValidationError(
                    f"asset {a.id} needs unknown pallet {a.needs_pallet}")
        for p in self.pallets:
            if not self.grid.contains(p.location):
                raise WorldValidationError(f"pallet {p.id} outside grid")
        for g in self.mission_goals:
            if g.kind == "photo" and not any(t.id == g.entity for t in self.targets):
                raise WorldValidationError(f"goal {g.id}: unknown target")
            if g.kind in ("visit", "deliver") and not any(
                    a.id == g.entity for a in self.assets):
                raise WorldValidationError(f"goal {g.id}: unknown asset")
            if g.kind == "deliver" and self.asset(g.entity).needs_pallet is None:
                raise WorldValidationError(
                    f"goal {g.id}: asset declares no needed pallet")

    def uav_index(self, uav_id: str) -> int:
        for i, u in enumerate(self.uavs):
            if u.id == uav_id:
                return i
        raise KeyError(uav_id)

    def uav(self, uav_id: str) -> Uav:
        return self.uavs[self.uav_index(uav_id)]

    def target(self, target_id: str) -> Target:
        for t in self.targets:
            if t.id == target_id:
                return t
        raise KeyError(target_id)

    def asset(self, asset_id: str) -> Asset:
        for a in self.assets:
            if a.id == asset_id:
                return a
        raise KeyError(asset_id)

    def pallet(self, pallet_id: str) -> Pallet:
        for p in self.pallets:
            if p.id == pallet_id:
                return p
        raise KeyError(pallet_id)

    def with_asset_needs(self, overrides: dict[str, Optional[str]]) -> "World":
        """Copy with some assets' needed pallet replaced (objective-side
        patch used by assessment hypotheses; dynamics are untouched)."""
        assets = tuple(
            replace(a, needs_pallet=overrides.get(a.id, a.needs_pallet))
            for a in self.assets)
        return replace(self, assets=assets)


# ---------------------------------------------------------------------------
# Actions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Move:
    direction: str

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise WorldValidationError(f"bad direction {self.direction!r}")


@dataclass(frozen=True)
class TakePhoto:
    target: str


@dataclass(frozen=True)
class PickUp:
    pallet: str


@dataclass(frozen=True)
class Drop:
    asset: str


@dataclass(frozen=True)
class Wait:
    pass


WAIT = Wait()
UavAction = Move | TakePhoto | PickUp | Drop | Wait
JointAction = tuple[UavAction, ...]


def action_key(action: UavAction) -> tuple:
    """Deterministic ordering of per-UAV actions: moves N,S,E,W, then photos,
    pickups, drops (alphabetical by entity), waits last. This order is the
    planner's tie-break and must stay stable."""
    if isinstance(action, Move):
        return (0, DIRECTIONS.index(action.direction), "")
    if isinstance(action, TakePhoto):
        return (1, 0, action.target)
    if isinstance(action, PickUp):
        return (2, 0, action.pallet)
    if isinstance(action, Drop):
        return (3, 0, action.asset)
    return (4, 0, "")


def render_action(action: UavAction) -> str:
    if isinstance(action, Move):
        return f"move({action.direction})"
    if isinstance(action, TakePhoto):
        return f"photo({action.target})"
    if isinstance(action, PickUp):
        return f"pickup({action.pallet})"
    if isinstance(action, Drop):
        return f"drop({action.asset})"
    return "wait"


def parse_action(text: str) -> UavAction:
    text = text.strip()
    if text == "wait":
        return WAIT
    for name, cls in (("move", Move), ("photo", TakePhoto),
                      ("pickup", PickUp), ("drop", Drop)):
        if text.startswith(name + "(") and text.endswith(")"):
            return cls(text[len(name) + 1:-1])
    raise ValueError(f"unparseable action {text!r}")


# ---------------------------------------------------------------------------
# State
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class JointState:
    """One timestep-indexed joint state. Tuple fields are aligned with the
    world's uav order; achievement sets grow monotonically along a trajectory.
    """

    t: int
    uav_at: tuple[Cell, ...]
    carrying: tuple[Optional[str], ...]
    photos: frozenset  # of (target_id, uav_id)
    visited: frozenset  # of (asset_id, uav_id)
    delivered: frozenset  # of (pallet_id, asset_id)

    def position_of(self, world: World, uav_id: str) -> Cell:
        return self.uav_at[world.uav_index(uav_id)]

    def sort_key(self) -> tuple:
        """Fully-ordered canonical key (set fields sorted), safe to sort by
        across processes regardless of hash randomisation."""
        return (self.t, self.uav_at,
                tuple(c or "" for c in self.carrying),
                tuple(sorted(self.photos)),
                tuple(sorted(self.visited)),
                tuple(sorted(self.delivered)))


def _arrivals(world: World, uav_at: tuple[Cell, ...], visited: frozenset) -> frozenset:
    extra = {(a.id, u.id)
             for a in world.assets
             for u, cell in zip(world.uavs, uav_at)
             if cell == a.location}
    return visited | extra


def initial_state(world: World) -> JointState:
    """The t=0 state: UAVs at their start cells, nothing achieved except
    visits implied by starting on an asset."""
    uav_at = tuple(u.start for u in world.uavs)
    return JointState(
        t=0,
        uav_at=uav_at,
        carrying=tuple(None for _ in world.uavs),
        photos=frozenset(),
        visited=_arrivals(world, uav_at, frozenset()),
        delivered=frozenset(),
    )


def pallet_location(state: JointState, world: World, pallet_id: str) -> Optional[Cell]:
    """Current cell of a pallet: its declared location until picked up; None
    while carried or after delivery (delivered pallets stay installed)."""
    if any(p == pallet_id for p, _ in state.delivered):
        return None
    for i, carried in enumerate(state.carrying):
        if carried == pallet_id:
            return None
    return world.pallet(pallet_id).location


def uav_actions(state: JointState, world: World, uav_index: int) -> list[UavAction]:
    """Applicable actions for one UAV, in deterministic order."""
    uav = world.uavs[uav_index]
    if not uav.operational:
        return [WAIT]
    cell = state.uav_at[uav_index]
    x, y = cell
    out: list[UavAction] = []
    for d in DIRECTIONS:
        dx, dy = _DELTAS[d]
        if world.grid.contains((x + dx, y + dy)):
            out.append(Move(d))
    for t in world.targets:
        if t.position(state.t) == cell:
            out.append(TakePhoto(t.id))
    if uav.can_carry and state.carrying[uav_index] is None:
        for p in world.pallets:
            if pallet_location(state, world, p.id) == cell:
                out.append(PickUp(p.id))
    if state.carrying[uav_index] is not None:
        for a in world.assets:
            if a.location == cell:
                out.append(Drop(a.id))
    out.append(WAIT)
    out.sort(key=action_key)
    return out


def applicable(state: JointState, world: World) -> Iterator[JointAction]:
    """All applicable joint actions: the cartesian product of per-UAV
    applicable actions, minus jointly inconsistent combinations (two UAVs
    picking up the same pallet). Deterministic order."""
    per_uav = [uav_actions(state, world, i) for i in range(len(world.uavs))]
    for combo in itertools.product(*per_uav):
        picks = [a.pallet for a in combo if isinstance(a, PickUp)]
        if len(picks) != len(set(picks)):
            continue
        yield combo


def _check_component(state: JointState, world: World, i: int,
                     action: UavAction) -> None:
    uav = world.uavs[i]
    cell = state.uav_at[i]
    if not uav.operational and not isinstance(action, Wait):
        raise PreconditionError(uav.id, "non-operational uav must wait")
    if isinstance(action, Move):
        dx, dy = _DELTAS[action.direction]
        if not world.grid.contains((cell[0] + dx, cell[1] + dy)):
            raise PreconditionError(uav.id, f"move {action.direction} exits grid")
    elif isinstance(action, TakePhoto):
        if world.target(action.target).position(state.t) != cell:
            raise PreconditionError(
                uav.id, f"target {action.target} not co-located at t={state.t}")
    elif isinstance(action, PickUp):
        if not uav.can_carry:
            raise PreconditionError(uav.id, "uav cannot carry")
        if state.carrying[i] is not None:
            raise PreconditionError(uav.id, "already carrying")
        if pallet_location(state, world, action.pallet) != cell:
            raise PreconditionError(uav.id, f"pallet {action.pallet} not here")
    elif isinstance(action, Drop):
        if state.carrying[i] is None:
            raise PreconditionError(uav.id, "not carrying")
        if world.asset(action.asset).location != cell:
            raise PreconditionError(uav.id, f"not at asset {action.asset}")


def step(state: JointState, action: JointAction, world: World) -> JointState:
    """Apply one joint action; raises PreconditionError naming the violated
    precondition and the offending UAV when the action is inapplicable.

    Effects: moves update locations; TakePhoto records (target, uav);
    arriving at (or remaining on) an asset cell records (asset, uav) visits;
    Drop at an asset records (pallet, asset) as delivered and is permanent.
    """
    if len(action) != len(world.uavs):
        raise ValueError("joint action arity does not match uav count")
    picks = [a.pallet for a in action if isinstance(a, PickUp)]
    if len(picks) != len(set(picks)):
        raise PreconditionError(
            "*", "two uavs picking up the same pallet")
    for i, component in enumerate(action):
        _check_component(state, world, i, component)

    uav_at = list(state.uav_at)
    carrying = list(state.carrying)
    photos = set(state.photos)
    delivered = set(state.delivered)
    for i, component in enumerate(action):
        if isinstance(component, Move):
            dx, dy = _DELTAS[component.direction]
            uav_at[i] = (uav_at[i][0] + dx, uav_at[i][1] + dy)
        elif isinstance(component, TakePhoto):
            photos.add((component.target, world.uavs[i].id))
        elif isinstance(component, PickUp):
            carrying[i] = component.pallet
        elif isinstance(component, Drop):
            delivered.add((carrying[i], component.asset))
            carrying[i] = None

    new_at = tuple(uav_at)
    return JointState(
        t=state.t + 1,
        uav_at=new_at,
        carrying=tuple(carrying),
        photos=frozenset(photos),
        visited=_arrivals(world, new_at, state.visited),
        delivered=frozenset(delivered),
    )


def run(world: World, actions: Sequence[JointAction]) -> list[JointState]:
    """Trajectory from the initial state under a sequence of joint actions."""
    trace = [initial_state(world)]
    for a in actions:
        trace.append(step(trace[-1], a, world))
    return trace


# ---------------------------------------------------------------------------
# Propositions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Prop:
    """A grounded atomic proposition, e.g. agentloc(d1, 4, 3). Coordinates
    render with the v prefix used by the constraint surface syntax.

    Equality is structural; the hash is precomputed because propositions are
    churned through frozensets on every trace label."""

    name: str
    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.name, self.args)))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        return (isinstance(other, Prop) and self.name == other.name
                and self.args == other.args)

    def sexpr(self) -> str:
        rendered = " ".join(
            f"v{a}" if isinstance(a, int) and self.name == "agentloc" else str(a)
            for a in self.args)
        return f"({self.name} {rendered})" if rendered else f"({self.name})"

    def __repr__(self) -> str:
        return self.sexpr()


@lru_cache(maxsize=None)
def agentloc(uav: str, x: int, y: int) -> Prop:
    return Prop("agentloc", (uav, x, y))


@lru_cache(maxsize=None)
def have_photo(target: str, uav: str) -> Prop:
    return Prop("have-photo", (target, uav))


@lru_cache(maxsize=None)
def visited_prop(asset: str, uav: str) -> Prop:
    return Prop("visited", (asset, uav))


@lru_cache(maxsize=None)
def carry_pallet(pallet: str, uav: str) -> Prop:
    return Prop("carry-pallet", (pallet, uav))


@lru_cache(maxsize=None)
def delivered_prop(pallet: str, asset: str) -> Prop:
    return Prop("delivered", (pallet, asset))


@lru_cache(maxsize=None)
def t_eq(k: int) -> Prop:
    return Prop("t-eq", (k,))


def propositions(state: JointState, world: World) -> frozenset:
    """The exact grounded proposition set true in a state; labels the trace
    for temporal-logic evaluation."""
    props = set()
    for u, cell in zip(world.uavs, state.uav_at):
        props.add(agentloc(u.id, cell[0], cell[1]))
    for target, uav in state.photos:
        props.add(have_photo(target, uav))
    for asset, uav in state.visited:
        props.add(visited_prop(asset, uav))
    for i, pallet in enumerate(state.carrying):
        if pallet is not None:
            props.add(carry_pallet(pallet, world.uavs[i].id))
    for pallet, asset in state.delivered:
        props.add(delivered_prop(pallet, asset))
    props.add(t_eq(state.t))
    return frozenset(props)


def trace_labels(trace: Sequence[JointState], world: World) -> list[frozenset]:
    return [propositions(s, world) for s in trace]


def goals_satisfied(trace: Sequence[JointState], world: World) -> frozenset:
    """Ids of mission goals achieved by the final state of a trajectory;
    achievement sets are monotone, so end-state inspection suffices."""
    if not trace:
        raise ValueError("trace must be non-empty")
    final = trace[-1]
    return frozenset(g.id for g in world.mission_goals if g.satisfied(final, world))


def goal_first_times(trace: Sequence[JointState], world: World) -> dict[str, int]:
    """Earliest timestep each satisfied mission goal became true."""
    times: dict[str, int] = {}
    for state in trace:
        for g in world.mission_goals:
            if g.id not in times and g.satisfied(state, world):
                times[g.id] = state.t
    return times
