"""Scenario fixtures: a versioned text format binding a world, operator
preferences, an intelligence update (assessment rules and hypotheses), and a
curated reference constraint set, plus the six bundled task reconstructions.

Format sketch (sections may appear in any order, ';' comments allowed)::

    scenario-format v1

    [scenario]
    name = t1
    title = Fog bank
    horizon = 12

    [grid]
    width = 8
    height = 6

    [uavs]
    d1 start=(0,1) can-carry=yes operational=yes

    [targets]
    t1 status=unknown trajectory=(4,1) (4,2)

    [assets]
    a1 location=(6,0) needs=r1

    [pallets]
    r1 location=(2,0)

    [goals]
    photo t1
    visit a1

    [operator-preferences]
    (preference p1 (sometime (have-photo t1 d1)))

    [assessment-preferences]   ; optional: objectives valid under the update
    [assessment-rules]
    rule fog action=take-photo cells=(4,2) (5,2) p=0.5 on-failure=action-wasted

    [hypotheses]
    hypothesis p=0.5 needs=a1:r1

    [intelligence-update]
    Free text, shown to the operator.

    [reference-constraints]
    (preference avoid (always (not (agentloc d1 v4 v2))))

The world section of a loaded scenario is immutable: updates only ever add
assessment rules, hypotheses, and preferences on top of it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

from . import assess, domain, prefs as prefs_mod
from .assess import AssessmentModel, Hypothesis, OutcomeRule
from .domain import Asset, Cell, Goal, Grid, Pallet, Target, Uav, World
from .prefs import PreferenceSet

FORMAT_HEADER = "scenario-format v1"

_SECTIONS = ("scenario", "grid", "uavs", "targets", "assets", "pallets",
             "goals", "operator-preferences", "assessment-preferences",
             "assessment-rules", "hypotheses", "intelligence-update",
             "reference-constraints")


class ScenarioFormatError(ValueError):
    """Parse failure, located by line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Scenario:
    name: str
    title: str
    world: World
    operator_preferences: PreferenceSet
    intelligence_update: str
    rules: tuple[OutcomeRule, ...]
    hypotheses: tuple[Hypothesis, ...]
    reference_constraints: PreferenceSet
    # objectives valid under the update; None means the operator preferences
    assessment_overrides: Optional[PreferenceSet] = None

    @property
    def assessment_preferences(self) -> PreferenceSet:
        if self.assessment_overrides is not None:
            return self.assessment_overrides
        return self.operator_preferences

    def assessment_model(self) -> AssessmentModel:
        return AssessmentModel(world=self.world, rules=self.rules,
                               hypotheses=self.hypotheses)

    def planning_preferences(self, constraints: Optional[PreferenceSet] = None,
                             ) -> PreferenceSet:
        """Objective handed to the planner: the pre-mission operator
        preferences plus any operator-submitted resilience constraints."""
        if constraints is None or not (constraints.preferences
                                       or constraints.orderings):
            return self.operator_preferences
        return self.operator_preferences.merged(constraints)


_CELL_RE = re.compile(r"\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)")


def _parse_cells(text: str, line: int) -> list[Cell]:
    cells = [(int(x), int(y)) for x, y in _CELL_RE.findall(text)]
    if not cells:
        raise ScenarioFormatError(f"expected cells in {text!r}", line)
    return cells


def _parse_bool(text: str, line: int) -> bool:
    if text in ("yes", "true"):
        return True
    if text in ("no", "false"):
        return False
    raise ScenarioFormatError(f"expected yes/no, got {text!r}", line)


def _split_fields(rest: str, line: int) -> dict[str, str]:
    """Split 'k1=v1 k2=v2 ...' where values may contain cell tuples with
    internal spaces, e.g. cells=(1,2) (3,4)."""
    fields: dict[str, str] = {}
    key = None
    for chunk in rest.split():
        if "=" in chunk:
            key, _, value = chunk.partition("=")
            if key in fields:
                raise ScenarioFormatError(f"duplicate field {key!r}", line)
            fields[key] = value
        elif key is not None:
            fields[key] += " " + chunk
        else:
            raise ScenarioFormatError(f"stray token {chunk!r}", line)
    return fields


def _strip_comment(line: str) -> str:
    return line.split(";", 1)[0].rstrip()


def parse_scenario(text: str) -> Scenario:
    """Parse a scenario document; raises ScenarioFormatError with the line,
    or WorldValidationError/ConstraintError for semantic violations."""
    lines = text.splitlines()
    if not lines or _strip_comment(lines[0]).strip() != FORMAT_HEADER:
        raise ScenarioFormatError(f"first line must be {FORMAT_HEADER!r}", 1)

    sections: dict[str, list[tuple[int, str]]] = {}
    current: Optional[str] = None
    for no, raw in enumerate(lines[1:], start=2):
        line = raw.rstrip()
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in _SECTIONS:
                raise ScenarioFormatError(f"unknown section {name!r}", no)
            if name in sections:
                raise ScenarioFormatError(f"duplicate section {name!r}", no)
            sections[name] = []
            current = name
            continue
        if current is None:
            if _strip_comment(line).strip():
                raise ScenarioFormatError("content before first section", no)
            continue
        sections[current].append((no, raw))

    def kv(name: str) -> dict[str, tuple[int, str]]:
        out = {}
        for no, raw in sections.get(name, []):
            line = _strip_comment(raw).strip()
            if not line:
                continue
            if "=" not in line:
                raise ScenarioFormatError(f"expected key = value", no)
            k, _, v = line.partition("=")
            out[k.strip()] = (no, v.strip())
        return out

    def entity_lines(name: str):
        for no, raw in sections.get(name, []):
            line = _strip_comment(raw).strip()
            if line:
                ident, _, rest = line.partition(" ")
                yield no, ident, _split_fields(rest, no)

    meta = kv("scenario")
    if "name" not in meta:
        raise ScenarioFormatError("scenario section must set name", 1)
    name = meta["name"][1]
    title = meta.get("title", (0, name))[1]
    horizon = int(meta.get("horizon", (0, "20"))[1])

    grid_kv = kv("grid")
    for key in ("width", "height"):
        if key not in grid_kv:
            raise ScenarioFormatError(f"grid section must set {key}", 1)
    grid = Grid(int(grid_kv["width"][1]), int(grid_kv["height"][1]))

    uavs = []
    for no, ident, fields in entity_lines("uavs"):
        if "start" not in fields:
            raise ScenarioFormatError(f"uav {ident} needs start=", no)
        uavs.append(Uav(
            id=ident,
            start=_parse_cells(fields["start"], no)[0],
            can_carry=_parse_bool(fields.get("can-carry", "yes"), no),
            operational=_parse_bool(fields.get("operational", "yes"), no),
        ))

    targets = []
    for no, ident, fields in entity_lines("targets"):
        if "trajectory" not in fields:
            raise ScenarioFormatError(f"target {ident} needs trajectory=", no)
        targets.append(Target(
            id=ident,
            trajectory=tuple(_parse_cells(fields["trajectory"], no)),
            status=fields.get("status", "unknown"),
        ))

    assets = []
    for no, ident, fields in entity_lines("assets"):
        if "location" not in fields:
            raise ScenarioFormatError(f"asset {ident} needs location=", no)
        assets.append(Asset(
            id=ident,
            location=_parse_cells(fields["location"], no)[0],
            needs_pallet=fields.get("needs"),
        ))

    pallets = []
    for no, ident, fields in entity_lines("pallets"):
        if "location" not in fields:
            raise ScenarioFormatError(f"pallet {ident} needs location=", no)
        pallets.append(Pallet(id=ident,
                              location=_parse_cells(fields["location"], no)[0]))

    goals = []
    for no, raw in sections.get("goals", []):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2 or parts[0] not in ("photo", "visit", "deliver"):
            raise ScenarioFormatError(
                "goal must be 'photo <target>' | 'visit <asset>' | "
                "'deliver <asset>'", no)
        goals.append(Goal(parts[0], parts[1]))

    world = World(grid=grid, uavs=tuple(uavs), targets=tuple(targets),
                  assets=tuple(assets), pallets=tuple(pallets),
                  horizon=horizon, mission_goals=tuple(goals))

    def pref_block(section: str) -> str:
        return "\n".join(raw for _, raw in sections.get(section, []))

    operator = prefs_mod.parse(pref_block("operator-preferences"), world)
    reference = prefs_mod.parse(pref_block("reference-constraints"), world)
    overrides = None
    if "assessment-preferences" in sections:
        overrides = prefs_mod.parse(pref_block("assessment-preferences"), world)

    rules = []
    for no, raw in sections.get("assessment-rules", []):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        if head != "rule":
            raise ScenarioFormatError("expected 'rule <name> k=v ...'", no)
        rname, _, rest = rest.strip().partition(" ")
        fields = _split_fields(rest, no)
        try:
            rules.append(OutcomeRule(
                name=rname,
                action=fields.get("action", "any"),
                uav=fields.get("uav"),
                entity=fields.get("entity"),
                cells=(frozenset(_parse_cells(fields["cells"], no))
                       if "cells" in fields else None),
                success_probability=float(fields.get("p", "0.5")),
                on_failure=fields.get("on-failure", "action-wasted"),
                stride=int(fields.get("stride", "1")),
                once=_parse_bool(fields.get("once", "no"), no),
            ))
        except assess.ModelError as exc:
            raise ScenarioFormatError(str(exc), no) from None

    hypotheses = []
    for no, raw in sections.get("hypotheses", []):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        if head != "hypothesis":
            raise ScenarioFormatError("expected 'hypothesis p=... needs=a:r ...'",
                                      no)
        fields = _split_fields(rest, no)
        needs = []
        if "needs" in fields:
            for pair in fields["needs"].split():
                asset_id, _, pallet_id = pair.partition(":")
                if not pallet_id:
                    raise ScenarioFormatError(
                        f"needs entry must be asset:pallet, got {pair!r}", no)
                needs.append((asset_id, pallet_id))
        hypotheses.append(Hypothesis(
            probability=float(fields.get("p", "1.0")),
            needs=tuple(needs),
        ))

    update_lines = [raw for _, raw in sections.get("intelligence-update", [])]
    update = "\n".join(update_lines).strip()

    scenario = Scenario(
        name=name, title=title, world=world,
        operator_preferences=operator,
        intelligence_update=update,
        rules=tuple(rules),
        hypotheses=tuple(hypotheses),
        reference_constraints=reference,
        assessment_overrides=overrides,
    )
    scenario.assessment_model()  # validates rules and hypotheses together
    return scenario


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def _fmt_cell(cell: Cell) -> str:
    return f"({cell[0]},{cell[1]})"


def _fmt_prob(p: float) -> str:
    return f"{p:g}"


def render_scenario(s: Scenario) -> str:
    """Canonical document for a scenario; parse_scenario inverts it."""
    out = [FORMAT_HEADER, ""]
    out += ["[scenario]", f"name = {s.name}", f"title = {s.title}",
            f"horizon = {s.world.horizon}", ""]
    out += ["[grid]", f"width = {s.world.grid.width}",
            f"height = {s.world.grid.height}", ""]
    out.append("[uavs]")
    for u in s.world.uavs:
        parts = [u.id, f"start={_fmt_cell(u.start)}"]
        parts.append(f"can-carry={'yes' if u.can_carry else 'no'}")
        if not u.operational:
            parts.append("operational=no")
        out.append(" ".join(parts))
    out.append("")
    if s.world.targets:
        out.append("[targets]")
        for t in s.world.targets:
            traj = " ".join(_fmt_cell(c) for c in t.trajectory)
            out.append(f"{t.id} status={t.status} trajectory={traj}")
        out.append("")
    if s.world.assets:
        out.append("[assets]")
        for a in s.world.assets:
            line = f"{a.id} location={_fmt_cell(a.location)}"
            if a.needs_pallet:
                line += f" needs={a.needs_pallet}"
            out.append(line)
        out.append("")
    if s.world.pallets:
        out.append("[pallets]")
        for p in s.world.pallets:
            out.append(f"{p.id} location={_fmt_cell(p.location)}")
        out.append("")
    if s.world.mission_goals:
        out.append("[goals]")
        for g in s.world.mission_goals:
            out.append(f"{g.kind} {g.entity}")
        out.append("")
    if s.operator_preferences.preferences or s.operator_preferences.orderings:
        out.append("[operator-preferences]")
        out.append(prefs_mod.render(s.operator_preferences).rstrip("\n"))
        out.append("")
    if s.assessment_overrides is not None:
        out.append("[assessment-preferences]")
        rendered = prefs_mod.render(s.assessment_overrides).rstrip("\n")
        if rendered:
            out.append(rendered)
        out.append("")
    if s.rules:
        out.append("[assessment-rules]")
        for r in s.rules:
            parts = [f"rule {r.name}", f"action={r.action}"]
            if r.uav:
                parts.append(f"uav={r.uav}")
            if r.entity:
                parts.append(f"entity={r.entity}")
            if r.cells:
                cells = " ".join(_fmt_cell(c) for c in sorted(r.cells))
                parts.append(f"cells={cells}")
            parts.append(f"p={_fmt_prob(r.success_probability)}")
            parts.append(f"on-failure={r.on_failure}")
            if r.stride != 1:
                parts.append(f"stride={r.stride}")
            if r.once:
                parts.append("once=yes")
            out.append(" ".join(parts))
        out.append("")
    if s.hypotheses:
        out.append("[hypotheses]")
        for h in s.hypotheses:
            line = f"hypothesis p={_fmt_prob(h.probability)}"
            if h.needs:
                line += " needs=" + " ".join(f"{a}:{p}" for a, p in h.needs)
            out.append(line)
        out.append("")
    if s.intelligence_update:
        out.append("[intelligence-update]")
        out.append(s.intelligence_update)
        out.append("")
    if s.reference_constraints.preferences or s.reference_constraints.orderings:
        out.append("[reference-constraints]")
        out.append(prefs_mod.render(s.reference_constraints).rstrip("\n"))
        out.append("")
    return "\n".join(out).rstrip("\n") + "\n"


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------

def load(path) -> Scenario:
    """Load and validate a scenario file."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read())


BUNDLED_NAMES = ("t1", "t2", "t3", "t4", "t5", "t6")


def bundled_text(name: str) -> str:
    ref = resources.files("resplan").joinpath(f"data/{name}.scenario")
    return ref.read_text(encoding="utf-8")


def bundled(name: Optional[str] = None):
    """The six bundled task reconstructions, or one of them by name."""
    if name is not None:
        if name not in BUNDLED_NAMES:
            raise KeyError(f"unknown scenario {name!r}; "
                           f"bundled: {', '.join(BUNDLED_NAMES)}")
        return parse_scenario(bundled_text(name))
    return [parse_scenario(bundled_text(n)) for n in BUNDLED_NAMES]
