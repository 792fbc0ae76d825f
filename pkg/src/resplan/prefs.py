"""The operator-facing constraint language.

Preferences are written as s-expressions::

    (preference p1 (sometime (have-photo t1 uav1)))
    (forall (?t - target) (preference all-photos (sometime (have-photo ?t d2))))
    (ordering p1 p2)

Six templates are supported - sometime, always, sometime-after,
sometime-before, at-most-once, at-end - over boolean combinations of the
grounded domain propositions. ``forall`` expands to one preference per entity
of the quantified type, with the entity suffixed to the name. Comments run
from ';' to end of line.

Parsing validates every atom against the world's declared entities and every
error carries a line/column location.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence

from . import domain, ltl
from .domain import Prop, World
from .ltl import (Always, And, Atom, Eventually, FALSE, Formula, Not, Or,
                  Until, WeakNext)

DEFAULT_PREFERENCE_WEIGHT = 20.0
DEFAULT_ORDERING_WEIGHT = 10.0


class ConstraintError(ValueError):
    """Parse or validation failure, located at (line, column)."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class NonGroundError(ValueError):
    """A template still contains quantifier variables."""


# ---------------------------------------------------------------------------
# S-expression reader
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SAtom:
    text: str
    line: int
    column: int


@dataclass(frozen=True)
class SList:
    items: tuple
    line: int
    column: int

    @property
    def head(self) -> str:
        if self.items and isinstance(self.items[0], SAtom):
            return self.items[0].text
        return ""


SNode = SAtom | SList


def _tokenize(text: str):
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
        elif c in " \t\r":
            col += 1
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c in "()":
            yield (c, c, line, col)
            col += 1
            i += 1
        else:
            start = i
            start_col = col
            while i < n and text[i] not in " \t\r\n();":
                i += 1
                col += 1
            yield ("sym", text[start:i], line, start_col)


def read_sexprs(text: str) -> list[SNode]:
    """Parse all top-level s-expressions, with source locations."""
    tokens = list(_tokenize(text))
    pos = 0

    def parse_one() -> SNode:
        nonlocal pos
        kind, value, line, col = tokens[pos]
        pos += 1
        if kind == "sym":
            return SAtom(value, line, col)
        if kind == "(":
            items = []
            while True:
                if pos >= len(tokens):
                    raise ConstraintError("unbalanced '('", line, col)
                if tokens[pos][0] == ")":
                    pos += 1
                    return SList(tuple(items), line, col)
                items.append(parse_one())
        raise ConstraintError("unexpected ')'", line, col)

    out = []
    while pos < len(tokens):
        out.append(parse_one())
    return out


# ---------------------------------------------------------------------------
# Templates and preference types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Sometime:
    cond: Formula


@dataclass(frozen=True)
class AlwaysTpl:
    cond: Formula


@dataclass(frozen=True)
class SometimeAfter:
    """After any state satisfying ``trigger``, ``then`` must eventually hold."""
    trigger: Formula
    then: Formula


@dataclass(frozen=True)
class SometimeBefore:
    """``first`` must occur strictly before any ``later`` state (vacuously
    satisfied when ``later`` never occurs)."""
    first: Formula
    later: Formula


@dataclass(frozen=True)
class AtMostOnce:
    cond: Formula


@dataclass(frozen=True)
class AtEnd:
    cond: Formula


PreferenceTemplate = (
    Sometime | AlwaysTpl | SometimeAfter | SometimeBefore | AtMostOnce | AtEnd)

_TEMPLATE_NAMES: dict[type, str] = {
    Sometime: "sometime", AlwaysTpl: "always", SometimeAfter: "sometime-after",
    SometimeBefore: "sometime-before", AtMostOnce: "at-most-once",
    AtEnd: "at-end",
}


@dataclass(frozen=True)
class Preference:
    name: str
    template: PreferenceTemplate
    weight: float = DEFAULT_PREFERENCE_WEIGHT


@dataclass(frozen=True)
class Ordering:
    """Reward for satisfying ``earlier`` no later than ``later``; weight of
    None defers to the scoring default."""
    earlier: str
    later: str
    weight: Optional[float] = None


@dataclass(frozen=True)
class PreferenceSet:
    preferences: tuple[Preference, ...] = ()
    orderings: tuple[Ordering, ...] = ()

    @classmethod
    def empty(cls) -> "PreferenceSet":
        return cls()

    def __len__(self) -> int:
        return len(self.preferences)

    def names(self) -> list[str]:
        return [p.name for p in self.preferences]

    def by_name(self, name: str) -> Preference:
        for p in self.preferences:
            if p.name == name:
                return p
        raise KeyError(name)

    def merged(self, other: "PreferenceSet") -> "PreferenceSet":
        clash = set(self.names()) & set(other.names())
        if clash:
            raise ValueError(f"duplicate preference names on merge: {sorted(clash)}")
        return PreferenceSet(self.preferences + other.preferences,
                             self.orderings + other.orderings)


# ---------------------------------------------------------------------------
# Atom grammar: predicate name -> argument slot types
# ---------------------------------------------------------------------------

_SLOT_TYPES: dict[str, tuple[str, ...]] = {
    "agentloc": ("uav", "coord", "coord"),
    "have-photo": ("target", "uav"),
    "visited": ("asset", "uav"),
    "carry-pallet": ("pallet", "uav"),
    "delivered": ("pallet", "asset"),
    "t-eq": ("int",),
}

_ENTITY_TYPES = ("uav", "target", "asset", "pallet")


def _entities(world: World, etype: str) -> list[str]:
    group = {"uav": world.uavs, "target": world.targets,
             "asset": world.assets, "pallet": world.pallets}[etype]
    return [e.id for e in group]


def _parse_coord(token: SAtom) -> int:
    text = token.text
    if text.startswith("v"):
        text = text[1:]
    try:
        return int(text)
    except ValueError:
        raise ConstraintError(f"expected coordinate, got {token.text!r}",
                              token.line, token.column) from None


def _parse_atom(node: SNode, world: World, vars_: Mapping[str, str]) -> Atom:
    if not isinstance(node, SList) or not node.items:
        line, col = (node.line, node.column)
        raise ConstraintError("expected a proposition", line, col)
    head = node.items[0]
    if not isinstance(head, SAtom):
        raise ConstraintError("expected a predicate name", node.line, node.column)
    pred = head.text
    slots = _SLOT_TYPES.get(pred)
    if slots is None:
        raise ConstraintError(f"unknown predicate {pred!r}", head.line, head.column)
    args = node.items[1:]
    if len(args) != len(slots):
        raise ConstraintError(
            f"{pred} takes {len(slots)} arguments, got {len(args)}",
            node.line, node.column)
    values: list = []
    for arg, slot in zip(args, slots):
        if not isinstance(arg, SAtom):
            raise ConstraintError("nested expression in argument position",
                                  arg.line, arg.column)
        if arg.text.startswith("?"):
            declared = vars_.get(arg.text)
            if declared is None:
                raise ConstraintError(f"unbound variable {arg.text}",
                                      arg.line, arg.column)
            if declared != slot:
                raise ConstraintError(
                    f"variable {arg.text} has type {declared}, slot needs {slot}",
                    arg.line, arg.column)
            values.append(arg.text)
        elif slot == "coord":
            x = _parse_coord(arg)
            values.append(x)
        elif slot == "int":
            try:
                values.append(int(arg.text))
            except ValueError:
                raise ConstraintError(f"expected integer, got {arg.text!r}",
                                      arg.line, arg.column) from None
        else:
            if arg.text not in _entities(world, slot):
                raise ConstraintError(
                    f"unknown {slot} {arg.text!r}", arg.line, arg.column)
            values.append(arg.text)
    if pred == "agentloc" and all(isinstance(v, int) for v in values[1:]):
        cell = (values[1], values[2])
        if not world.grid.contains(cell):
            raise ConstraintError(f"cell {cell} outside grid",
                                  node.line, node.column)
    return Atom(Prop(pred, tuple(values)))


def _parse_cond(node: SNode, world: World, vars_: Mapping[str, str]) -> Formula:
    if isinstance(node, SAtom):
        if node.text == "true":
            return ltl.TRUE
        if node.text == "false":
            return ltl.FALSE
        raise ConstraintError(f"expected a condition, got {node.text!r}",
                              node.line, node.column)
    head = node.head
    if head in ("and", "or"):
        cls = And if head == "and" else Or
        build = ltl.conj if head == "and" else ltl.disj
        # flatten nested chains of the same operator so association is
        # canonical and render/parse round-trips structurally
        parts: list[Formula] = []
        for item in node.items[1:]:
            sub = _parse_cond(item, world, vars_)
            parts.extend(ltl._flatten(cls, sub))
        return build(*parts)
    if head == "not":
        if len(node.items) != 2:
            raise ConstraintError("not takes one argument", node.line, node.column)
        return Not(_parse_cond(node.items[1], world, vars_))
    return _parse_atom(node, world, vars_)


def _parse_template(node: SNode, world: World,
                    vars_: Mapping[str, str]) -> PreferenceTemplate:
    if not isinstance(node, SList) or not node.items:
        line = getattr(node, "line", 1)
        col = getattr(node, "column", 1)
        raise ConstraintError("expected a template expression", line, col)
    head = node.head
    unary = {"sometime": Sometime, "always": AlwaysTpl,
             "at-most-once": AtMostOnce, "at-end": AtEnd}
    binary = {"sometime-after": SometimeAfter, "sometime-before": SometimeBefore}
    if head in unary:
        if len(node.items) != 2:
            raise ConstraintError(f"{head} takes one condition",
                                  node.line, node.column)
        return unary[head](_parse_cond(node.items[1], world, vars_))
    if head in binary:
        if len(node.items) != 3:
            raise ConstraintError(f"{head} takes two conditions",
                                  node.line, node.column)
        return binary[head](_parse_cond(node.items[1], world, vars_),
                            _parse_cond(node.items[2], world, vars_))
    raise ConstraintError(f"unknown template {head!r}", node.line, node.column)


# ---------------------------------------------------------------------------
# parse / render
# ---------------------------------------------------------------------------

def _parse_weight(node: SAtom) -> float:
    try:
        w = float(node.text)
    except ValueError:
        raise ConstraintError(f"expected a weight, got {node.text!r}",
                              node.line, node.column) from None
    if w < 0:
        raise ConstraintError("weights must be nonnegative", node.line, node.column)
    return w


def _substitute(f: Formula, binding: dict[str, str]) -> Formula:
    if isinstance(f, Atom):
        args = tuple(binding.get(a, a) if isinstance(a, str) else a
                     for a in f.prop.args)
        return Atom(Prop(f.prop.name, args))
    if isinstance(f, Not):
        return Not(_substitute(f.sub, binding))
    if isinstance(f, And):
        return And(_substitute(f.left, binding), _substitute(f.right, binding))
    if isinstance(f, Or):
        return Or(_substitute(f.left, binding), _substitute(f.right, binding))
    return f


def _substitute_template(tpl: PreferenceTemplate,
                         binding: dict[str, str]) -> PreferenceTemplate:
    if isinstance(tpl, (Sometime, AlwaysTpl, AtMostOnce, AtEnd)):
        return type(tpl)(_substitute(tpl.cond, binding))
    return type(tpl)(_substitute(tpl.trigger if isinstance(tpl, SometimeAfter)
                                 else tpl.first, binding),
                     _substitute(tpl.then if isinstance(tpl, SometimeAfter)
                                 else tpl.later, binding))


def parse(text: str, world: World) -> PreferenceSet:
    """Parse a constraint document against a world.

    Accepts ``(preference name template [weight])``, a single-variable
    ``(forall (?v - type) (preference ...))`` which grounds to one preference
    per entity with suffixed names, and ``(ordering earlier later [weight])``.
    """
    prefs: list[Preference] = []
    orderings: list[tuple[Ordering, SList]] = []
    names: dict[str, tuple[int, int]] = {}

    def add_pref(p: Preference, node: SList):
        if p.name in names:
            raise ConstraintError(f"duplicate preference name {p.name!r}",
                                  node.line, node.column)
        names[p.name] = (node.line, node.column)
        prefs.append(p)

    for node in read_sexprs(text):
        if not isinstance(node, SList):
            raise ConstraintError(f"unexpected token {node.text!r}",
                                  node.line, node.column)
        head = node.head
        if head == "preference":
            add_pref(_parse_preference(node, world, {}), node)
        elif head == "forall":
            for p in _parse_forall(node, world):
                add_pref(p, node)
        elif head == "ordering":
            if len(node.items) not in (3, 4):
                raise ConstraintError("ordering takes two preference names",
                                      node.line, node.column)
            a, b = node.items[1], node.items[2]
            if not isinstance(a, SAtom) or not isinstance(b, SAtom):
                raise ConstraintError("ordering arguments must be names",
                                      node.line, node.column)
            weight = (_parse_weight(node.items[3])
                      if len(node.items) == 4 else None)
            orderings.append((Ordering(a.text, b.text, weight), node))
        else:
            raise ConstraintError(
                f"expected preference, forall or ordering, got {head!r}",
                node.line, node.column)

    for ordering, node in orderings:
        for ref in (ordering.earlier, ordering.later):
            if ref not in names:
                raise ConstraintError(f"ordering references unknown "
                                      f"preference {ref!r}",
                                      node.line, node.column)
        if ordering.earlier == ordering.later:
            raise ConstraintError("ordering pairs a preference with itself",
                                  node.line, node.column)
    return PreferenceSet(tuple(prefs), tuple(o for o, _ in orderings))


def _parse_preference(node: SList, world: World,
                      vars_: Mapping[str, str]) -> Preference:
    if len(node.items) not in (3, 4) or not isinstance(node.items[1], SAtom):
        raise ConstraintError("expected (preference name template [weight])",
                              node.line, node.column)
    name = node.items[1].text
    template = _parse_template(node.items[2], world, vars_)
    weight = (_parse_weight(node.items[3]) if len(node.items) == 4
              else DEFAULT_PREFERENCE_WEIGHT)
    return Preference(name, template, weight)


def _parse_forall(node: SList, world: World) -> list[Preference]:
    if len(node.items) != 3:
        raise ConstraintError("expected (forall (?v - type) (preference ...))",
                              node.line, node.column)
    binder = node.items[1]
    if (not isinstance(binder, SList) or len(binder.items) != 3
            or not isinstance(binder.items[0], SAtom)
            or not binder.items[0].text.startswith("?")
            or not isinstance(binder.items[1], SAtom)
            or binder.items[1].text != "-"):
        raise ConstraintError("binder must look like (?v - type)",
                              node.line, node.column)
    var = binder.items[0].text
    type_tok = binder.items[2]
    etype = type_tok.text.rstrip("s") if isinstance(type_tok, SAtom) else ""
    if etype not in _ENTITY_TYPES:
        raise ConstraintError(f"unknown entity type {type_tok.text!r}",
                              type_tok.line, type_tok.column)
    inner = node.items[2]
    if not isinstance(inner, SList) or inner.head != "preference":
        raise ConstraintError("forall body must be a preference",
                              node.line, node.column)
    proto = _parse_preference(inner, world, {var: etype})
    out = []
    for entity in _entities(world, etype):
        out.append(Preference(
            name=f"{proto.name}-{entity}",
            template=_substitute_template(proto.template, {var: entity}),
            weight=proto.weight,
        ))
    if not out:
        raise ConstraintError(f"no entities of type {etype!r} to ground over",
                              node.line, node.column)
    return out


def render_cond(f: Formula) -> str:
    if isinstance(f, ltl.TrueF):
        return "true"
    if isinstance(f, ltl.FalseF):
        return "false"
    if isinstance(f, Atom):
        return f.prop.sexpr()
    if isinstance(f, Not):
        return f"(not {render_cond(f.sub)})"
    if isinstance(f, And):
        parts = list(ltl._flatten(And, f))
        return "(and " + " ".join(render_cond(p) for p in parts) + ")"
    if isinstance(f, Or):
        parts = list(ltl._flatten(Or, f))
        return "(or " + " ".join(render_cond(p) for p in parts) + ")"
    raise ValueError(f"not a boolean condition: {f!r}")


def render_template(tpl: PreferenceTemplate) -> str:
    name = _TEMPLATE_NAMES[type(tpl)]
    if isinstance(tpl, (Sometime, AlwaysTpl, AtMostOnce, AtEnd)):
        return f"({name} {render_cond(tpl.cond)})"
    if isinstance(tpl, SometimeAfter):
        return f"({name} {render_cond(tpl.trigger)} {render_cond(tpl.then)})"
    return f"({name} {render_cond(tpl.first)} {render_cond(tpl.later)})"


def render(pset: PreferenceSet) -> str:
    """Canonical text form; parse(render(s), world) reproduces s."""
    lines = []
    for p in pset.preferences:
        weight = ("" if p.weight == DEFAULT_PREFERENCE_WEIGHT
                  else f" {_fmt_weight(p.weight)}")
        lines.append(f"(preference {p.name} {render_template(p.template)}{weight})")
    for o in pset.orderings:
        weight = "" if o.weight is None else f" {_fmt_weight(o.weight)}"
        lines.append(f"(ordering {o.earlier} {o.later}{weight})")
    return "\n".join(lines) + ("\n" if lines else "")


def _fmt_weight(w: float) -> str:
    return str(int(w)) if float(w).is_integer() else repr(w)


# ---------------------------------------------------------------------------
# Lowering to temporal formulas
# ---------------------------------------------------------------------------

def _check_ground(tpl: PreferenceTemplate) -> None:
    conds = ([tpl.cond] if isinstance(tpl, (Sometime, AlwaysTpl, AtMostOnce, AtEnd))
             else [tpl.trigger, tpl.then] if isinstance(tpl, SometimeAfter)
             else [tpl.first, tpl.later])
    for cond in conds:
        for prop in ltl.atoms(cond):
            args = getattr(prop, "args", ())
            if any(isinstance(a, str) and a.startswith("?") for a in args):
                raise NonGroundError(f"template contains variable in {prop.sexpr()}")


def lower(template: PreferenceTemplate) -> Formula:
    """Lower a ground template to its temporal formula.

    sometime(f) -> Eventually f; always(f) -> Always f;
    sometime-after(f, g) -> Always(f -> Eventually g);
    sometime-before(f, g) -> Always(not g) or (not g Until (f and not g));
    at-most-once(f) -> Always(f -> (f holds until it stops for good));
    at-end(f) -> Eventually(f and no-next-state).
    """
    _check_ground(template)
    if isinstance(template, Sometime):
        return Eventually(template.cond)
    if isinstance(template, AlwaysTpl):
        return Always(template.cond)
    if isinstance(template, SometimeAfter):
        return Always(Or(Not(template.trigger), Eventually(template.then)))
    if isinstance(template, SometimeBefore):
        f, g = template.first, template.later
        return Or(Always(Not(g)), Until(Not(g), And(f, Not(g))))
    if isinstance(template, AtMostOnce):
        f = template.cond
        weak_until = Or(Until(f, Always(Not(f))), Always(f))
        return Always(Or(Not(f), weak_until))
    if isinstance(template, AtEnd):
        return Eventually(And(template.cond, WeakNext(FALSE)))
    raise TypeError(f"unknown template {template!r}")


def lowered(pref: Preference) -> Formula:
    return lower(pref.template)


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

CONTROL = "control"
DECLARATIVE = "declarative"


def _template_conds(tpl: PreferenceTemplate) -> list[Formula]:
    if isinstance(tpl, (Sometime, AlwaysTpl, AtMostOnce, AtEnd)):
        return [tpl.cond]
    if isinstance(tpl, SometimeAfter):
        return [tpl.trigger, tpl.then]
    return [tpl.first, tpl.later]


def classify(pref: Preference) -> str:
    """Classify a preference as a control or declarative constraint.

    Rule: a preference is *control* when it commands vehicle placement -
    either every atom is an agentloc fact, or it is a two-condition template
    whose leading condition mentions a location (behaviour sequenced on
    reaching specific cells). Everything property-directed (photos, visits,
    deliveries, carrying) is *declarative*.
    """
    conds = _template_conds(pref.template)
    all_props = [p for c in conds for p in ltl.atoms(c)]
    if all_props and all(p.name == "agentloc" for p in all_props):
        return CONTROL
    if isinstance(pref.template, (SometimeAfter, SometimeBefore)):
        leading = conds[0]
        if any(p.name == "agentloc" for p in ltl.atoms(leading)):
            return CONTROL
    return DECLARATIVE


# ---------------------------------------------------------------------------
# Ordering score
# ---------------------------------------------------------------------------

def score_orderings(pset: PreferenceSet,
                    satisfaction_times: Mapping[str, Optional[int]],
                    default_weight: float = DEFAULT_ORDERING_WEIGHT) -> float:
    """Total ordering reward: each (earlier, later) pair scores its weight
    when both preferences are satisfied and earlier's first satisfaction is
    no later than later's (ties count as preserved). Pairs with an
    unsatisfied member score 0. Unknown names raise KeyError.
    """
    declared = set(pset.names())
    total = 0.0
    for o in pset.orderings:
        for ref in (o.earlier, o.later):
            if ref not in declared:
                raise KeyError(f"ordering references unknown preference {ref!r}")
        ta = satisfaction_times.get(o.earlier)
        tb = satisfaction_times.get(o.later)
        if ta is not None and tb is not None and ta <= tb:
            total += o.weight if o.weight is not None else default_weight
    return total
