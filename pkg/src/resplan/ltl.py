"""Finite-trace linear temporal logic: AST, trace semantics, progression,
and compilation to a deterministic finite-state acceptor.

Traces are finite, non-empty sequences of labels; a label is a frozenset of
atomic propositions (any hashable values). Semantics are finite-trace with a
strong Next: ``Next(f)`` is false at the last position. ``WeakNext`` is the
dual and holds there.

Three interchangeable ways to decide satisfaction are provided and are kept
deliberately independent of each other so they can cross-check:

* :func:`evaluate` - direct recursive semantics over the whole trace,
* :func:`progress` folded over the labels and finished with :func:`end_check`,
* :func:`compile` - an explicit automaton whose states are the distinct
  simplified progressions of the formula.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Hashable, Iterable, Sequence

Label = frozenset


class Formula:
    """Base class for formula AST nodes. Nodes are immutable and hashable."""

    __slots__ = ()


@dataclass(frozen=True)
class TrueF(Formula):
    def __repr__(self) -> str:
        return "true"


@dataclass(frozen=True)
class FalseF(Formula):
    def __repr__(self) -> str:
        return "false"


@dataclass(frozen=True)
class Atom(Formula):
    prop: Hashable

    def __repr__(self) -> str:
        return f"Atom({self.prop!r})"


@dataclass(frozen=True)
class Not(Formula):
    sub: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Next(Formula):
    sub: Formula


@dataclass(frozen=True)
class WeakNext(Formula):
    sub: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Release(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Eventually(Formula):
    sub: Formula


@dataclass(frozen=True)
class Always(Formula):
    sub: Formula


TRUE = TrueF()
FALSE = FalseF()


def conj(*parts: Formula) -> Formula:
    """Right-nested conjunction of ``parts`` (TRUE when empty)."""
    result: Formula = TRUE
    for p in reversed(parts):
        result = p if result is TRUE else And(p, result)
    return result


def disj(*parts: Formula) -> Formula:
    result: Formula = FALSE
    for p in reversed(parts):
        result = p if result is FALSE else Or(p, result)
    return result


def atoms(formula: Formula) -> frozenset:
    """All atomic propositions occurring in the formula."""
    found = set()
    stack = [formula]
    while stack:
        f = stack.pop()
        if isinstance(f, Atom):
            found.add(f.prop)
        elif isinstance(f, (Not, Next, WeakNext, Eventually, Always)):
            stack.append(f.sub)
        elif isinstance(f, (And, Or, Until, Release)):
            stack.append(f.left)
            stack.append(f.right)
    return frozenset(found)


def core(formula: Formula) -> Formula:
    """Rewrite derived operators into the core grammar
    (atoms, Not, And, Next, Until).

    Eventually f = Until(TRUE, f); Always f = Not(Eventually(Not f));
    Or(a, b) = Not(And(Not a, Not b)); WeakNext f = Not(Next(Not f));
    Release(a, b) = Not(Until(Not a, Not b)).
    """
    if isinstance(f := formula, (TrueF, FalseF, Atom)):
        return f
    if isinstance(f, Not):
        return Not(core(f.sub))
    if isinstance(f, And):
        return And(core(f.left), core(f.right))
    if isinstance(f, Or):
        return Not(And(Not(core(f.left)), Not(core(f.right))))
    if isinstance(f, Next):
        return Next(core(f.sub))
    if isinstance(f, WeakNext):
        return Not(Next(Not(core(f.sub))))
    if isinstance(f, Until):
        return Until(core(f.left), core(f.right))
    if isinstance(f, Release):
        return Not(Until(Not(core(f.left)), Not(core(f.right))))
    if isinstance(f, Eventually):
        return Until(TRUE, core(f.sub))
    if isinstance(f, Always):
        return Not(Until(TRUE, Not(core(f.sub))))
    raise TypeError(f"unknown formula node: {formula!r}")


def evaluate(formula: Formula, trace: Sequence[Label], position: int = 0) -> bool:
    """Finite-trace satisfaction of ``formula`` on ``trace`` at ``position``.

    Raises ValueError when the position is outside the trace.
    """
    n = len(trace)
    if not 0 <= position < n:
        raise ValueError(f"position {position} outside trace of length {n}")
    return _eval(formula, tuple(trace), position)


def _eval(f: Formula, trace: tuple, i: int) -> bool:
    n = len(trace)
    if isinstance(f, TrueF):
        return True
    if isinstance(f, FalseF):
        return False
    if isinstance(f, Atom):
        return f.prop in trace[i]
    if isinstance(f, Not):
        return not _eval(f.sub, trace, i)
    if isinstance(f, And):
        return _eval(f.left, trace, i) and _eval(f.right, trace, i)
    if isinstance(f, Or):
        return _eval(f.left, trace, i) or _eval(f.right, trace, i)
    if isinstance(f, Next):
        return i + 1 < n and _eval(f.sub, trace, i + 1)
    if isinstance(f, WeakNext):
        return i + 1 >= n or _eval(f.sub, trace, i + 1)
    if isinstance(f, Until):
        for j in range(i, n):
            if _eval(f.right, trace, j):
                return True
            if not _eval(f.left, trace, j):
                return False
        return False
    if isinstance(f, Release):
        for j in range(i, n):
            if not _eval(f.right, trace, j):
                return False
            if _eval(f.left, trace, j):
                return True
        return True
    if isinstance(f, Eventually):
        return any(_eval(f.sub, trace, j) for j in range(i, n))
    if isinstance(f, Always):
        return all(_eval(f.sub, trace, j) for j in range(i, n))
    raise TypeError(f"unknown formula node: {f!r}")


# ---------------------------------------------------------------------------
# Simplification
# ---------------------------------------------------------------------------
#
# The simplifier canonicalises formulas so that the progression closure is
# finite and small: And/Or chains are flattened, deduplicated and sorted by a
# structural key; constants are folded. Every rule preserves satisfaction on
# non-empty traces AND the end-of-trace verdict of end_check, so simplified
# residues stay exchangeable with unsimplified ones everywhere.

_NODE_RANK = {
    TrueF: 0, FalseF: 1, Atom: 2, Not: 3, And: 4, Or: 5,
    Next: 6, WeakNext: 7, Until: 8, Release: 9, Eventually: 10, Always: 11,
}


def _key(f: Formula) -> tuple:
    rank = _NODE_RANK[type(f)]
    if isinstance(f, Atom):
        return (rank, repr(f.prop))
    if isinstance(f, (TrueF, FalseF)):
        return (rank,)
    if isinstance(f, (Not, Next, WeakNext, Eventually, Always)):
        return (rank, _key(f.sub))
    return (rank, _key(f.left), _key(f.right))


def _flatten(cls: type, f: Formula) -> Iterable[Formula]:
    if isinstance(f, cls):
        yield from _flatten(cls, f.left)
        yield from _flatten(cls, f.right)
    else:
        yield f


def _rebuild(cls: type, parts: list[Formula], empty: Formula) -> Formula:
    if not parts:
        return empty
    result = parts[-1]
    for p in reversed(parts[:-1]):
        result = cls(p, result)
    return result


@lru_cache(maxsize=200_000)
def simplify(formula: Formula) -> Formula:
    """Canonical simplified form; a fixpoint of itself."""
    f = formula
    if isinstance(f, (TrueF, FalseF, Atom)):
        return f
    if isinstance(f, Not):
        s = simplify(f.sub)
        if s is TRUE or isinstance(s, TrueF):
            return FALSE
        if s is FALSE or isinstance(s, FalseF):
            return TRUE
        if isinstance(s, Not):
            return s.sub
        return Not(s)
    if isinstance(f, (And, Or)):
        cls = type(f)
        dominant = FALSE if cls is And else TRUE
        neutral = TRUE if cls is And else FALSE
        parts: list[Formula] = []
        seen = set()
        for raw in _flatten(cls, f):
            p = simplify(raw)
            for q in _flatten(cls, p):
                if isinstance(q, type(dominant)):
                    return dominant
                if isinstance(q, type(neutral)) or q in seen:
                    continue
                seen.add(q)
                parts.append(q)
        for p in parts:
            if isinstance(p, Not) and p.sub in seen:
                return dominant
        parts.sort(key=_key)
        return _rebuild(cls, parts, neutral)
    if isinstance(f, Next):
        return Next(simplify(f.sub))
    if isinstance(f, WeakNext):
        return WeakNext(simplify(f.sub))
    if isinstance(f, Until):
        left, right = simplify(f.left), simplify(f.right)
        if isinstance(right, FalseF):
            return FALSE
        if isinstance(left, TrueF):
            return simplify(Eventually(right))
        return Until(left, right)
    if isinstance(f, Release):
        left, right = simplify(f.left), simplify(f.right)
        if isinstance(right, TrueF):
            return TRUE
        if isinstance(left, FalseF):
            return simplify(Always(right))
        return Release(left, right)
    if isinstance(f, Eventually):
        s = simplify(f.sub)
        if isinstance(s, FalseF):
            return FALSE
        if isinstance(s, Eventually):
            return s
        return Eventually(s)
    if isinstance(f, Always):
        s = simplify(f.sub)
        if isinstance(s, TrueF):
            return TRUE
        if isinstance(s, Always):
            return s
        return Always(s)
    raise TypeError(f"unknown formula node: {f!r}")


# ---------------------------------------------------------------------------
# Progression
# ---------------------------------------------------------------------------

def progress(formula: Formula, label: Label) -> Formula:
    """One-step progression: the obligation left on the remaining suffix.

    For every non-empty suffix t: (label . t) satisfies ``formula`` iff t
    satisfies the returned formula. The result is simplified.
    """
    return simplify(_progress(formula, frozenset(label)))


def _progress(f: Formula, label: frozenset) -> Formula:
    if isinstance(f, (TrueF, FalseF)):
        return f
    if isinstance(f, Atom):
        return TRUE if f.prop in label else FALSE
    if isinstance(f, Not):
        return Not(_progress(f.sub, label))
    if isinstance(f, And):
        return And(_progress(f.left, label), _progress(f.right, label))
    if isinstance(f, Or):
        return Or(_progress(f.left, label), _progress(f.right, label))
    if isinstance(f, Next):
        # the residue must stay false if the trace ends right here; guard
        # with Eventually(TRUE), which holds on every non-empty suffix but
        # fails the end check
        return And(Eventually(TRUE), f.sub)
    if isinstance(f, WeakNext):
        # dual guard: Always(FALSE) is false on every non-empty suffix but
        # passes the end check
        return Or(Always(FALSE), f.sub)
    if isinstance(f, Until):
        return Or(_progress(f.right, label), And(_progress(f.left, label), f))
    if isinstance(f, Release):
        return And(_progress(f.right, label), Or(_progress(f.left, label), f))
    if isinstance(f, Eventually):
        return Or(_progress(f.sub, label), f)
    if isinstance(f, Always):
        return And(_progress(f.sub, label), f)
    raise TypeError(f"unknown formula node: {f!r}")


def end_check(formula: Formula) -> bool:
    """Whether the formula is satisfied by a trace that ends now.

    This is the acceptance test applied to a progression residue once every
    label has been consumed: pending obligations (atoms, Next, Until,
    Eventually) reject; safety residues (WeakNext, Release, Always) accept.
    """
    f = formula
    if isinstance(f, TrueF):
        return True
    if isinstance(f, (FalseF, Atom, Next, Until, Eventually)):
        return False
    if isinstance(f, Not):
        return not end_check(f.sub)
    if isinstance(f, And):
        return end_check(f.left) and end_check(f.right)
    if isinstance(f, Or):
        return end_check(f.left) or end_check(f.right)
    if isinstance(f, (WeakNext, Release, Always)):
        return True
    raise TypeError(f"unknown formula node: {f!r}")


def fold_evaluate(formula: Formula, trace: Sequence[Label]) -> bool:
    """Satisfaction decided by folding progression over the trace and
    finishing with end_check. Equivalent to :func:`evaluate` at position 0.
    """
    if not trace:
        raise ValueError("trace must be non-empty")
    residue = simplify(formula)
    for label in trace:
        residue = progress(residue, label)
    return end_check(residue)


def first_satisfaction_time(formula: Formula, trace: Sequence[Label]) -> int | None:
    """Earliest position k such that the prefix trace[0..k], taken as a
    complete trace, satisfies the formula; None when no prefix does.
    """
    residue = simplify(formula)
    for k, label in enumerate(trace):
        residue = progress(residue, label)
        if end_check(residue):
            return k
    return None


# ---------------------------------------------------------------------------
# Automaton
# ---------------------------------------------------------------------------

class AutomatonTooLargeError(RuntimeError):
    """Progression closure exceeded the configured state bound."""


class Automaton:
    """Deterministic finite-trace acceptor built by progression closure.

    Each state is itself a simplified formula: the obligation that remains
    after the labels consumed so far. Transitions are total over labels
    projected to the formula's own atoms; a run accepts when the final state
    passes end_check.
    """

    def __init__(self, states: tuple[Formula, ...], initial: int,
                 alphabet: frozenset, transitions: dict[tuple[int, frozenset], int],
                 accepting: frozenset):
        self.states = states
        self.initial = initial
        self.alphabet = alphabet
        self.transitions = transitions
        self.accepting = accepting
        self.min_steps_to_accept = self._distances()

    def _distances(self) -> tuple[float, ...]:
        # Reverse BFS from accepting states: fewest labels needed before a
        # trace ending there could be accepted. Used as a reachability filter
        # by search bounds; inf marks dead states.
        preds: dict[int, set[int]] = {i: set() for i in range(len(self.states))}
        for (src, _), dst in self.transitions.items():
            preds[dst].add(src)
        dist = [float("inf")] * len(self.states)
        frontier = sorted(self.accepting)
        for s in frontier:
            dist[s] = 0
        step = 0
        while frontier:
            step += 1
            nxt = []
            for s in frontier:
                for p in preds[s]:
                    if dist[p] == float("inf"):
                        dist[p] = step
                        nxt.append(p)
            frontier = sorted(set(nxt))
        return tuple(dist)

    def project(self, label: Label) -> frozenset:
        return frozenset(label) & self.alphabet

    def step(self, state: int, label: Label) -> int:
        return self.transitions[(state, self.project(label))]

    def is_accepting(self, state: int) -> bool:
        return state in self.accepting

    def accepts(self, trace: Sequence[Label]) -> bool:
        if not trace:
            raise ValueError("trace must be non-empty")
        state = self.initial
        for label in trace:
            state = self.step(state, label)
        return state in self.accepting

    def __len__(self) -> int:
        return len(self.states)


DEFAULT_STATE_BOUND = 10_000
_MAX_ALPHABET_ATOMS = 16


def compile(formula: Formula, state_bound: int = DEFAULT_STATE_BOUND) -> Automaton:
    """Compile a formula into a deterministic acceptor via progression closure.

    States are the distinct simplified progressions reachable from the
    formula; raises AutomatonTooLargeError when the closure exceeds
    ``state_bound`` states.
    """
    alphabet = atoms(formula)
    if len(alphabet) > _MAX_ALPHABET_ATOMS:
        raise AutomatonTooLargeError(
            f"formula has {len(alphabet)} atoms; label space 2^n exceeds "
            f"2^{_MAX_ALPHABET_ATOMS}")
    ordered_atoms = sorted(alphabet, key=repr)
    labels = [frozenset(c)
              for r in range(len(ordered_atoms) + 1)
              for c in itertools.combinations(ordered_atoms, r)]

    initial = simplify(formula)
    states: list[Formula] = [initial]
    index: dict[Formula, int] = {initial: 0}
    transitions: dict[tuple[int, frozenset], int] = {}
    frontier = [initial]
    while frontier:
        src = frontier.pop(0)
        src_i = index[src]
        for label in labels:
            dst = progress(src, label)
            if dst not in index:
                if len(states) >= state_bound:
                    raise AutomatonTooLargeError(
                        f"progression closure exceeded {state_bound} states")
                index[dst] = len(states)
                states.append(dst)
                frontier.append(dst)
            transitions[(src_i, label)] = index[dst]
    accepting = frozenset(i for i, s in enumerate(states) if end_check(s))
    return Automaton(tuple(states), 0, alphabet, transitions, accepting)


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def _render_atom(prop: Any) -> str:
    sexpr = getattr(prop, "sexpr", None)
    return sexpr() if callable(sexpr) else str(prop)

_OP_NAMES = {
    Not: "not", And: "and", Or: "or", Next: "next", WeakNext: "weak-next",
    Until: "until", Release: "release", Eventually: "eventually",
    Always: "always",
}


def render(formula: Formula) -> str:
    """Canonical s-expression rendering, used for debugging and golden tests."""
    f = formula
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, Atom):
        return _render_atom(f.prop)
    name = _OP_NAMES[type(f)]
    if isinstance(f, (Not, Next, WeakNext, Eventually, Always)):
        return f"({name} {render(f.sub)})"
    return f"({name} {render(f.left)} {render(f.right)})"
