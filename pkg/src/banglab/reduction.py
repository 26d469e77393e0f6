"""Rewriting at a distance: redexes, surface/full reduction, clashes,
normal-form classification, and joinability checks.

The three rules, each tolerating a stack L of interposed closures:

    L<\\x.t> u   -->dB  L<t[x<-u]>        (beta at a distance)
    t[x<-L<!u>] -->s!  L<t{x:=u}>        (substitution fires on a bang)
    der L<!t>   -->d!  L<t>              (dereliction opens a bang)

Surface reduction closes the rules under all contexts except under a
bang; full reduction has no restriction.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .syntax import (Abs, App, Bang, Der, Idx, Position, Sub, Term, Var,
                     peel_subs, rebuild_subs, replace_at, shift_free,
                     subst_bound)

SURFACE = "surface"
FULL = "full"


class Rule(Enum):
    DB = "dB"
    SBANG = "s!"
    DBANG = "d!"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Redex:
    """A rule occurrence: root-to-redex path plus the local contractum."""

    position: Position
    rule: Rule
    contractum: Term


def contract(t: Term) -> Optional[tuple[Rule, Term]]:
    """Contract the redex rooted exactly at t, if any."""
    match t:
        case App(fun, arg):
            spine, core = peel_subs(fun)
            if isinstance(core, Abs):
                inner = Sub(core.hint, core.body, shift_free(arg, len(spine)))
                return Rule.DB, rebuild_subs(spine, inner)
        case Sub(_, body, arg):
            spine, core = peel_subs(arg)
            if isinstance(core, Bang):
                new = subst_bound(body, core.inner, len(spine))
                return Rule.SBANG, rebuild_subs(spine, new)
        case Der(arg):
            spine, core = peel_subs(arg)
            if isinstance(core, Bang):
                return Rule.DBANG, rebuild_subs(spine, core.inner)
    return None


def redexes(t: Term, closure: str = SURFACE) -> list[Redex]:
    """All redexes legal under the closure, in leftmost-outermost order."""
    out: list[Redex] = []
    under_bang_ok = closure == FULL

    def walk(t: Term, pos: tuple[int, ...]):
        hit = contract(t)
        if hit is not None:
            out.append(Redex(pos, hit[0], hit[1]))
        match t:
            case Abs(_, body):
                walk(body, pos + (0,))
            case App(fun, arg):
                walk(fun, pos + (0,))
                walk(arg, pos + (1,))
            case Sub(_, body, arg):
                walk(body, pos + (0,))
                walk(arg, pos + (1,))
            case Der(inner):
                walk(inner, pos + (0,))
            case Bang(inner):
                if under_bang_ok:
                    walk(inner, pos + (0,))

    walk(t, ())
    out.sort(key=lambda r: r.position)
    return out


def apply_redex(t: Term, r: Redex) -> Term:
    return replace_at(t, r.position, r.contractum)


def step(t: Term, closure: str = SURFACE, policy="leftmost-outermost") -> Optional[Term]:
    """One reduction step; None iff t is normal for the closure.

    policy is "leftmost-outermost" or an integer index into redexes(t).
    """
    rs = redexes(t, closure)
    if not rs:
        return None
    if policy == "leftmost-outermost":
        return apply_redex(t, rs[0])
    return apply_redex(t, rs[policy])


@dataclass(frozen=True)
class ReduceOutcome:
    status: str  # "normalized" | "fuel-exhausted"
    term: Term
    steps: int
    trace: tuple[tuple[Rule, Position, Term], ...] = ()

    @property
    def normalized(self) -> bool:
        return self.status == "normalized"


def normalize(t: Term, closure: str = SURFACE, fuel: int = 1000,
              keep_trace: bool = False) -> ReduceOutcome:
    """Iterate leftmost-outermost steps until normal or out of fuel."""
    trace: list[tuple[Rule, Position, Term]] = []
    steps = 0
    while steps < fuel:
        rs = redexes(t, closure)
        if not rs:
            return ReduceOutcome("normalized", t, steps, tuple(trace))
        r = rs[0]
        t = apply_redex(t, r)
        steps += 1
        if keep_trace:
            trace.append((r.rule, r.position, t))
    if not redexes(t, closure):
        return ReduceOutcome("normalized", t, steps, tuple(trace))
    return ReduceOutcome("fuel-exhausted", t, steps, tuple(trace))


def reducts(t: Term, closure: str = SURFACE) -> list[Term]:
    """All one-step reducts under the closure (deduplicated, ordered)."""
    seen = []
    met = set()
    for r in redexes(t, closure):
        u = apply_redex(t, r)
        if u not in met:
            met.add(u)
            seen.append(u)
    return seen


# ---------------------------------------------------------------------------
# Rule-fragment reducts (for the rewriting-diagram suites)

DB_DBANG = frozenset((Rule.DB, Rule.DBANG))
SBANG_ONLY = frozenset((Rule.SBANG,))


def restricted_step(t: Term, fragment: frozenset[Rule]) -> list[Term]:
    """Full-closure one-step reducts restricted to a rule fragment."""
    out: list[Term] = []

    def walk(t: Term) -> list[Term]:
        alts: list[Term] = []
        hit = contract(t)
        if hit is not None and hit[0] in fragment:
            alts.append(hit[1])
        match t:
            case Abs(h, body):
                alts += [Abs(h, b) for b in walk(body)]
            case App(fun, arg):
                alts += [App(f, arg) for f in walk(fun)]
                alts += [App(fun, a) for a in walk(arg)]
            case Sub(h, body, arg):
                alts += [Sub(h, b, arg) for b in walk(body)]
                alts += [Sub(h, body, a) for a in walk(arg)]
            case Bang(inner):
                alts += [Bang(i) for i in walk(inner)]
            case Der(inner):
                alts += [Der(i) for i in walk(inner)]
        return alts

    met = set()
    for u in walk(t):
        if u not in met:
            met.add(u)
            out.append(u)
    return out


# ---------------------------------------------------------------------------
# Clashes

_CLASH_SHAPES = ("bang-applied", "abs-substituted", "der-of-abs", "arg-abs-under-non-abs")


def _clash_shapes_at(t: Term) -> list[str]:
    found = []
    match t:
        case App(fun, arg):
            _, fcore = peel_subs(fun)
            if isinstance(fcore, Bang):
                found.append("bang-applied")
            _, acore = peel_subs(arg)
            if isinstance(acore, Abs) and not isinstance(fcore, Abs):
                found.append("arg-abs-under-non-abs")
        case Sub(_, _, arg):
            _, acore = peel_subs(arg)
            if isinstance(acore, Abs):
                found.append("abs-substituted")
        case Der(inner):
            _, icore = peel_subs(inner)
            if isinstance(icore, Abs):
                found.append("der-of-abs")
    return found


def static_clashes(t: Term, closure: str = SURFACE) -> list[tuple[Position, str]]:
    """Positions (legal under the closure) matching one of the four
    ill-formed stuck shapes."""
    out: list[tuple[Position, str]] = []
    under_bang_ok = closure == FULL

    def walk(t: Term, pos: tuple[int, ...]):
        for shape in _clash_shapes_at(t):
            out.append((pos, shape))
        match t:
            case Abs(_, body):
                walk(body, pos + (0,))
            case App(fun, arg):
                walk(fun, pos + (0,))
                walk(arg, pos + (1,))
            case Sub(_, body, arg):
                walk(body, pos + (0,))
                walk(arg, pos + (1,))
            case Der(inner):
                walk(inner, pos + (0,))
            case Bang(inner):
                if under_bang_ok:
                    walk(inner, pos + (0,))

    walk(t, ())
    return out


# ---------------------------------------------------------------------------
# Surface-normal-form grammar

class NfClass(Enum):
    NE_S = "ne"          # neutral: variable-headed
    NA_S = "na"          # argument-position normal forms
    NB_S = "nb"          # abstraction-position normal forms
    NO_S = "no"          # na | nb (exposed by classify for ne terms' union)
    NOT_NORMAL = "not-normal"
    CLASH_NF = "clash-nf"

    @property
    def in_no_s(self) -> bool:
        return self in (NfClass.NE_S, NfClass.NA_S, NfClass.NB_S, NfClass.NO_S)


def _grammar_flags(t: Term) -> tuple[bool, bool, bool]:
    """(ne, na, nb) membership in the surface clash-free NF grammar."""
    match t:
        case Var() | Idx():
            return True, True, True
        case App(fun, arg):
            fne, _, _ = _grammar_flags(fun)
            _, ana, _ = _grammar_flags(arg)
            ok = fne and ana
            return ok, ok, ok
        case Der(inner):
            ine, _, _ = _grammar_flags(inner)
            return ine, ine, ine
        case Bang(_):
            return False, True, False
        case Abs(_, body):
            _, bna, bnb = _grammar_flags(body)
            ok = bna or bnb
            return False, False, ok
        case Sub(_, body, arg):
            ane, _, _ = _grammar_flags(arg)
            if not ane:
                return False, False, False
            bne, bna, bnb = _grammar_flags(body)
            return bne, bna, bnb
    raise TypeError(t)


def classify(t: Term) -> NfClass:
    """Surface classification per the clash-free NF grammar."""
    if redexes(t, SURFACE):
        return NfClass.NOT_NORMAL
    ne, na, nb = _grammar_flags(t)
    if ne:
        return NfClass.NE_S
    if na:
        return NfClass.NA_S
    if nb:
        return NfClass.NB_S
    return NfClass.CLASH_NF


# ---------------------------------------------------------------------------
# Dynamic clash-freeness and joinability

YES, NO, UNKNOWN = "yes", "no", "unknown"


@dataclass(frozen=True)
class ClashFreeReport:
    verdict: str
    witness: Optional[tuple[Term, tuple[Position, str]]] = None  # offending reduct


def clash_free(t: Term, closure: str = SURFACE, fuel: int = 1000) -> ClashFreeReport:
    """Does no reduct of t (under the closure) exhibit a clash?

    Clashes are stable under reduction, so inspecting the normalization
    path and its endpoint decides; divergence within fuel gives Unknown
    unless a clash already appeared en route.
    """
    current = t
    for _ in range(fuel):
        cs = static_clashes(current, closure)
        if cs:
            return ClashFreeReport(NO, (current, cs[0]))
        nxt = step(current, closure)
        if nxt is None:
            return ClashFreeReport(YES)
        current = nxt
    cs = static_clashes(current, closure)
    if cs:
        return ClashFreeReport(NO, (current, cs[0]))
    return ClashFreeReport(UNKNOWN)


def joinable(u1: Term, u2: Term, closure: str = SURFACE, fuel: int = 6) -> bool:
    """Breadth-bounded search for a common reduct of u1 and u2."""
    front1, front2 = {u1}, {u2}
    seen1, seen2 = set(front1), set(front2)
    for _ in range(fuel + 1):
        if seen1 & seen2:
            return True
        front1 = {v for u in front1 for v in reducts(u, closure)} - seen1
        front2 = {v for u in front2 for v in reducts(u, closure)} - seen2
        if not front1 and not front2:
            break
        seen1 |= front1
        seen2 |= front2
    return bool(seen1 & seen2)
