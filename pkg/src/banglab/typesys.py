"""Non-idempotent intersection types and the three typing systems.

Types are type variables, finite multisets of types (multitypes), and
arrows from a multitype to a type.  Multitype elements are kept in a
canonical total order (variables before multitypes before arrows), so
multiset equality is plain structural equality.

Three systems share the type language:

  B  -- the bang calculus: var/app/abs/es plus bang (gathering a multiset
        of typings of the same subterm) and der (demanding a singleton).
  N  -- call-by-name: app/es take an indexed family of premises typing
        the one argument, aligned with the arrow's domain multiset.
  V  -- call-by-value: variables are typed with whole multitypes, and
        abstraction gathers a multiset of arrows from a premise family.

Bounded enumeration: the nondeterministic choices in a derivation are
the axiom types and the family sizes.  Bounds fix the axiom-type
universe (depth `depth`, variables from a pool of `pool` names) and cap
every formed multiset at `card` elements; everything else is determined
by the subject term, so the enumerated set is finite and complete
relative to those choices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Optional, Sequence

from . import reduction
from .syntax import (Abs, App, Bang, Der, Idx, Sub, Term, Var, free_vars,
                     open_var)

B, N, V = "B", "N", "V"


# ---------------------------------------------------------------------------
# Types


class Type:
    __slots__ = ()

    def __str__(self) -> str:
        return print_type(self)


@dataclass(frozen=True, slots=True)
class TVar(Type):
    name: str


@dataclass(frozen=True, slots=True)
class Multi(Type):
    elems: tuple[Type, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "elems", tuple(sorted(self.elems, key=_key)))

    def __len__(self):
        return len(self.elems)


@dataclass(frozen=True, slots=True)
class Arrow(Type):
    dom: Multi
    cod: Type


def _key(t: Type):
    match t:
        case TVar(name):
            return (0, name)
        case Multi(elems):
            return (1, tuple(_key(e) for e in elems))
        case Arrow(dom, cod):
            return (2, _key(dom), _key(cod))
    raise TypeError(t)


EMPTY_MULTI = Multi(())


def multi(*elems: Type) -> Multi:
    return Multi(tuple(elems))


def arrow(*types: Type) -> Type:
    """Right-associated arrow chain: arrow(M1, M2, sigma) = M1 -> M2 -> sigma."""
    *doms, cod = types
    for d in reversed(doms):
        if not isinstance(d, Multi):
            raise TypeError("arrow domain must be a multitype")
        cod = Arrow(d, cod)
    return cod


def type_vars(t: Type) -> frozenset[str]:
    match t:
        case TVar(name):
            return frozenset((name,))
        case Multi(elems):
            return frozenset().union(*(type_vars(e) for e in elems)) if elems else frozenset()
        case Arrow(dom, cod):
            return type_vars(dom) | type_vars(cod)
    raise TypeError(t)


def rename_tvars(t: Type, mapping: dict[str, str]) -> Type:
    match t:
        case TVar(name):
            return TVar(mapping.get(name, name))
        case Multi(elems):
            return Multi(tuple(rename_tvars(e, mapping) for e in elems))
        case Arrow(dom, cod):
            return Arrow(rename_tvars(dom, mapping), rename_tvars(cod, mapping))
    raise TypeError(t)


# ---------------------------------------------------------------------------
# Type concrete syntax:  T := ident | M | M -> T ;  M := '[' (T (',' T)*)? ']'


def parse_type(src: str) -> Type:
    toks = _type_tokens(src)
    ty, pos = _parse_arrow(toks, 0)
    if toks[pos][0] != "eof":
        raise ValueError(f"trailing input in type: {src!r}")
    return ty


def _type_tokens(src: str) -> list[tuple[str, str]]:
    toks = []
    i = 0
    while i < len(src):
        c = src[i]
        if c.isspace():
            i += 1
        elif c in "[],":
            toks.append((c, c))
            i += 1
        elif src.startswith("->", i):
            toks.append(("->", "->"))
            i += 2
        elif c.isalpha() or c == "_":
            j = i
            while j < len(src) and (src[j].isalnum() or src[j] in "_'"):
                j += 1
            toks.append(("ident", src[i:j]))
            i = j
        else:
            raise ValueError(f"unexpected character {c!r} in type")
    toks.append(("eof", ""))
    return toks


def _parse_arrow(toks, pos):
    left, pos = _parse_atom_ty(toks, pos)
    if toks[pos][0] == "->":
        if not isinstance(left, Multi):
            raise ValueError("arrow domain must be a multitype")
        right, pos = _parse_arrow(toks, pos + 1)
        return Arrow(left, right), pos
    return left, pos


def _parse_atom_ty(toks, pos):
    kind, val = toks[pos]
    if kind == "ident":
        return TVar(val), pos + 1
    if kind == "[":
        pos += 1
        elems = []
        if toks[pos][0] != "]":
            while True:
                ty, pos = _parse_arrow(toks, pos)
                elems.append(ty)
                if toks[pos][0] == ",":
                    pos += 1
                else:
                    break
        if toks[pos][0] != "]":
            raise ValueError("expected ']' in multitype")
        return Multi(tuple(elems)), pos + 1
    raise ValueError(f"unexpected {val!r} in type")


def print_type(t: Type) -> str:
    match t:
        case TVar(name):
            return name
        case Multi(elems):
            return "[" + ", ".join(print_type(e) for e in elems) + "]"
        case Arrow(dom, cod):
            return f"{print_type(dom)} -> {print_type(cod)}"
    raise TypeError(t)


# ---------------------------------------------------------------------------
# Environments


@dataclass(frozen=True, slots=True)
class Env:
    """Finite map from variable names to multitypes; empty bindings dropped."""

    items: tuple[tuple[str, Multi], ...] = ()

    def __post_init__(self):
        cleaned = tuple(sorted((n, m) for n, m in self.items if m.elems))
        object.__setattr__(self, "items", cleaned)

    @staticmethod
    def of(mapping: dict[str, Multi]) -> "Env":
        return Env(tuple(mapping.items()))

    def get(self, name: str) -> Multi:
        for n, m in self.items:
            if n == name:
                return m
        return EMPTY_MULTI

    def domain(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.items)

    def image(self) -> tuple[Multi, ...]:
        return tuple(m for _, m in self.items)

    def without(self, name: str) -> "Env":
        return Env(tuple((n, m) for n, m in self.items if n != name))

    def add(self, name: str, m: Multi) -> "Env":
        merged = dict(self.items)
        merged[name] = Multi(merged.get(name, EMPTY_MULTI).elems + m.elems)
        return Env.of(merged)

    def __str__(self):
        return ", ".join(f"{n}: {print_type(m)}" for n, m in self.items) or "{}"


EMPTY_ENV = Env()


def env_sum(envs: Sequence[Env]) -> Env:
    """Pointwise multiset union; the empty list gives the empty env."""
    merged: dict[str, tuple[Type, ...]] = {}
    for e in envs:
        for n, m in e.items:
            merged[n] = merged.get(n, ()) + m.elems
    return Env(tuple((n, Multi(es)) for n, es in merged.items()))


def max_env_card(e: Env) -> int:
    return max((len(m) for _, m in e.items), default=0)


# ---------------------------------------------------------------------------
# Observable types and argument multitypes


def observable(sys: str, t: Type) -> bool:
    """Types of observable terms: all multitypes in B and V; identity
    types [sigma] -> sigma in N."""
    if sys in (B, V):
        return isinstance(t, Multi)
    if sys == N:
        return isinstance(t, Arrow) and t.dom.elems == (t.cod,)
    raise ValueError(sys)


def args(sys: str, t: Type) -> list[Multi]:
    """Multitypes left of arrows, down to the first observable type."""
    out: list[Multi] = []
    while not observable(sys, t) and isinstance(t, Arrow):
        if t.dom not in out:
            out.append(t.dom)
        t = t.cod
    return out


# ---------------------------------------------------------------------------
# Judgments and derivations


@dataclass(frozen=True)
class Judgment:
    env: Env
    subject: Term
    type: Type

    def __str__(self):
        return f"{self.env} |- {self.subject} : {print_type(self.type)}"

    @property
    def typing(self) -> tuple[Env, Type]:
        return (self.env, self.type)


@dataclass(frozen=True)
class Derivation:
    system: str
    rule: str
    conclusion: Judgment
    premises: tuple["Derivation", ...] = ()
    binder: Optional[str] = None  # opening variable for abs/es nodes

    def all_judgments(self) -> Iterator[Judgment]:
        yield self.conclusion
        for p in self.premises:
            yield from p.all_judgments()

    def to_json(self) -> dict:
        from .syntax import print_term

        return {
            "system": self.system,
            "rule": self.rule,
            "env": {n: print_type(m) for n, m in self.conclusion.env.items},
            "term": print_term(self.conclusion.subject),
            "type": print_type(self.conclusion.type),
            "premises": [p.to_json() for p in self.premises],
        }


class RuleViolation(Exception):
    pass


def check_derivation(d: Derivation) -> Optional[str]:
    """Validate every node against its system's rule schema.

    Returns None if the derivation is locally valid everywhere, else a
    report naming the offending node and clause.
    """
    try:
        _check(d, path="root")
        return None
    except RuleViolation as e:
        return str(e)


def _fail(path: str, msg: str):
    raise RuleViolation(f"{path}: {msg}")


def _fresh_opening(d: Derivation, path: str, body: Term) -> str:
    b = d.binder
    if b is None:
        _fail(path, "abs/es node must record its opening variable")
    if b in free_vars(d.conclusion.subject):
        _fail(path, f"opening variable {b} collides with a free variable")
    if d.conclusion.env.get(b).elems:
        _fail(path, f"opening variable {b} collides with the environment")
    return b


def _check(d: Derivation, path: str):
    c = d.conclusion
    sys, rule = d.system, d.rule
    for i, p in enumerate(d.premises):
        if p.system != sys:
            _fail(f"{path}.{i}", "premise belongs to a different system")
        _check(p, f"{path}.{i}")

    match rule:
        case "var":
            if d.premises:
                _fail(path, "var axiom takes no premises")
            if not isinstance(c.subject, Var):
                _fail(path, "var axiom subject must be a variable")
            x = c.subject.name
            if sys == V:
                if not isinstance(c.type, Multi):
                    _fail(path, "V var axiom types variables with multitypes")
                if c.env != Env(((x, c.type),)):
                    _fail(path, "V var axiom env must be x : M for the conclusion M")
            else:
                if c.env != Env(((x, multi(c.type)),)):
                    _fail(path, "var axiom env must be x : [sigma]")

        case "app":
            if not isinstance(c.subject, App):
                _fail(path, "app subject must be an application")
            fun, arg = c.subject.fun, c.subject.arg
            if sys == N:
                if not d.premises:
                    _fail(path, "N app needs the function premise")
                pf, *family = d.premises
                if pf.conclusion.subject != fun:
                    _fail(path, "function premise subject mismatch")
                ft = pf.conclusion.type
                if not isinstance(ft, Arrow):
                    _fail(path, "function premise must have an arrow type")
                if Multi(tuple(p.conclusion.type for p in family)) != ft.dom:
                    _fail(path, "argument family types must gather to the arrow domain")
                for p in family:
                    if p.conclusion.subject != arg:
                        _fail(path, "argument family subject mismatch")
                if c.type != ft.cod:
                    _fail(path, "conclusion type must be the arrow codomain")
                if c.env != env_sum([pf.conclusion.env] + [p.conclusion.env for p in family]):
                    _fail(path, "conclusion env must be the sum of premise envs")
            else:
                if len(d.premises) != 2:
                    _fail(path, "app takes two premises")
                pf, pa = d.premises
                if pf.conclusion.subject != fun or pa.conclusion.subject != arg:
                    _fail(path, "premise subjects mismatch")
                ft = pf.conclusion.type
                if sys == V:
                    if not (isinstance(ft, Multi) and len(ft) == 1
                            and isinstance(ft.elems[0], Arrow)):
                        _fail(path, "V app function premise must have a singleton arrow multitype")
                    ft = ft.elems[0]
                if not isinstance(ft, Arrow):
                    _fail(path, "function premise must have an arrow type")
                if pa.conclusion.type != ft.dom:
                    _fail(path, "argument premise type must equal the arrow domain")
                if c.type != ft.cod:
                    _fail(path, "conclusion type must be the arrow codomain")
                if c.env != env_sum([pf.conclusion.env, pa.conclusion.env]):
                    _fail(path, "conclusion env must be the sum of premise envs")

        case "abs":
            if not isinstance(c.subject, Abs):
                _fail(path, "abs subject must be an abstraction")
            b = _fresh_opening(d, path, c.subject.body)
            opened = open_var(c.subject.body, b)
            if sys == V:
                if not isinstance(c.type, Multi):
                    _fail(path, "V abs conclusion must be a multitype of arrows")
                arrows = []
                for p in d.premises:
                    if p.conclusion.subject != opened:
                        _fail(path, "family premise subject mismatch")
                    arrows.append(Arrow(p.conclusion.env.get(b), p.conclusion.type))
                if Multi(tuple(arrows)) != c.type:
                    _fail(path, "V abs gathers one arrow per premise")
                if c.env != env_sum([p.conclusion.env.without(b) for p in d.premises]):
                    _fail(path, "conclusion env must be the sum of premise envs minus the binder")
            else:
                if len(d.premises) != 1:
                    _fail(path, "abs takes one premise")
                p = d.premises[0].conclusion
                if p.subject != opened:
                    _fail(path, "premise subject must be the opened body")
                if c.type != Arrow(p.env.get(b), p.type):
                    _fail(path, "conclusion type must be M -> sigma for the premise")
                if c.env != p.env.without(b):
                    _fail(path, "conclusion env must be the premise env minus the binder")

        case "es":
            if not isinstance(c.subject, Sub):
                _fail(path, "es subject must be a closure")
            b = _fresh_opening(d, path, c.subject.body)
            opened = open_var(c.subject.body, b)
            arg = c.subject.arg
            if not d.premises:
                _fail(path, "es needs a body premise")
            pb, *rest = d.premises
            if pb.conclusion.subject != opened:
                _fail(path, "body premise subject must be the opened body")
            m = pb.conclusion.env.get(b)
            if sys == N:
                if Multi(tuple(p.conclusion.type for p in rest)) != m:
                    _fail(path, "argument family types must gather to the binder multitype")
                for p in rest:
                    if p.conclusion.subject != arg:
                        _fail(path, "argument family subject mismatch")
            else:
                if len(rest) != 1:
                    _fail(path, "es takes two premises")
                if rest[0].conclusion.subject != arg:
                    _fail(path, "argument premise subject mismatch")
                if rest[0].conclusion.type != m:
                    _fail(path, "argument premise type must equal the binder multitype")
            if c.type != pb.conclusion.type:
                _fail(path, "conclusion type must be the body premise type")
            if c.env != env_sum([pb.conclusion.env.without(b)] + [p.conclusion.env for p in rest]):
                _fail(path, "conclusion env must be the sum of premise envs minus the binder")

        case "bang":
            if sys != B:
                _fail(path, "bang rule only exists in system B")
            if not isinstance(c.subject, Bang):
                _fail(path, "bang subject must be a bang")
            inner = c.subject.inner
            for p in d.premises:
                if p.conclusion.subject != inner:
                    _fail(path, "bang premises must type the banged subterm")
            if c.type != Multi(tuple(p.conclusion.type for p in d.premises)):
                _fail(path, "bang gathers premise types into the conclusion multitype")
            if c.env != env_sum([p.conclusion.env for p in d.premises]):
                _fail(path, "conclusion env must be the sum of premise envs")

        case "der":
            if sys != B:
                _fail(path, "der rule only exists in system B")
            if not isinstance(c.subject, Der):
                _fail(path, "der subject must be a dereliction")
            if len(d.premises) != 1:
                _fail(path, "der takes one premise")
            p = d.premises[0].conclusion
            if p.subject != c.subject.inner:
                _fail(path, "premise subject mismatch")
            if p.type != multi(c.type):
                _fail(path, "der premise must have the singleton multitype [sigma]")
            if c.env != p.env:
                _fail(path, "der preserves the environment")

        case _:
            _fail(path, f"unknown rule {rule!r}")


# ---------------------------------------------------------------------------
# Bounded enumeration


@dataclass(frozen=True)
class Bounds:
    card: int = 2
    pool: int = 2
    depth: int = 3


_POOL_NAMES = ("a", "b", "c", "d", "e", "f", "g", "h")


@lru_cache(maxsize=None)
def type_universe(bounds: Bounds) -> tuple[Type, ...]:
    """All axiom types within the bounds, by structural depth."""
    names = _POOL_NAMES[: bounds.pool]
    levels: list[list[Type]] = [[TVar(n) for n in names] + [EMPTY_MULTI]]
    for _ in range(bounds.depth - 1):
        below = [t for level in levels for t in level]
        multis_below = [t for t in below if isinstance(t, Multi)]
        fresh: list[Type] = []
        for k in range(1, bounds.card + 1):
            for combo in itertools.combinations_with_replacement(below, k):
                m = Multi(combo)
                if m not in below and m not in fresh:
                    fresh.append(m)
        for dom in multis_below:
            for cod in below:
                a = Arrow(dom, cod)
                if a not in below and a not in fresh:
                    fresh.append(a)
        levels.append(fresh)
    return tuple(t for level in levels for t in level)


def _universe_multis(bounds: Bounds) -> tuple[Multi, ...]:
    return tuple(t for t in type_universe(bounds) if isinstance(t, Multi))


@lru_cache(maxsize=None)
def _value_var_multis(bounds: Bounds) -> tuple[Multi, ...]:
    """Base axiom multitypes for V variables: the universe multitypes
    plus singleton wrappers of universe arrows (function-position
    premises need those).  Demanded argument positions accept any
    card-bounded multiset over the universe via _envs_at, mirroring how
    the bang-calculus side reaches the same environments through one
    axiom per occurrence."""
    uni = type_universe(bounds)
    out: dict[Multi, None] = {m: None for m in _universe_multis(bounds)}
    for ty in uni:
        if isinstance(ty, Arrow):
            out[Multi((ty,))] = None
    return tuple(out)


def _acceptable_var_multi(m: Multi, bounds: Bounds) -> bool:
    uni = type_universe(bounds)
    return len(m) <= bounds.card and all(e in uni for e in m.elems)


@lru_cache(maxsize=None)
def _depth(t: Type) -> int:
    match t:
        case TVar():
            return 1
        case Multi(elems):
            return 1 + max((_depth(e) for e in elems), default=0)
        case Arrow(dom, cod):
            return 1 + max(_depth(dom), _depth(cod))
    raise TypeError(t)


def wf_type(t: Type, bounds: Bounds) -> bool:
    """Universe membership: depth, multiset cardinalities, and variable
    pool all within bounds.  Judgment types are pruned by this check so
    that enumerated typing sets live in one closed type world."""
    names = _POOL_NAMES[: bounds.pool]
    def ok(t: Type) -> bool:
        match t:
            case TVar(name):
                return name in names
            case Multi(elems):
                return len(elems) <= bounds.card and all(ok(e) for e in elems)
            case Arrow(dom, cod):
                return ok(dom) and ok(cod)
        raise TypeError(t)
    return _depth(t) <= bounds.depth and ok(t)


Pair = tuple[Env, Type]


def _env_fits(e: Env, card: int) -> bool:
    return max_env_card(e) <= card


def _env_profile(e: Env) -> tuple[tuple[str, int], ...]:
    return tuple((n, len(m)) for n, m in e.items)


def _profile_sums(profiles: Sequence[tuple[tuple[str, int], ...]], counts: Sequence[int],
                  card: int) -> bool:
    total: dict[str, int] = {}
    for prof, k in zip(profiles, counts):
        for n, c in prof:
            total[n] = total.get(n, 0) + c * k
            if total[n] > card:
                return False
    return True


def _grouped_multisets(items: Sequence, sizes: Sequence[int], card: int, env_of
                       ) -> Iterator[tuple]:
    """Multisets over `items` whose env sum stays within the per-variable
    cardinality bound.  Items are bucketed by env profile so infeasible
    regions are skipped wholesale (output-linear in practice)."""
    buckets: dict[tuple, list] = {}
    for it in items:
        buckets.setdefault(_env_profile(env_of(it)), []).append(it)
    keys = sorted(buckets)
    want = frozenset(sizes)
    top = max(sizes) if sizes else 0

    def assignments(i: int, left: int, counts: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
        if i == len(keys):
            if (top - left) in want:
                yield counts
            return
        for k in range(0, left + 1):
            trial = counts + (k,)
            if k > 0 and not _profile_sums(keys[: i + 1], trial, card):
                return  # larger counts only increase the sums
            yield from assignments(i + 1, left - k, trial)

    for counts in assignments(0, top, ()):
        pools = [
            list(itertools.combinations_with_replacement(buckets[keys[i]], k)) if k else [()]
            for i, k in enumerate(counts)
        ]
        for choice in itertools.product(*pools):
            yield tuple(it for combo in choice for it in combo)


def _family_combos(pairs: Sequence[Pair], sizes: Sequence[int], card: int
                   ) -> Iterator[tuple[tuple[Pair, ...], Env]]:
    """Multisets over typing pairs (sizes drawn from `sizes`), with the
    summed environment within the cardinality bound."""
    for fam in _grouped_multisets(pairs, sizes, card, env_of=lambda p: p[0]):
        yield fam, env_sum([p[0] for p in fam])


def _opening(depth: int) -> str:
    return f"%{depth}"


@lru_cache(maxsize=None)
def _pairs(sys: str, t: Term, bounds: Bounds, depth: int) -> tuple[Pair, ...]:
    """All (env, type) typings of t within the bounds (deduplicated)."""
    if sys == B and untypable_certificate(t):
        return ()
    out: dict[Pair, None] = {}

    def put(env: Env, ty: Type):
        if _env_fits(env, bounds.card):
            out[(env, ty)] = None

    match t:
        case Var(x):
            if sys == V:
                for m in _value_var_multis(bounds):
                    put(Env(((x, m),)), m)
            else:
                for ty in type_universe(bounds):
                    put(Env(((x, multi(ty)),)), ty)
        case Idx():
            raise ValueError("enumeration requires a locally closed subject")
        case Abs(_, body):
            name = _opening(depth)
            sub = _pairs(sys, open_var(body, name), bounds, depth + 1)
            if sys == V:
                # Fold the binder into the arrow before combining, so the
                # card bound applies to the residual environments only.
                stripped = [(p[0].without(name), Arrow(p[0].get(name), p[1])) for p in sub
                            if _depth(Arrow(p[0].get(name), p[1])) <= bounds.depth]
                for fam, env in _family_combos(stripped, range(0, bounds.card + 1), bounds.card):
                    put(env, Multi(tuple(p[1] for p in fam)))
            else:
                for env, ty in sub:
                    put(env.without(name), Arrow(env.get(name), ty))
        case App(fun, arg):
            fp = _pairs(sys, fun, bounds, depth)
            if sys == N:
                ap = _pairs(sys, arg, bounds, depth)
                by_type: dict[Type, list[Pair]] = {}
                for p in ap:
                    by_type.setdefault(p[1], []).append(p)
                for fenv, fty in fp:
                    if not isinstance(fty, Arrow):
                        continue
                    for fam_env in _match_family(by_type, fty.dom, bounds.card):
                        put(env_sum([fenv, fam_env]), fty.cod)
            else:
                lookup = _arg_env_lookup(sys, arg, bounds, depth)
                for fenv, fty in fp:
                    if sys == V:
                        if not (isinstance(fty, Multi) and len(fty) == 1
                                and isinstance(fty.elems[0], Arrow)):
                            continue
                        fty = fty.elems[0]
                    if not isinstance(fty, Arrow):
                        continue
                    for aenv in lookup(fty.dom):
                        put(env_sum([fenv, aenv]), fty.cod)
        case Sub(_, body, arg):
            name = _opening(depth)
            bp = _pairs(sys, open_var(body, name), bounds, depth + 1)
            if sys == N:
                ap = _pairs(sys, arg, bounds, depth)
                by_type = {}
                for p in ap:
                    by_type.setdefault(p[1], []).append(p)
                for benv, bty in bp:
                    for fam_env in _match_family(by_type, benv.get(name), bounds.card):
                        put(env_sum([benv.without(name), fam_env]), bty)
            else:
                lookup = _arg_env_lookup(sys, arg, bounds, depth)
                for benv, bty in bp:
                    for aenv in lookup(benv.get(name)):
                        put(env_sum([benv.without(name), aenv]), bty)
        case Bang(inner):
            if sys == B:
                sub = [p for p in _pairs(sys, inner, bounds, depth)
                       if _depth(p[1]) < bounds.depth]
                for fam, env in _family_combos(sub, range(0, bounds.card + 1), bounds.card):
                    put(env, Multi(tuple(p[1] for p in fam)))
        case Der(inner):
            if sys == B:
                for env, ty in _pairs(sys, inner, bounds, depth):
                    if isinstance(ty, Multi) and len(ty) == 1:
                        put(env, ty.elems[0])
        case _:
            raise TypeError(t)
    return tuple(out)


def _arg_env_lookup(sys: str, arg: Term, bounds: Bounds, depth: int):
    """Type-indexed access to the environments typing an argument.

    Bang arguments (B) and variable arguments (V) are resolved on
    demand, so deep element types stay reachable there; other arguments
    are enumerated once and indexed."""
    if (sys == B and isinstance(arg, Bang)) or (sys == V and isinstance(arg, Var)):
        return lambda m: _envs_at(sys, arg, m, bounds, depth)
    table: dict[Type, list[Env]] = {}
    for e, ty in _pairs(sys, arg, bounds, depth):
        table.setdefault(ty, []).append(e)
    return lambda m: table.get(m, ())


@lru_cache(maxsize=None)
def _envs_at(sys: str, t: Term, want: Type, bounds: Bounds, depth: int) -> tuple[Env, ...]:
    """Environments typing t exactly at `want`.

    Argument premises are demand-driven through bangs: the wanted
    multitype's elements become premise goals directly, so deep element
    types are reachable there without widening the blind enumeration."""
    if sys == V and isinstance(t, Var) and isinstance(want, Multi):
        if _acceptable_var_multi(want, bounds):
            return (Env(((t.name, want),)),)
        return ()
    if sys == B and isinstance(t, Bang) and isinstance(want, Multi):
        groups: dict[Type, int] = {}
        for ty in want.elems:
            groups[ty] = groups.get(ty, 0) + 1
        options: list[list[Env]] = []
        for ty, count in groups.items():
            envs = _envs_at(sys, t.inner, ty, bounds, depth)
            if not envs:
                return ()
            options.append([env_sum(combo) for combo in
                            itertools.combinations_with_replacement(envs, count)])
        out: dict[Env, None] = {}
        for choice in itertools.product(*options):
            env = env_sum(choice)
            if _env_fits(env, bounds.card):
                out[env] = None
        return tuple(out)
    return tuple(e for e, ty in _pairs(sys, t, bounds, depth) if ty == want)


def _match_family(by_type: dict[Type, list[Pair]], m: Multi, card: int) -> Iterator[Env]:
    """Environments of premise families typing one argument at each
    element of m (N-style app/es)."""
    groups: dict[Type, int] = {}
    for ty in m.elems:
        groups[ty] = groups.get(ty, 0) + 1
    options: list[list[Env]] = []
    for ty, count in groups.items():
        cands = by_type.get(ty)
        if not cands:
            return
        options.append([env_sum([p[0] for p in combo])
                        for combo in itertools.combinations_with_replacement(cands, count)])
    for choice in itertools.product(*options):
        env = env_sum(choice)
        if _env_fits(env, card):
            yield env


def typing_pairs(sys: str, t: Term, bounds: Bounds = Bounds()) -> frozenset[Pair]:
    """The set of bounded typings of t, deduplicated."""
    return frozenset(_pairs(sys, t, bounds, 0))


def on_grid(pair: Pair, limit: int) -> bool:
    """Whether every component of the typing has depth <= limit.

    Typing sets are compared on the grid one level below the enumeration
    depth: at the boundary itself, one side of a reduction step may need
    types the bounded enumeration cannot reach."""
    env, ty = pair
    return _depth(ty) <= limit and all(_depth(m) <= limit for _, m in env.items)


def grid_typing_set(sys: str, t: Term, bounds: Bounds = Bounds(),
                    limit: Optional[int] = None) -> frozenset[Pair]:
    if limit is None:
        limit = bounds.depth - 1
    return frozenset(canon_typing(p, bounds)
                     for p in typing_pairs(sys, t, bounds) if on_grid(p, limit))


@lru_cache(maxsize=None)
def canon_typing(pair: Pair, bounds: Bounds = Bounds()) -> Pair:
    """Rename type variables to the pool prefix in first-occurrence order,
    so typing sets are comparable across terms."""
    env, ty = pair
    order: list[str] = []

    def visit(t: Type):
        match t:
            case TVar(name):
                if name not in order:
                    order.append(name)
            case Multi(elems):
                for e in elems:
                    visit(e)
            case Arrow(dom, cod):
                visit(dom)
                visit(cod)

    for _, m in env.items:
        visit(m)
    visit(ty)
    mapping = {n: _POOL_NAMES[i] for i, n in enumerate(order)}
    if all(k == v for k, v in mapping.items()):
        return pair
    return (Env(tuple((n, rename_tvars(m, mapping)) for n, m in env.items)),
            rename_tvars(ty, mapping))


def canonical_typing_set(sys: str, t: Term, bounds: Bounds = Bounds()) -> frozenset[Pair]:
    return frozenset(canon_typing(p, bounds) for p in typing_pairs(sys, t, bounds))


# ---------------------------------------------------------------------------
# Derivation enumeration (lazy; mirrors _pairs)


def typings_enumerate(sys: str, t: Term, bounds: Bounds = Bounds()) -> Iterator[Derivation]:
    """Every bounded derivation for t, lazily.

    Sound (each result passes check_derivation) and complete relative to
    the bounds: axiom types come from the bounded universe and each
    formed multiset has at most `card` elements.
    """
    yield from _derive(sys, t, bounds, 0)


def _derive(sys: str, t: Term, bounds: Bounds, depth: int) -> Iterator[Derivation]:
    match t:
        case Var(x):
            if sys == V:
                for m in _value_var_multis(bounds):
                    yield Derivation(sys, "var", Judgment(Env(((x, m),)), t, m))
            else:
                for ty in type_universe(bounds):
                    yield Derivation(sys, "var", Judgment(Env(((x, multi(ty)),)), t, ty))
        case Abs(_, body):
            name = _opening(depth)
            opened = open_var(body, name)
            if sys == V:
                subs = [d for d in _derive(sys, opened, bounds, depth + 1)
                        if _depth(Arrow(d.conclusion.env.get(name), d.conclusion.type))
                        <= bounds.depth]
                for fam in _multisets(subs, range(0, bounds.card + 1), bounds.card,
                                      env_of=lambda d: d.conclusion.env.without(name)):
                    env = env_sum([d.conclusion.env.without(name) for d in fam])
                    if not _env_fits(env, bounds.card):
                        continue
                    ty = Multi(tuple(Arrow(d.conclusion.env.get(name), d.conclusion.type)
                                     for d in fam))
                    yield Derivation(sys, "abs", Judgment(env, t, ty), tuple(fam), binder=name)
            else:
                for d in _derive(sys, opened, bounds, depth + 1):
                    env = d.conclusion.env
                    made = Arrow(env.get(name), d.conclusion.type)
                    yield Derivation(sys, "abs", Judgment(env.without(name), t, made),
                                     (d,), binder=name)
        case App(fun, arg):
            if sys == N:
                by_type: dict[Type, list[Derivation]] = {}
                for d in _derive(sys, arg, bounds, depth):
                    by_type.setdefault(d.conclusion.type, []).append(d)
            else:
                arg_lookup = _arg_derivation_lookup(sys, arg, bounds, depth)
            for fd in _derive(sys, fun, bounds, depth):
                fty = fd.conclusion.type
                if sys == V:
                    if not (isinstance(fty, Multi) and len(fty) == 1
                            and isinstance(fty.elems[0], Arrow)):
                        continue
                    fty = fty.elems[0]
                if not isinstance(fty, Arrow):
                    continue
                if sys == N:
                    for fam in _type_matched_families(by_type, fty.dom):
                        env = env_sum([fd.conclusion.env] + [d.conclusion.env for d in fam])
                        if _env_fits(env, bounds.card):
                            yield Derivation(sys, "app", Judgment(env, t, fty.cod),
                                             (fd, *fam))
                else:
                    for ad in arg_lookup(fty.dom):
                        env = env_sum([fd.conclusion.env, ad.conclusion.env])
                        if _env_fits(env, bounds.card):
                            yield Derivation(sys, "app", Judgment(env, t, fty.cod), (fd, ad))
        case Sub(_, body, arg):
            name = _opening(depth)
            opened = open_var(body, name)
            if sys == N:
                by_type = {}
                for d in _derive(sys, arg, bounds, depth):
                    by_type.setdefault(d.conclusion.type, []).append(d)
            else:
                arg_lookup = _arg_derivation_lookup(sys, arg, bounds, depth)
            for bd in _derive(sys, opened, bounds, depth + 1):
                m = bd.conclusion.env.get(name)
                base = bd.conclusion.env.without(name)
                if sys == N:
                    for fam in _type_matched_families(by_type, m):
                        env = env_sum([base] + [d.conclusion.env for d in fam])
                        if _env_fits(env, bounds.card):
                            yield Derivation(sys, "es",
                                             Judgment(env, t, bd.conclusion.type),
                                             (bd, *fam), binder=name)
                else:
                    for ad in arg_lookup(m):
                        env = env_sum([base, ad.conclusion.env])
                        if _env_fits(env, bounds.card):
                            yield Derivation(sys, "es", Judgment(env, t, bd.conclusion.type),
                                             (bd, ad), binder=name)
        case Bang(inner):
            if sys == B:
                subs = [d for d in _derive(sys, inner, bounds, depth)
                        if _depth(d.conclusion.type) < bounds.depth]
                for fam in _multisets(subs, range(0, bounds.card + 1), bounds.card):
                    env = env_sum([d.conclusion.env for d in fam])
                    if not _env_fits(env, bounds.card):
                        continue
                    yield Derivation(sys, "bang",
                                     Judgment(env, t, Multi(tuple(d.conclusion.type for d in fam))),
                                     tuple(fam))
        case Der(inner):
            if sys == B:
                for d in _derive(sys, inner, bounds, depth):
                    ty = d.conclusion.type
                    if isinstance(ty, Multi) and len(ty) == 1:
                        yield Derivation(sys, "der",
                                         Judgment(d.conclusion.env, t, ty.elems[0]), (d,))
        case Idx():
            raise ValueError("enumeration requires a locally closed subject")
        case _:
            raise TypeError(t)


def _multisets(items: list, sizes, card: int, env_of=None) -> Iterator[tuple]:
    if env_of is None:
        env_of = lambda d: d.conclusion.env
    yield from _grouped_multisets(items, sizes, card, env_of)


def _arg_derivation_lookup(sys: str, arg: Term, bounds: Bounds, depth: int):
    """Type-indexed access to argument derivations, demand-driven through
    bangs (B) and variables (V), with per-site caching."""
    if sys == V and isinstance(arg, Var):
        def var_get(m: Type):
            if isinstance(m, Multi) and _acceptable_var_multi(m, bounds):
                return (Derivation(sys, "var",
                                   Judgment(Env(((arg.name, m),)), arg, m)),)
            return ()
        return var_get
    if sys == B and isinstance(arg, Bang):
        inner_get = _arg_derivation_lookup(sys, arg.inner, bounds, depth)
        cache: dict[Type, tuple] = {}

        def bang_get(m: Type):
            if not isinstance(m, Multi):
                return ()
            hit = cache.get(m)
            if hit is None:
                hit = cache[m] = tuple(_bang_families(sys, arg, m, inner_get, bounds))
            return hit
        return bang_get
    table: dict[Type, list[Derivation]] = {}
    for d in _derive(sys, arg, bounds, depth):
        table.setdefault(d.conclusion.type, []).append(d)
    return lambda m: table.get(m, ())


def _bang_families(sys: str, t: Term, want: Multi, inner_get, bounds: Bounds
                   ) -> Iterator[Derivation]:
    groups: dict[Type, int] = {}
    for ty in want.elems:
        groups[ty] = groups.get(ty, 0) + 1
    options = []
    for ty, count in groups.items():
        cands = list(inner_get(ty))
        if not cands:
            return
        options.append(list(itertools.combinations_with_replacement(cands, count)))
    for choice in itertools.product(*options):
        fam = tuple(d for combo in choice for d in combo)
        env = env_sum([d.conclusion.env for d in fam])
        if _env_fits(env, bounds.card):
            yield Derivation(sys, "bang", Judgment(env, t, want), fam)


def _type_matched_families(by_type: dict[Type, list[Derivation]], m: Multi
                           ) -> Iterator[tuple[Derivation, ...]]:
    groups: dict[Type, int] = {}
    for ty in m.elems:
        groups[ty] = groups.get(ty, 0) + 1
    options = []
    for ty, count in groups.items():
        cands = by_type.get(ty)
        if not cands:
            return
        options.append(list(itertools.combinations_with_replacement(cands, count)))
    for choice in itertools.product(*options):
        yield tuple(d for combo in choice for d in combo)


def find_derivation(sys: str, t: Term, typing: Pair, bounds: Bounds = Bounds()
                    ) -> Optional[Derivation]:
    """A derivation with the given conclusion typing, if one exists in
    bounds (compared up to canonical type-variable renaming)."""
    target = canon_typing(typing)
    for d in typings_enumerate(sys, t, bounds):
        if canon_typing(d.conclusion.typing) == target:
            return d
    return None


# ---------------------------------------------------------------------------
# Sound untypability certificates and canonical NF derivations (system B)

_SH_TVAR, _SH_ARROW, _SH_M0, _SH_MPOS = "tvar", "arrow", "m0", "m+"
_ALL_SHAPES = frozenset((_SH_TVAR, _SH_ARROW, _SH_M0, _SH_MPOS))


@lru_cache(maxsize=None)
def type_shapes(t: Term) -> frozenset[str]:
    """Over-approximation of the possible B-type shapes of t, ignoring
    environments.  An empty result certifies that t is untypable in B
    at any bounds."""
    match t:
        case Var() | Idx():
            return _ALL_SHAPES
        case Bang(inner):
            inner_ok = bool(type_shapes(inner))
            return frozenset((_SH_M0, _SH_MPOS)) if inner_ok else frozenset((_SH_M0,))
        case Der(inner):
            return _ALL_SHAPES if _SH_MPOS in type_shapes(inner) else frozenset()
        case Abs(_, body):
            return frozenset((_SH_ARROW,)) if type_shapes(body) else frozenset()
        case App(fun, arg):
            if _SH_ARROW in type_shapes(fun) and type_shapes(arg) & {_SH_M0, _SH_MPOS}:
                return _ALL_SHAPES
            return frozenset()
        case Sub(_, body, arg):
            if type_shapes(arg) & {_SH_M0, _SH_MPOS}:
                return type_shapes(body)
            return frozenset()
    raise TypeError(t)


def untypable_certificate(t: Term) -> bool:
    """True when the shape analysis refutes every possible B-derivation."""
    return not type_shapes(t)


def canonical_nf_derivation(t: Term) -> Derivation:
    """A concrete B-derivation for a surface clash-free normal form.

    Neutral terms get a head-driven typing (arguments typed with the
    empty multitype), bangs the zero-premise typing, abstractions the
    arrow induced by the body.  The result passes check_derivation; no
    enumeration bounds are involved.
    """
    cls = reduction.classify(t)
    if not cls.in_no_s:
        raise ValueError("subject must be a surface clash-free normal form")
    return _canon_no(t, 0)


def _canon_ne(t: Term, want: Type, depth: int) -> Derivation:
    match t:
        case Var(x):
            return Derivation(B, "var", Judgment(Env(((x, multi(want)),)), t, want))
        case App(fun, arg):
            fd = _canon_ne(fun, Arrow(EMPTY_MULTI, want), depth)
            ad = _canon_na_empty(arg, depth)
            env = env_sum([fd.conclusion.env, ad.conclusion.env])
            return Derivation(B, "app", Judgment(env, t, want), (fd, ad))
        case Der(inner):
            pd = _canon_ne(inner, multi(want), depth)
            return Derivation(B, "der", Judgment(pd.conclusion.env, t, want), (pd,))
        case Sub(_, body, arg):
            name = _opening(depth)
            bd = _canon_ne(open_var(body, name), want, depth + 1)
            m = bd.conclusion.env.get(name)
            ad = _canon_ne(arg, m, depth)
            env = env_sum([bd.conclusion.env.without(name), ad.conclusion.env])
            return Derivation(B, "es", Judgment(env, t, want), (bd, ad), binder=name)
    raise ValueError(f"not a neutral term: {t!r}")


def _canon_na_empty(t: Term, depth: int) -> Derivation:
    """Type an argument-position normal form with the empty multitype."""
    match t:
        case Bang(_):
            return Derivation(B, "bang", Judgment(EMPTY_ENV, t, EMPTY_MULTI))
        case Sub(_, body, arg):
            name = _opening(depth)
            bd = _canon_na_empty(open_var(body, name), depth + 1)
            m = bd.conclusion.env.get(name)
            ad = _canon_ne(arg, m, depth)
            env = env_sum([bd.conclusion.env.without(name), ad.conclusion.env])
            return Derivation(B, "es", Judgment(env, t, EMPTY_MULTI), (bd, ad), binder=name)
        case _:
            return _canon_ne(t, EMPTY_MULTI, depth)


def _canon_no(t: Term, depth: int) -> Derivation:
    match t:
        case Abs(_, body):
            name = _opening(depth)
            bd = _canon_no(open_var(body, name), depth + 1)
            m = bd.conclusion.env.get(name)
            return Derivation(
                B, "abs",
                Judgment(bd.conclusion.env.without(name), t, Arrow(m, bd.conclusion.type)),
                (bd,), binder=name)
        case Bang(_):
            return Derivation(B, "bang", Judgment(EMPTY_ENV, t, EMPTY_MULTI))
        case Sub(_, body, arg):
            name = _opening(depth)
            bd = _canon_no(open_var(body, name), depth + 1)
            m = bd.conclusion.env.get(name)
            ad = _canon_ne(arg, m, depth)
            env = env_sum([bd.conclusion.env.without(name), ad.conclusion.env])
            return Derivation(B, "es", Judgment(env, t, bd.conclusion.type),
                              (bd, ad), binder=name)
        case _:
            return _canon_ne(t, EMPTY_MULTI, depth)


# ---------------------------------------------------------------------------
# Normalization-based typability (system B)


def typable(t: Term, fuel: int = 1000) -> str:
    """Decide B-typability via surface normalization: typable iff the
    term surface-reduces to a clash-free normal form."""
    out = reduction.normalize(t, reduction.SURFACE, fuel)
    if not out.normalized:
        return "unknown"
    cls = reduction.classify(out.term)
    return "yes" if cls.in_no_s else "no"


def typing_transport_check(t: Term, u: Term, bounds: Bounds = Bounds()) -> bool:
    """For a one-step full reduct u of t, bounded typing sets coincide
    (compared on the grid one depth level below the bounds)."""
    return grid_typing_set(B, t, bounds) == grid_typing_set(B, u, bounds)


# ---------------------------------------------------------------------------
# Shape of closed typed normal forms


def nf_shape(sigma: Type, t: Term, evidence: Optional[Derivation] = None) -> str:
    """Closed surface-normal inhabitants are bangs at non-arrow types and
    abstractions at arrow types.

    Returns "must-bang" or "must-abs" on confirmation; raises
    RuleViolation when the supplied evidence is invalid or the shape
    claim fails (which would refute the shape invariant).
    """
    if evidence is not None:
        err = check_derivation(evidence)
        if err:
            raise RuleViolation(f"bad evidence: {err}")
        c = evidence.conclusion
        if c.env != EMPTY_ENV or c.subject != t or c.type != sigma:
            raise RuleViolation("evidence does not conclude the claimed judgment")
    if reduction.redexes(t, reduction.SURFACE):
        raise RuleViolation("subject is not a surface normal form")
    if isinstance(sigma, Arrow):
        if not isinstance(t, Abs):
            raise RuleViolation("arrow-typed closed normal form must be an abstraction")
        return "must-abs"
    if not isinstance(t, Bang):
        raise RuleViolation("non-arrow-typed closed normal form must be a bang")
    return "must-bang"
