"""Abstract syntax with clock, tick and variable binders.

Three kinds of names live in terms: ordinary variables, clock names and
tick names.  Binders use locally-unique string names with on-demand
freshening; all traversals below are capture-avoiding.
"""
from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Iterable


# ---------------------------------------------------------------------------
# Term nodes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Term:
    pass


@dataclass(frozen=True)
class Var(Term):
    name: str


@dataclass(frozen=True)
class Const(Term):
    """Nullary constants: tt, refl, fix, unit, empty, ptop, pbot and the
    axiom constants tirr, cirr, force."""
    name: str


@dataclass(frozen=True)
class Lam(Term):
    name: str
    body: Term


@dataclass(frozen=True)
class App(Term):
    fn: Term
    arg: Term


@dataclass(frozen=True)
class Ann(Term):
    """Type-annotated term (t : A); lets check-only terms appear in
    inference position."""
    term: Term
    type_: Term


@dataclass(frozen=True)
class Pair(Term):
    fst: Term
    snd: Term


@dataclass(frozen=True)
class Fst(Term):
    arg: Term


@dataclass(frozen=True)
class Snd(Term):
    arg: Term


@dataclass(frozen=True)
class Inl(Term):
    arg: Term


@dataclass(frozen=True)
class Inr(Term):
    arg: Term


@dataclass(frozen=True)
class Case(Term):
    scrut: Term
    lname: str
    left: Term
    rname: str
    right: Term


@dataclass(frozen=True)
class Pi(Term):
    name: str
    dom: Term
    cod: Term


@dataclass(frozen=True)
class Sigma(Term):
    name: str
    dom: Term
    cod: Term


@dataclass(frozen=True)
class Sum(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Id(Term):
    type_: Term
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class TickAbs(Term):
    tick: str
    clock: str
    body: Term


@dataclass(frozen=True)
class TickApp(Term):
    fn: Term
    tick: str


@dataclass(frozen=True)
class ClockAbs(Term):
    clock: str
    body: Term


@dataclass(frozen=True)
class ClockApp(Term):
    fn: Term
    clock: str


@dataclass(frozen=True)
class Later(Term):
    """Delay type, binding a tick on the given clock over the body."""
    tick: str
    clock: str
    body: Term


@dataclass(frozen=True)
class Forall(Term):
    """Universal quantification over a clock."""
    clock: str
    body: Term


@dataclass(frozen=True)
class Univ(Term):
    """Universe annotated with a finite set of clock names, kept sorted."""
    clocks: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "clocks", tuple(sorted(set(self.clocks))))


@dataclass(frozen=True)
class PropU(Term):
    """Universe of propositions, annotated like Univ."""
    clocks: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "clocks", tuple(sorted(set(self.clocks))))


@dataclass(frozen=True)
class El(Term):
    code: Term


@dataclass(frozen=True)
class Prf(Term):
    """Decoding of a proposition code to a type."""
    prop: Term


@dataclass(frozen=True)
class Incl(Term):
    """Universe inclusion from the small clock set into the big one."""
    small: tuple[str, ...]
    big: tuple[str, ...]
    code: Term

    def __post_init__(self):
        object.__setattr__(self, "small", tuple(sorted(set(self.small))))
        object.__setattr__(self, "big", tuple(sorted(set(self.big))))


@dataclass(frozen=True)
class LaterCode(Term):
    tick: str
    clock: str
    body: Term


@dataclass(frozen=True)
class ForallCode(Term):
    clock: str
    body: Term


@dataclass(frozen=True)
class PiCode(Term):
    name: str
    dom: Term
    cod: Term


@dataclass(frozen=True)
class SigmaCode(Term):
    name: str
    dom: Term
    cod: Term


@dataclass(frozen=True)
class SumCode(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class IdCode(Term):
    code: Term
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class PAnd(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class POr(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class PExists(Term):
    """Existential proposition over the elements of a type code."""
    name: str
    dom: Term
    body: Term


@dataclass(frozen=True)
class PForall(Term):
    name: str
    dom: Term
    body: Term


@dataclass(frozen=True)
class PEq(Term):
    code: Term
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class PLater(Term):
    tick: str
    clock: str
    body: Term


@dataclass(frozen=True)
class PForallClk(Term):
    clock: str
    body: Term


CONSTANTS = frozenset(
    {"tt", "refl", "fix", "unit", "empty", "ptop", "pbot",
     "tirr", "cirr", "force"}
)


# ---------------------------------------------------------------------------
# Field roles, used by the generic traversals
# ---------------------------------------------------------------------------

TERM = "term"
NAME_VAR = "var"
NAME_CLOCK = "clock"
NAME_TICK = "tick"
NAMESET = "nameset"          # tuple of clock names (universe annotations)
ATOM = "atom"                # plain data, compared for equality, never renamed
BIND_VAR = "bind-var"
BIND_CLOCK = "bind-clock"
BIND_TICK = "bind-tick"

# cls -> list of (field, role, scope) where scope is the tuple of term
# fields the binder scopes over (empty for non-binders).
_SPEC: dict[type, list[tuple[str, str, tuple[str, ...]]]] = {
    Var: [("name", NAME_VAR, ())],
    Const: [("name", ATOM, ())],
    Lam: [("name", BIND_VAR, ("body",)), ("body", TERM, ())],
    App: [("fn", TERM, ()), ("arg", TERM, ())],
    Ann: [("term", TERM, ()), ("type_", TERM, ())],
    Pair: [("fst", TERM, ()), ("snd", TERM, ())],
    Fst: [("arg", TERM, ())],
    Snd: [("arg", TERM, ())],
    Inl: [("arg", TERM, ())],
    Inr: [("arg", TERM, ())],
    Case: [("scrut", TERM, ()),
           ("lname", BIND_VAR, ("left",)), ("left", TERM, ()),
           ("rname", BIND_VAR, ("right",)), ("right", TERM, ())],
    Pi: [("dom", TERM, ()), ("name", BIND_VAR, ("cod",)), ("cod", TERM, ())],
    Sigma: [("dom", TERM, ()), ("name", BIND_VAR, ("cod",)), ("cod", TERM, ())],
    Sum: [("left", TERM, ()), ("right", TERM, ())],
    Id: [("type_", TERM, ()), ("lhs", TERM, ()), ("rhs", TERM, ())],
    TickAbs: [("clock", NAME_CLOCK, ()),
              ("tick", BIND_TICK, ("body",)), ("body", TERM, ())],
    TickApp: [("fn", TERM, ()), ("tick", NAME_TICK, ())],
    ClockAbs: [("clock", BIND_CLOCK, ("body",)), ("body", TERM, ())],
    ClockApp: [("fn", TERM, ()), ("clock", NAME_CLOCK, ())],
    Later: [("clock", NAME_CLOCK, ()),
            ("tick", BIND_TICK, ("body",)), ("body", TERM, ())],
    Forall: [("clock", BIND_CLOCK, ("body",)), ("body", TERM, ())],
    Univ: [("clocks", NAMESET, ())],
    PropU: [("clocks", NAMESET, ())],
    El: [("code", TERM, ())],
    Prf: [("prop", TERM, ())],
    Incl: [("small", NAMESET, ()), ("big", NAMESET, ()), ("code", TERM, ())],
    LaterCode: [("clock", NAME_CLOCK, ()),
                ("tick", BIND_TICK, ("body",)), ("body", TERM, ())],
    ForallCode: [("clock", BIND_CLOCK, ("body",)), ("body", TERM, ())],
    PiCode: [("dom", TERM, ()), ("name", BIND_VAR, ("cod",)), ("cod", TERM, ())],
    SigmaCode: [("dom", TERM, ()), ("name", BIND_VAR, ("cod",)), ("cod", TERM, ())],
    SumCode: [("left", TERM, ()), ("right", TERM, ())],
    IdCode: [("code", TERM, ()), ("lhs", TERM, ()), ("rhs", TERM, ())],
    PAnd: [("left", TERM, ()), ("right", TERM, ())],
    POr: [("left", TERM, ()), ("right", TERM, ())],
    PExists: [("dom", TERM, ()), ("name", BIND_VAR, ("body",)), ("body", TERM, ())],
    PForall: [("dom", TERM, ()), ("name", BIND_VAR, ("body",)), ("body", TERM, ())],
    PEq: [("code", TERM, ()), ("lhs", TERM, ()), ("rhs", TERM, ())],
    PLater: [("clock", NAME_CLOCK, ()),
             ("tick", BIND_TICK, ("body",)), ("body", TERM, ())],
    PForallClk: [("clock", BIND_CLOCK, ("body",)), ("body", TERM, ())],
}

_BIND_ROLES = {BIND_VAR: NAME_VAR, BIND_CLOCK: NAME_CLOCK, BIND_TICK: NAME_TICK}


def _rebuild(t: Term, updates: dict[str, object]) -> Term:
    kwargs = {f.name: updates.get(f.name, getattr(t, f.name)) for f in fields(t)}
    return type(t)(**kwargs)


def fresh(base: str, avoid: Iterable[str]) -> str:
    avoid = set(avoid)
    stem = base.rstrip("0123456789") or base
    if base not in avoid:
        return base
    i = 1
    while f"{stem}{i}" in avoid:
        i += 1
    return f"{stem}{i}"


# ---------------------------------------------------------------------------
# Free names
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FreeNames:
    vars: frozenset[str]
    clocks: frozenset[str]
    ticks: frozenset[str]

    def all(self) -> frozenset[str]:
        return self.vars | self.clocks | self.ticks

    def __or__(self, other: "FreeNames") -> "FreeNames":
        return FreeNames(self.vars | other.vars,
                         self.clocks | other.clocks,
                         self.ticks | other.ticks)


EMPTY_FREE = FreeNames(frozenset(), frozenset(), frozenset())


def free_names(t) -> FreeNames:
    if isinstance(t, (AVar, AOp)):
        return FreeNames(alg_free_vars(t), frozenset(), frozenset())
    vs: set[str] = set()
    cs: set[str] = set()
    ts: set[str] = set()

    def go2(t: Term, bound: frozenset[str]) -> None:
        spec = _SPEC[type(t)]
        scoped = {sf for _, role, scope in spec if role in _BIND_ROLES
                  for sf in scope}
        binder_of = {sf: f for f, role, scope in spec
                     if role in _BIND_ROLES for sf in scope}
        for field, role, scope in spec:
            val = getattr(t, field)
            if role == TERM:
                if field in scoped:
                    go2(val, bound | {getattr(t, binder_of[field])})
                else:
                    go2(val, bound)
            elif role == NAME_VAR and val not in bound:
                vs.add(val)
            elif role == NAME_CLOCK and val not in bound:
                cs.add(val)
            elif role == NAME_TICK and val not in bound:
                ts.add(val)
            elif role == NAMESET:
                cs.update(k for k in val if k not in bound)

    go2(t, frozenset())
    return FreeNames(frozenset(vs), frozenset(cs), frozenset(ts))


# ---------------------------------------------------------------------------
# Renaming and substitution
# ---------------------------------------------------------------------------

def rename(t: Term, mapping: dict[str, str]) -> Term:
    """Capture-avoiding renaming of free names of any kind.

    Clock substitution A(k'/k) and tick substitution t(b/a) are instances.
    """
    mapping = {k: v for k, v in mapping.items() if k != v}
    if not mapping:
        return t
    return _rename(t, mapping)


def _rename(t: Term, mapping: dict[str, str]) -> Term:
    spec = _SPEC[type(t)]
    updates: dict[str, object] = {}
    # handle binders first: shadowing and capture
    scope_maps: dict[str, dict[str, str]] = {}
    scope_pre: dict[str, dict[str, str]] = {}
    for field, role, scope in spec:
        if role not in _BIND_ROLES:
            continue
        b = getattr(t, field)
        inner = {k: v for k, v in mapping.items() if k != b}
        # drop entries whose source is not free in the scope
        if inner:
            scope_free = frozenset().union(
                *(free_names(getattr(t, sf)).all() for sf in scope)) if scope else frozenset()
            inner = {k: v for k, v in inner.items() if k in scope_free}
        pre: dict[str, str] = {}
        if inner and b in inner.values():
            avoid = set(inner.values()) | set(inner.keys())
            for sf in scope:
                avoid |= free_names(getattr(t, sf)).all()
            b2 = fresh(b, avoid)
            pre = {b: b2}
            updates[field] = b2
        for sf in scope:
            scope_maps[sf] = inner
            scope_pre[sf] = pre
    for field, role, scope in spec:
        val = getattr(t, field)
        if role == TERM:
            m = scope_maps.get(field, mapping)
            pre = scope_pre.get(field, {})
            v = val
            if pre:
                v = _rename(v, pre)
            if m:
                v = _rename(v, m)
            if v is not val:
                updates[field] = v
        elif role in (NAME_VAR, NAME_CLOCK, NAME_TICK):
            if val in mapping:
                updates[field] = mapping[val]
        elif role == NAMESET:
            new = tuple(sorted({mapping.get(k, k) for k in val}))
            if new != val:
                updates[field] = new
    return _rebuild(t, updates) if updates else t


def subst(t: Term, x: str, u: Term) -> Term:
    """Capture-avoiding substitution of the term u for the variable x."""
    return _subst(t, x, u, free_names(u).all() | {x})


def _subst(t: Term, x: str, u: Term, avoid: frozenset[str]) -> Term:
    if isinstance(t, Var):
        return u if t.name == x else t
    spec = _SPEC[type(t)]
    updates: dict[str, object] = {}
    scope_skip: dict[str, bool] = {}
    scope_pre: dict[str, dict[str, str]] = {}
    for field, role, scope in spec:
        if role not in _BIND_ROLES:
            continue
        b = getattr(t, field)
        if b == x:
            for sf in scope:
                scope_skip[sf] = True
            continue
        pre: dict[str, str] = {}
        if b in avoid:
            scope_free: set[str] = set()
            for sf in scope:
                scope_free |= free_names(getattr(t, sf)).all()
            if any(x in free_names(getattr(t, sf)).vars for sf in scope):
                b2 = fresh(b, avoid | scope_free)
                pre = {b: b2}
                updates[field] = b2
        for sf in scope:
            scope_pre[sf] = pre
    for field, role, scope in spec:
        if role != TERM:
            continue
        val = getattr(t, field)
        if scope_skip.get(field):
            continue
        v = val
        pre = scope_pre.get(field, {})
        if pre:
            v = _rename(v, pre)
        v = _subst(v, x, u, avoid)
        if v is not val:
            updates[field] = v
    return _rebuild(t, updates) if updates else t


def clock_subst(t: Term, kappa: str, kappa2: str) -> Term:
    """A(k2/k): substitute the clock name kappa2 for kappa."""
    return rename(t, {kappa: kappa2})


def tick_subst(t: Term, alpha: str, beta: str) -> Term:
    """t(b/a): substitute the tick name beta for alpha."""
    return rename(t, {alpha: beta})


# ---------------------------------------------------------------------------
# Alpha equivalence
# ---------------------------------------------------------------------------

def alpha_eq(t: Term, u: Term) -> bool:
    return _alpha(t, u, {}, {}, [0])


def _alpha(t: Term, u: Term, env1: dict[str, int], env2: dict[str, int],
           counter: list[int]) -> bool:
    if type(t) is not type(u):
        return False
    spec = _SPEC[type(t)]
    binder_of = {sf: f for f, role, scope in spec
                 if role in _BIND_ROLES for sf in scope}
    for field, role, scope in spec:
        v1, v2 = getattr(t, field), getattr(u, field)
        if role == TERM:
            e1, e2 = env1, env2
            if field in binder_of:
                bf = binder_of[field]
                n = counter[0]
                counter[0] += 1
                e1 = {**env1, getattr(t, bf): n}
                e2 = {**env2, getattr(u, bf): n}
            if not _alpha(v1, v2, e1, e2, counter):
                return False
        elif role in (NAME_VAR, NAME_CLOCK, NAME_TICK):
            k1 = env1.get(v1, ("free", v1))
            k2 = env2.get(v2, ("free", v2))
            if k1 != k2:
                return False
        elif role == NAMESET:
            # entries are bound-binder indices (int) or ("free", name)
            key = (lambda e: (0, e, "") if isinstance(e, int)
                   else (1, -1, e[1]))
            s1 = tuple(sorted((env1.get(k, ("free", k)) for k in v1),
                              key=key))
            s2 = tuple(sorted((env2.get(k, ("free", k)) for k in v2),
                              key=key))
            if s1 != s2:
                return False
        elif role in _BIND_ROLES:
            continue
        else:
            if v1 != v2:
                return False
    return True


# ---------------------------------------------------------------------------
# Algebraic-theory terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AVar:
    name: str


@dataclass(frozen=True)
class AOp:
    op: str
    args: tuple


AlgTerm = AVar | AOp


def alg_free_vars(t: AlgTerm) -> frozenset[str]:
    if isinstance(t, AVar):
        return frozenset({t.name})
    out: set[str] = set()
    for a in t.args:
        out |= alg_free_vars(a)
    return frozenset(out)


def alg_subst(t: AlgTerm, env: dict[str, AlgTerm]) -> AlgTerm:
    if isinstance(t, AVar):
        return env.get(t.name, t)
    return AOp(t.op, tuple(alg_subst(a, env) for a in t.args))


def alg_size(t: AlgTerm) -> int:
    if isinstance(t, AVar):
        return 1
    return 1 + sum(alg_size(a) for a in t.args)
