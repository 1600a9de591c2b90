"""Finite presheaves over the truncated time category.

Covariant presheaves carry explicit fibers and an action for every
morphism of the enumerated category.  The delay modality and clock
quantification are computed as honest chain limits (families compatible
along the stage-lowering morphisms); at finite truncation these limits
collapse to the top-stage fiber, which is exactly the truncation artifact
the force checker reports.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from ..theories import Budget, BudgetExceeded, canon_key, csorted
from .timecat import (ElObj, FinCategory, TimeMor, TimeObj,
                      enumerate_category, mor_key, obj_key, pool_names,
                      slice_category)


class FreshClockExhausted(Exception):
    pass


@dataclass
class Model:
    """Shared context: the enumerated time category and its slice by Clk."""
    pool: int = 2
    bound: int = 4
    budget: Budget = field(default_factory=Budget)

    def __post_init__(self):
        self.names = pool_names(self.pool)
        self.time = enumerate_category(self.pool, self.bound)
        self.slice = slice_category(self.time)
        # full subcategories of objects that keep a clock name in reserve;
        # clock quantification produces presheaves over these
        self.time_inner = _full_subcat(
            self.time, lambda o: len(o.names) < self.pool)
        self.slice_inner = _full_subcat(
            self.slice, lambda o: len(o.time.names) < self.pool)

    def fresh_clock(self, e: TimeObj) -> str:
        for n in self.names:
            if n not in e.names:
                return n
        raise FreshClockExhausted(
            f"object already uses the full pool {self.names}")

    def cat(self, kind: str) -> FinCategory:
        return self.time if kind == "time" else self.slice


def _full_subcat(cat: FinCategory, keep) -> FinCategory:
    objs = tuple(o for o in cat.objects if keep(o))
    kept = set(objs)
    mors = tuple(m for m in cat.morphisms
                 if m.src in kept and m.dst in kept)
    return FinCategory(objs, mors, cat.kind)


def restrict_to(x: Psh, sub: FinCategory) -> Psh:
    """Restrict a presheaf to a full subcategory of its base."""
    return Psh(sub, {o: x.fib[o] for o in sub.objects},
               {m: x.act[m] for m in sub.morphisms})


def align(a: Psh, b: Psh) -> tuple[Psh, Psh]:
    """Put two presheaves over the same base by restricting the larger
    one to the smaller's (full sub)category."""
    if len(a.cat.objects) > len(b.cat.objects):
        return restrict_to(a, b.cat), b
    if len(b.cat.objects) > len(a.cat.objects):
        return a, restrict_to(b, a.cat)
    return a, b


@dataclass
class Psh:
    cat: FinCategory
    fib: dict      # obj -> tuple of elements, canonical order
    act: dict      # TimeMor -> dict element -> element

    def restrict(self, m: TimeMor, x):
        return self.act[m][x]


def _sorted_fib(fib: dict) -> dict:
    return {o: tuple(csorted(v)) for o, v in fib.items()}


def const_psh(cat: FinCategory, elems) -> Psh:
    elems = tuple(csorted(elems))
    return Psh(cat, {o: elems for o in cat.objects},
               {m: {x: x for x in elems} for m in cat.morphisms})


def clk_psh(cat: FinCategory) -> Psh:
    """The presheaf of clocks in scope — the canonical non-example for
    invariance under clock introduction."""
    assert cat.kind == "time"
    return Psh(cat, {o: o.names for o in cat.objects},
               {m: {a: m.apply(a) for a in m.src.names}
                for m in cat.morphisms})


def product(a: Psh, b: Psh) -> Psh:
    a, b = align(a, b)
    fib = {o: tuple(("pair", x, y) for x in a.fib[o] for y in b.fib[o])
           for o in a.cat.objects}
    act = {m: {("pair", x, y): ("pair", a.act[m][x], b.act[m][y])
               for x in a.fib[m.src] for y in b.fib[m.src]}
           for m in a.cat.morphisms}
    return Psh(a.cat, fib, act)


def coproduct(a: Psh, b: Psh) -> Psh:
    a, b = align(a, b)
    fib = {o: tuple(itertools.chain((("inl", x) for x in a.fib[o]),
                                    (("inr", y) for y in b.fib[o])))
           for o in a.cat.objects}
    act = {}
    for m in a.cat.morphisms:
        d = {("inl", x): ("inl", a.act[m][x]) for x in a.fib[m.src]}
        d.update({("inr", y): ("inr", b.act[m][y]) for y in b.fib[m.src]})
        act[m] = d
    return Psh(a.cat, fib, act)


# ---------------------------------------------------------------------------
# Exponentials
# ---------------------------------------------------------------------------

def arrow(a: Psh, b: Psh, budget: Budget | None = None) -> Psh:
    """The exponential B^A: fiber at c is the set of natural families
    φ_f : A(d) → B(d) indexed by morphisms f : c → d.  Elements encode φ
    positionally over the canonically sorted list of morphisms out of c."""
    budget = budget or Budget()
    a, b = align(a, b)
    cat = a.cat
    out = {o: [] for o in cat.objects}
    for m in cat.morphisms:
        out[m.src].append(m)
    for o in out:
        out[o].sort(key=mor_key)
    index = {o: {m: i for i, m in enumerate(out[o])} for o in cat.objects}

    fib = {}
    for c in cat.objects:
        fib[c] = tuple(_nats_at(c, a, b, out, index, cat, budget))
    act = {}
    for m in cat.morphisms:
        d = {}
        for phi in fib[m.src]:
            entries = []
            for f in out[m.dst]:
                composed = cat.compose(f, m)
                entries.append(phi[1][index[m.src][composed]])
            d[phi] = ("nat", tuple(entries))
        act[m] = d
    return Psh(cat, fib, act)


def _nats_at(c, a: Psh, b: Psh, out, index, cat, budget: Budget):
    mors = out[c]
    variables = [(i, x) for i, f in enumerate(mors) for x in a.fib[f.dst]]

    def propagate(assign, queue):
        # assign is closed under naturality except for the queued entries
        while queue:
            (i, x), y = queue.pop()
            f = mors[i]
            for g in out[f.dst]:
                j = index[c][cat.compose(g, f)]
                x2, y2 = a.act[g][x], b.act[g][y]
                cur = assign.get((j, x2))
                if cur is None:
                    assign[(j, x2)] = y2
                    queue.append(((j, x2), y2))
                elif cur != y2:
                    return False
        return True

    results = []

    def search(assign):
        if len(results) > budget.max_elements:
            raise BudgetExceeded("exponential fiber exceeds budget")
        for v in variables:
            if v not in assign:
                i, x = v
                for y in b.fib[mors[i].dst]:
                    trial = dict(assign)
                    trial[v] = y
                    if propagate(trial, [(v, y)]):
                        search(trial)
                return
        # encode positionally: per morphism f (sorted), the images of
        # A(dst f) in canonical fiber order
        results.append(("nat", tuple(
            tuple(assign[(i, x)] for x in a.fib[f.dst])
            for i, f in enumerate(mors))))

    search({})
    return csorted(set(results))


# ---------------------------------------------------------------------------
# Chain limits, delay, clock quantification
# ---------------------------------------------------------------------------

def _chain_limit(psh: Psh, chain_objs, chain_mor) -> list:
    """Limit of a finite inverse chain o_0 ← o_1 ← …: families compatible
    with the stage-lowering maps, encoded ("tup", ((0,x_0), …)).  The top
    element determines the family."""
    k = len(chain_objs)
    if k == 0:
        return [("tup", ())]
    elems = []
    top = chain_objs[-1]
    for x in psh.fib[top]:
        family = [None] * k
        family[k - 1] = x
        for beta in range(k - 2, -1, -1):
            m = chain_mor(beta + 1, beta)
            family[beta] = psh.act[m][family[beta + 1]]
        elems.append(("tup", tuple(enumerate(family))))
    return csorted(set(elems))


def later(model: Model, x: Psh) -> Psh:
    """▷X: the fiber at (E, θ, λ) is the limit of X over the stages below
    θ(λ); a singleton at stage 0."""
    assert x.cat.kind == "slice"
    cat = x.cat

    def stage_obj(o: ElObj, alpha: int) -> ElObj:
        return ElObj(o.time.with_stage(o.clock, alpha), o.clock)

    def chain_mor_for(o: ElObj):
        def cm(hi: int, lo: int) -> TimeMor:
            return TimeMor(stage_obj(o, hi), stage_obj(o, lo),
                           tuple((n, n) for n in o.time.names))
        return cm

    fib = {}
    for o in cat.objects:
        k = o.time.theta(o.clock)
        fib[o] = tuple(_chain_limit(
            x, [stage_obj(o, a) for a in range(k)], chain_mor_for(o)))
    act = {}
    for m in cat.morphisms:
        src, dst = m.src, m.dst
        k2 = dst.time.theta(dst.clock)
        d = {}
        for fam in fib[src]:
            entries = []
            for beta in range(k2):
                stage_m = TimeMor(stage_obj(src, beta),
                                  stage_obj(dst, beta), m.sigma)
                entries.append((beta, x.act[stage_m][dict(fam[1])[beta]]))
            d[fam] = ("tup", tuple(entries))
        act[m] = d
    return Psh(cat, fib, act)


def forall_clk(model: Model, x: Psh) -> Psh:
    """∀κ.X: at (E, θ) the limit over all stages of X at a deterministic
    fresh clock.  The result lives over the inner subcategory of objects
    that keep a clock name in reserve; the argument must live over the
    full slice so that the fresh clock can be added everywhere."""
    assert x.cat.kind == "slice"
    if x.cat is not model.slice:
        raise FreshClockExhausted(
            "clock quantification needs a presheaf over the full slice "
            "(nested quantifiers exceed the clock pool)")
    cat = model.time_inner

    def stage_obj(o: TimeObj, fresh: str, alpha: int) -> ElObj:
        return ElObj(o.add_clock(fresh, alpha), fresh)

    fib = {}
    for o in cat.objects:
        fresh = model.fresh_clock(o)

        def cm(hi, lo, o=o, fresh=fresh):
            names = o.add_clock(fresh, hi).names
            return TimeMor(stage_obj(o, fresh, hi),
                           stage_obj(o, fresh, lo),
                           tuple((n, n) for n in names))
        fib[o] = tuple(_chain_limit(
            x, [stage_obj(o, fresh, a) for a in range(model.bound)], cm))
    act = {}
    for m in cat.morphisms:
        f_src = model.fresh_clock(m.src)
        f_dst = model.fresh_clock(m.dst)
        sigma_plus = tuple(sorted(m.sigma + ((f_src, f_dst),)))
        d = {}
        for fam in fib[m.src]:
            entries = []
            for alpha in range(model.bound):
                stage_m = TimeMor(stage_obj(m.src, f_src, alpha),
                                  stage_obj(m.dst, f_dst, alpha),
                                  sigma_plus)
                entries.append((alpha, x.act[stage_m][dict(fam[1])[alpha]]))
            d[fam] = ("tup", tuple(entries))
        act[m] = d
    return Psh(cat, fib, act)


def weaken(model: Model, x: Psh) -> Psh:
    """Reindex a presheaf on the time category along the projection from
    the slice (forget the marked clock)."""
    assert x.cat.kind == "time"
    cat = model.slice if x.cat is model.time else model.slice_inner
    fib = {o: x.fib[o.time] for o in cat.objects}
    act = {m: x.act[TimeMor(m.src.time, m.dst.time, m.sigma)]
           for m in cat.morphisms}
    return Psh(cat, fib, act)


# ---------------------------------------------------------------------------
# Structural checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckOutcome:
    ok: bool
    counterexample: object = None


def check_functoriality(x: Psh) -> CheckOutcome:
    for o in x.cat.objects:
        ident = x.cat.identity(o)
        for e in x.fib[o]:
            if x.act[ident][e] != e:
                return CheckOutcome(False, ("identity", obj_key(o), e))
    for g, f in x.cat.composable_pairs():
        gf = x.cat.compose(g, f)
        for e in x.fib[f.src]:
            if x.act[gf][e] != x.act[g][x.act[f][e]]:
                return CheckOutcome(False, ("composition", mor_key(f),
                                            mor_key(g), e))
    return CheckOutcome(True)


def clock_intros(model: Model, kind: str):
    """All clock-introduction morphisms ι : o → o+λ@α with λ fresh."""
    out = []
    if kind == "time":
        for o in model.time.objects:
            for lam in model.names:
                if lam in o.names:
                    continue
                for alpha in range(model.bound):
                    out.append(TimeMor(o, o.add_clock(lam, alpha),
                                       tuple((n, n) for n in o.names)))
    else:
        for o in model.slice.objects:
            for lam in model.names:
                if lam in o.time.names:
                    continue
                for alpha in range(model.bound):
                    out.append(TimeMor(
                        o, ElObj(o.time.add_clock(lam, alpha), o.clock),
                        tuple((n, n) for n in o.time.names)))
    return out


def check_invariance(model: Model, x: Psh) -> CheckOutcome:
    """Def.-1 invariance: every clock-introduction map acts bijectively."""
    domain = set(x.cat.objects)
    for m in clock_intros(model, x.cat.kind):
        if m.src not in domain or m.dst not in domain:
            continue
        img = [x.act[m][e] for e in x.fib[m.src]]
        if len(set(img)) != len(x.fib[m.src]) or \
                set(img) != set(x.fib[m.dst]):
            return CheckOutcome(False, mor_key(m))
    return CheckOutcome(True)
