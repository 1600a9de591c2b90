"""Model-level type expressions and their presheaf evaluation.

Expressions are evaluated either over the time category (closed types) or
over its slice by Clk (types mentioning the one slice clock).  Guarded
fixpoints μX.F(▷X) are computed by well-founded recursion on the marked
clock's stage, reusing the coalgebra module's functor machinery.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..coalgebra import FunctorExpr, functor_eval, functor_map_all
from ..theories import Budget, csorted
from .presheaf import (CheckOutcome, Model, Psh, arrow, clk_psh,
                       coproduct, const_psh, forall_clk, later, product,
                       weaken)
from .timecat import ElObj, TimeMor, obj_key


class TypeExprM:
    pass


@dataclass(frozen=True)
class MFin(TypeExprM):
    size: int


@dataclass(frozen=True)
class MClk(TypeExprM):
    """The presheaf of clocks — the stated non-example for invariance."""


@dataclass(frozen=True)
class MProd(TypeExprM):
    left: TypeExprM
    right: TypeExprM


@dataclass(frozen=True)
class MSum(TypeExprM):
    left: TypeExprM
    right: TypeExprM


@dataclass(frozen=True)
class MArrow(TypeExprM):
    dom: TypeExprM
    cod: TypeExprM


@dataclass(frozen=True)
class MLater(TypeExprM):
    body: TypeExprM


@dataclass(frozen=True)
class MForall(TypeExprM):
    body: TypeExprM


@dataclass(frozen=True)
class MMu(TypeExprM):
    """μX.F(▷X) for a coalgebra functor expression F."""
    functor: FunctorExpr


@dataclass(frozen=True)
class MTop(TypeExprM):
    pass


@dataclass(frozen=True)
class MBot(TypeExprM):
    pass


@dataclass(frozen=True)
class MAnd(TypeExprM):
    left: TypeExprM
    right: TypeExprM


@dataclass(frozen=True)
class MOr(TypeExprM):
    left: TypeExprM
    right: TypeExprM


@dataclass(frozen=True)
class MEq(TypeExprM):
    """The equality predicate of a type, as the diagonal subpresheaf of
    its square."""
    arg: TypeExprM


@dataclass(frozen=True)
class MExists(TypeExprM):
    """∃ over a family given as a monotone predicate callable(obj, elem)."""
    arg: TypeExprM
    pred: object


@dataclass(frozen=True)
class MForallFam(TypeExprM):
    arg: TypeExprM
    pred: object


PRF = ("prf",)


def eval_type(model: Model, e: TypeExprM, slice_: bool = False) -> Psh:
    """Evaluate a type expression to a finite presheaf over the time
    category (slice_=False) or over its slice by Clk (slice_=True)."""
    cat = model.cat("slice" if slice_ else "time")
    if isinstance(e, MFin):
        return const_psh(cat, tuple(range(e.size)))
    if isinstance(e, MClk):
        clk = clk_psh(model.time)
        return weaken(model, clk) if slice_ else clk
    if isinstance(e, MProd):
        return product(eval_type(model, e.left, slice_),
                       eval_type(model, e.right, slice_))
    if isinstance(e, MSum):
        return coproduct(eval_type(model, e.left, slice_),
                         eval_type(model, e.right, slice_))
    if isinstance(e, MArrow):
        return arrow(eval_type(model, e.dom, slice_),
                     eval_type(model, e.cod, slice_), model.budget)
    if isinstance(e, MLater):
        if not slice_:
            raise ValueError("the delay modality needs the slice clock")
        return later(model, eval_type(model, e.body, True))
    if isinstance(e, MForall):
        body = eval_type(model, e.body, True)
        quantified = forall_clk(model, body)
        return weaken(model, quantified) if slice_ else quantified
    if isinstance(e, MMu):
        if not slice_:
            raise ValueError("guarded fixpoints need the slice clock")
        return mu(model, e.functor)
    if isinstance(e, MTop):
        return const_psh(cat, (PRF,))
    if isinstance(e, MBot):
        return const_psh(cat, ())
    if isinstance(e, (MAnd, MOr)):
        l = eval_type(model, e.left, slice_)
        r = eval_type(model, e.right, slice_)
        fib = {o: (PRF,) if (bool(l.fib[o]) and bool(r.fib[o])
                             if isinstance(e, MAnd)
                             else bool(l.fib[o]) or bool(r.fib[o])) else ()
               for o in cat.objects}
        return _prop_psh(cat, fib)
    if isinstance(e, MEq):
        x = eval_type(model, e.arg, slice_)
        fib = {o: tuple(("pair", a, a) for a in x.fib[o])
               for o in cat.objects}
        act = {m: {("pair", a, a): ("pair", x.act[m][a], x.act[m][a])
                   for a in x.fib[m.src]} for m in cat.morphisms}
        return Psh(cat, fib, act)
    if isinstance(e, (MExists, MForallFam)):
        x = eval_type(model, e.arg, slice_)
        quant = any if isinstance(e, MExists) else all
        fib = {o: (PRF,) if quant(e.pred(o, a) for a in x.fib[o]) else ()
               for o in cat.objects}
        return _prop_psh(cat, fib)
    raise TypeError(f"unknown type expression {type(e).__name__}")


def _prop_psh(cat, fib) -> Psh:
    act = {m: ({PRF: PRF} if fib[m.src] else {}) for m in cat.morphisms}
    bad = [m for m in cat.morphisms if fib[m.src] and not fib[m.dst]]
    if bad:
        raise ValueError("predicate family is not monotone along "
                         "restriction; not a presheaf")
    return Psh(cat, fib, act)


# ---------------------------------------------------------------------------
# Guarded fixpoints
# ---------------------------------------------------------------------------

def mu(model: Model, f: FunctorExpr) -> Psh:
    """μX.F(▷X): the fiber at stage k is F applied to the chain limit of
    the fibers at stages below k, so stage k is F^{k+1}(1) up to
    isomorphism (the cross-module stage law).

    The ▷-fibers are relabelled with small integers before F is applied,
    so the elements stay shallow even when the fibers blow up (compare the
    relabelled terminal sequences in the coalgebra module)."""
    cat = model.slice
    fib: dict = {}          # object -> tuple of F(labels) elements
    lat_decode: dict = {}   # object -> label -> family tuple of fib elems
    lat_encode: dict = {}   # object -> family tuple -> label
    memo: dict = {}

    def stage_obj(o: ElObj, alpha: int) -> ElObj:
        return ElObj(o.time.with_stage(o.clock, alpha), o.clock)

    for o in sorted(cat.objects, key=lambda o: o.time.theta(o.clock)):
        k = o.time.theta(o.clock)
        if k == 0:
            families = [()]
        else:
            families = []
            for x in fib[stage_obj(o, k - 1)]:
                family = [None] * k
                family[k - 1] = x
                for beta in range(k - 2, -1, -1):
                    m = TimeMor(stage_obj(o, beta + 1), stage_obj(o, beta),
                                tuple((n, n) for n in o.time.names))
                    family[beta] = _mu_act(f, fib, lat_decode, lat_encode,
                                           model, m, memo)[family[beta + 1]]
                families.append(tuple(family))
            families = csorted(set(families))
        lat_decode[o] = dict(enumerate(families))
        lat_encode[o] = {fam: i for i, fam in enumerate(families)}
        labels = tuple(range(len(families)))
        fib[o] = tuple(functor_eval(f, labels, model.budget))

    act = {m: _mu_act(f, fib, lat_decode, lat_encode, model, m, memo)
           for m in cat.morphisms}
    return Psh(cat, fib, act)


def _mu_act(f: FunctorExpr, fib, lat_decode, lat_encode, model: Model,
            m: TimeMor, memo: dict):
    if m in memo:
        return memo[m]

    def stage_mor(beta: int) -> TimeMor:
        return TimeMor(ElObj(m.src.time.with_stage(m.src.clock, beta),
                             m.src.clock),
                       ElObj(m.dst.time.with_stage(m.dst.clock, beta),
                             m.dst.clock), m.sigma)

    k2 = m.dst.time.theta(m.dst.clock)
    stage_acts = [_mu_act(f, fib, lat_decode, lat_encode, model,
                          stage_mor(beta), memo) for beta in range(k2)]
    label_map = {}
    for lbl, fam in lat_decode[m.src].items():
        mapped = tuple(stage_acts[beta][fam[beta]] for beta in range(k2))
        label_map[lbl] = lat_encode[m.dst][mapped]
    if all(k == v for k, v in label_map.items()) and m.src == m.dst:
        out = {v: v for v in fib[m.src]}
    else:
        out = functor_map_all(f, label_map, fib[m.src])
    memo[m] = out
    return out


# ---------------------------------------------------------------------------
# Force
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ForceReport:
    iso: bool
    first_failure: object          # (object key, stage) or None
    truncation_artifact: bool
    stabilized: bool               # chain maps bijective from stage N-2 up


def check_force(model: Model, a: Psh) -> ForceReport:
    """Compare the canonical map (∀κ.A) → ∀κ.▷κA fiberwise.

    At finite truncation the map forgets the top-stage component, so it is
    an isomorphism exactly when A's fresh-clock chain stabilizes by stage
    N−2; a failure in the non-stabilized case is flagged as a truncation
    artifact rather than a genuine one.
    """
    assert a.cat.kind == "slice"
    lhs = forall_clk(model, a)
    rhs = forall_clk(model, later(model, a))
    n = model.bound
    stabilized = True
    failure = None
    for o in model.time_inner.objects:
        fresh = model.fresh_clock(o)
        top = ElObj(o.add_clock(fresh, n - 1), fresh)
        below = ElObj(o.add_clock(fresh, n - 2), fresh)
        step = TimeMor(top, below, tuple((x, x) for x in top.time.names))
        img = [a.act[step][e] for e in a.fib[top]]
        if len(set(img)) != len(a.fib[top]) or set(img) != set(a.fib[below]):
            stabilized = False
        # canonical map: truncate each family
        image = set()
        injective = True
        for fam in lhs.fib[o]:
            entries = dict(fam[1])
            trunc = ("tup", tuple(
                (alpha, ("tup", tuple((b, entries[b]) for b in range(alpha))))
                for alpha in range(n)))
            if trunc in image:
                injective = False
            image.add(trunc)
        if injective and image == set(rhs.fib[o]):
            continue
        if failure is None:
            stage = _first_failure_stage(model, a, o, fresh)
            failure = (obj_key(o), stage)
    if failure is None:
        return ForceReport(True, None, False, stabilized)
    return ForceReport(False, failure, not stabilized, stabilized)


def _first_failure_stage(model: Model, a: Psh, o, fresh: str) -> int:
    """Least stage m whose forgetful map from the limit over stages < m+1
    to the limit over stages < m fails to be bijective."""
    sizes = []
    for alpha in range(model.bound):
        u = ElObj(o.add_clock(fresh, alpha), fresh)
        sizes.append(len(a.fib[u]))
    # the limit over stages < m is the fiber at m-1 (1 when m = 0)
    lim = [1] + sizes
    for m in range(model.bound):
        if lim[m + 1] != lim[m]:
            return m
    return model.bound - 1
