"""Quantifier-commutation experiments in the presheaf model.

These check, fiberwise and by exhaustive enumeration, when ∃x.∀κ.φ and
∀κ.∃x.φ agree, and verify the canonical distribution maps for clock
quantification over sums and products.
"""
from __future__ import annotations

from dataclasses import dataclass

from .presheaf import Model, Psh, coproduct, forall_clk, product
from .timecat import ElObj, TimeMor, obj_key


@dataclass(frozen=True)
class FiberVerdict:
    lhs: bool          # ∃x. ∀κ. φ(x)
    rhs: bool          # ∀κ. ∃x. φ(x)
    witness: object    # least uniform witness in canonical order, or None


def _intros(model: Model, o) -> tuple[str, list[TimeMor]]:
    fresh = model.fresh_clock(o)
    ident = tuple((n, n) for n in o.names)
    return fresh, [TimeMor(o, o.add_clock(fresh, alpha), ident)
                   for alpha in range(model.bound)]


def exists_forall_experiment(model: Model, x: Psh, phi) -> dict:
    """Evaluate both quantifier orders at every object that keeps a fresh
    clock in reserve.

    x is a presheaf over the full time category and phi(u, e) a predicate
    on elements e ∈ x at marked-clock objects u.  The left side looks for
    a single element whose restriction satisfies phi at every stage of the
    fresh clock; the right side asks for a (possibly different) element at
    each stage.
    """
    assert x.cat.kind == "time"
    out = {}
    for o in model.time_inner.objects:
        fresh, intros = _intros(model, o)
        witness = None
        for e in x.fib[o]:
            if all(phi(ElObj(m.dst, fresh), x.act[m][e]) for m in intros):
                witness = e
                break
        rhs = all(any(phi(ElObj(m.dst, fresh), e2) for e2 in x.fib[m.dst])
                  for m in intros)
        out[obj_key(o)] = FiberVerdict(witness is not None, rhs, witness)
    return out


def unique_exists_check(model: Model, x: Psh, phi, n: int) -> dict:
    """Check the uniqueness hypothesis behind quantifier commutation.

    hypothesis_holds: at every marked-clock object u, any two phi-witnesses
    coincide unless the marked clock's stage is below n.  commutes: the two
    quantifier orders of exists_forall_experiment agree everywhere.
    """
    assert x.cat.kind == "time"
    hypothesis = True
    counterexample = None
    for u in model.slice.objects:
        stage = u.time.theta(u.clock)
        sats = [e for e in x.fib[u.time] if phi(u, e)]
        for i, e1 in enumerate(sats):
            for e2 in sats[i + 1:]:
                if e1 != e2 and stage >= n:
                    hypothesis = False
                    counterexample = (obj_key(u), e1, e2)
    verdicts = exists_forall_experiment(model, x, phi)
    commutes = all(v.lhs == v.rhs for v in verdicts.values())
    return {"hypothesis_holds": hypothesis,
            "counterexample": counterexample,
            "commutes": commutes,
            "fibers": verdicts}


# ---------------------------------------------------------------------------
# Distribution of ∀κ over sums and products
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DistReport:
    bijective: bool
    natural: bool

    @property
    def ok(self) -> bool:
        return self.bijective and self.natural


def _check_canonical(src: Psh, dst: Psh, mapping) -> DistReport:
    """mapping: per-object dict element -> element; check it is a natural
    bijection."""
    bijective = True
    for o in src.cat.objects:
        img = [mapping[o][e] for e in src.fib[o]]
        if len(set(img)) != len(src.fib[o]) or set(img) != set(dst.fib[o]):
            bijective = False
    natural = all(
        dst.act[m][mapping[m.src][e]] == mapping[m.dst][src.act[m][e]]
        for m in src.cat.morphisms for e in src.fib[m.src])
    return DistReport(bijective, natural)


def check_forall_sum_dist(model: Model, a: Psh, b: Psh) -> DistReport:
    """(∀κ.A) + (∀κ.B) → ∀κ.(A + B): inject every stage of a family."""
    lhs = coproduct(forall_clk(model, a), forall_clk(model, b))
    rhs = forall_clk(model, coproduct(a, b))

    def send(e):
        tag, fam = e
        return ("tup", tuple((alpha, (tag, comp)) for alpha, comp in fam[1]))

    mapping = {o: {e: send(e) for e in lhs.fib[o]} for o in lhs.cat.objects}
    return _check_canonical(lhs, rhs, mapping)


def check_forall_prod_dist(model: Model, a: Psh, b: Psh) -> DistReport:
    """∀κ.(A × B) → (∀κ.A) × (∀κ.B): split a family componentwise."""
    lhs = forall_clk(model, product(a, b))
    rhs = product(forall_clk(model, a), forall_clk(model, b))

    def send(e):
        entries = e[1]
        fam_a = tuple((alpha, pair[1]) for alpha, pair in entries)
        fam_b = tuple((alpha, pair[2]) for alpha, pair in entries)
        return ("pair", ("tup", fam_a), ("tup", fam_b))

    mapping = {o: {e: send(e) for e in lhs.fib[o]} for o in lhs.cat.objects}
    return _check_canonical(lhs, rhs, mapping)
