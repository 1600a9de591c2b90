"""Finite presheaf model over the truncated time category."""
import itertools

import pytest

from clott.coalgebra import parse_functor
from clott.model import (FreshClockExhausted, MArrow, MClk, MEq, MExists,
                         MFin, MForall, MForallFam, MLater, MMu, MProd,
                         MSum, MTop, Model, TimeObj, align, arrow,
                         check_forall_prod_dist, check_forall_sum_dist,
                         check_force, check_functoriality, check_invariance,
                         clk_psh, const_psh, coproduct, enumerate_category,
                         eval_type, exists_forall_experiment, forall_clk,
                         later, mu, product, restrict_to, slice_category,
                         unique_exists_check, weaken)
from clott.coalgebra import functor_eval
from clott.theories import Budget


MODEL = Model(pool=2, bound=4)


# -- the time category --------------------------------------------------------

def test_category_hand_counts_pool1_bound2():
    cat = enumerate_category(1, 2)
    # objects: {}, {l0 @ 0}, {l0 @ 1}; morphisms: 3 identities,
    # {}-inclusions into both singletons, and l0@1 -> l0@0
    assert len(cat.objects) == 3
    assert len(cat.morphisms) == 6


def test_category_counts_pool2_bound2():
    cat = enumerate_category(2, 2)
    # 1 empty + 2*2 singletons + 4 two-clock assignments
    assert len(cat.objects) == 9


def test_morphisms_respect_stage_order():
    cat = enumerate_category(2, 3)
    for m in cat.morphisms:
        if isinstance(m.src, TimeObj):
            for n, img in m.sigma:
                assert m.dst.theta(img) <= m.src.theta(n)


def test_category_laws():
    cat = enumerate_category(1, 3)
    for o in cat.objects:
        i = cat.identity(o)
        assert i.src == o and i.dst == o
    for g, f in cat.composable_pairs():
        gf = cat.compose(g, f)
        assert gf in cat.morphisms


def test_slice_category_preserves_marked_clock():
    cat = enumerate_category(2, 2)
    sl = slice_category(cat)
    for m in sl.morphisms:
        assert m.apply(m.src.clock) == m.dst.clock


def test_invalid_parameters_rejected():
    with pytest.raises(ValueError):
        enumerate_category(0, 4)
    with pytest.raises(ValueError):
        enumerate_category(1, 1)


# -- presheaf constructions ----------------------------------------------------

def test_const_psh_functorial_and_invariant():
    x = const_psh(MODEL.time, (0, 1, 2))
    assert check_functoriality(x).ok
    assert check_invariance(MODEL, x).ok


def test_clk_fails_invariance():
    bad = check_invariance(MODEL, clk_psh(MODEL.time))
    assert not bad.ok and bad.counterexample is not None


def test_product_coproduct_fiber_counts():
    a = const_psh(MODEL.time, (0, 1))
    b = const_psh(MODEL.time, ("x", "y", "z"))
    p, s = product(a, b), coproduct(a, b)
    for o in MODEL.time.objects:
        assert len(p.fib[o]) == len(a.fib[o]) * len(b.fib[o])
        assert len(s.fib[o]) == len(a.fib[o]) + len(b.fib[o])
    assert check_functoriality(p).ok and check_functoriality(s).ok


def _brute_nats(a, b):
    """Oracle: all natural families a => b by direct enumeration."""
    objs = list(a.cat.objects)
    pools = [list(itertools.product(b.fib[o], repeat=len(a.fib[o])))
             for o in objs]
    out = []
    for choice in itertools.product(*pools):
        comp = {o: dict(zip(a.fib[o], images))
                for o, images in zip(objs, choice)}
        if all(comp[m.dst][a.act[m][e]] == b.act[m][comp[m.src][e]]
               for m in a.cat.morphisms for e in a.fib[m.src]):
            out.append(comp)
    return out


def test_arrow_fibers_match_brute_force_oracle():
    small = Model(pool=1, bound=2)
    a = const_psh(small.time, (0, 1))
    b = const_psh(small.time, ("x", "y"))
    h = arrow(a, b)
    # the fiber at o is the set of natural families on the coslice under o;
    # at the initial object (empty clock set) that is every natural
    # transformation a => b
    empty = TimeObj((), ())
    assert len(h.fib[empty]) == len(_brute_nats(a, b))
    assert check_functoriality(h).ok


def test_later_shifts_stages():
    x = const_psh(MODEL.slice, (0, 1, 2))
    lx = later(MODEL, x)
    for o in MODEL.slice.objects:
        k = o.time.theta(o.clock)
        assert len(lx.fib[o]) == (1 if k == 0 else 3)
    assert check_functoriality(lx).ok


def test_forall_requires_full_slice():
    inner = const_psh(MODEL.slice_inner, (0, 1))
    with pytest.raises(FreshClockExhausted):
        forall_clk(MODEL, inner)


def test_forall_constant_is_constant():
    x = const_psh(MODEL.slice, (0, 1))
    fx = forall_clk(MODEL, x)
    assert all(len(fx.fib[o]) == 2 for o in fx.cat.objects)
    assert check_functoriality(fx).ok


def test_weaken_moves_time_to_slice():
    x = const_psh(MODEL.time, (0, 1))
    w = weaken(MODEL, x)
    assert w.cat is MODEL.slice
    for o in MODEL.slice.objects:
        assert len(w.fib[o]) == len(x.fib[o.time])
    assert check_functoriality(w).ok


def test_restrict_and_align():
    x = const_psh(MODEL.time, (0, 1))
    r = restrict_to(x, MODEL.time_inner)
    assert r.cat is MODEL.time_inner
    y = const_psh(MODEL.time_inner, ("a",))
    a2, b2 = align(x, y)
    assert a2.cat is b2.cat is MODEL.time_inner


# -- eval_type corpus ---------------------------------------------------------

CORPUS = [
    ("fin", MFin(3), False),
    ("prod", MProd(MFin(2), MFin(2)), False),
    ("sum", MSum(MFin(1), MFin(2)), False),
    ("arrow", MArrow(MFin(2), MFin(2)), False),
    ("forall-later", MForall(MLater(MFin(2))), False),
    ("later", MLater(MFin(2)), True),
    ("mu", MMu(parse_functor("sum(const{u},id)")), True),
    ("eq", MEq(MFin(2)), False),
    ("top", MTop(), False),
    ("exists", MExists(MFin(3), lambda o, e: e >= 1), False),
    ("forall-fam", MForallFam(MFin(2), lambda o, e: True), False),
]


@pytest.mark.parametrize("name,expr,sliced", CORPUS,
                         ids=[c[0] for c in CORPUS])
def test_eval_type_functorial_and_invariant(name, expr, sliced):
    psh = eval_type(MODEL, expr, slice_=sliced)
    assert check_functoriality(psh).ok
    assert check_invariance(MODEL, psh).ok


def test_later_and_mu_require_slice():
    with pytest.raises(Exception):
        eval_type(MODEL, MLater(MFin(2)), slice_=False)


def test_prop_fibers_are_subsingletons():
    psh = eval_type(MODEL, MExists(MFin(3), lambda o, e: e >= 1))
    for o in psh.cat.objects:
        assert len(psh.fib[o]) <= 1


# -- distribution of clock quantification -------------------------------------

def test_forall_distributes_over_sum_and_product():
    a = const_psh(MODEL.slice, (0, 1))
    b = const_psh(MODEL.slice, ("x", "y", "z"))
    assert check_forall_sum_dist(MODEL, a, b).ok
    assert check_forall_prod_dist(MODEL, a, b).ok


# -- guarded fixpoints ---------------------------------------------------------

@pytest.mark.parametrize("fs", ["sum(const{u},id)", "prod(const{a,b},id)",
                                "pf(prod(const{l},id))"])
def test_mu_stage_law(fs):
    small = Model(pool=1, bound=4)
    f = parse_functor(fs)
    p = mu(small, f)
    sizes = {o.time.theta(o.clock): len(p.fib[o])
             for o in small.slice.objects}
    n, oracle = 1, {}
    for k in range(small.bound):
        n = len(functor_eval(f, range(n), Budget()))
        oracle[k] = n
    assert sizes == oracle
    assert check_functoriality(p).ok


# -- force ---------------------------------------------------------------------

def test_force_constant_family_iso():
    r = check_force(MODEL, const_psh(MODEL.slice, (0, 1)))
    assert r.iso and r.first_failure is None


def test_force_delay_truncation_artifact():
    delay = mu(MODEL, parse_functor("sum(const{u},id)"))
    r = check_force(MODEL, delay)
    assert not r.iso
    assert r.truncation_artifact
    assert r.first_failure is not None


# -- experiments ---------------------------------------------------------------

def test_example4_witness_is_bound_minus_one():
    for n in (3, 4, 5):
        m = Model(pool=2, bound=n)
        x = const_psh(m.time, tuple(range(n)))
        vs = exists_forall_experiment(
            m, x, lambda u, e: u.time.theta(u.clock) <= e)
        assert all(v.witness == n - 1 for v in vs.values()), n
        assert all(v.lhs and v.rhs for v in vs.values())


def test_downward_closed_predicates_commute():
    two = const_psh(MODEL.time, (0, 1))
    for mask in range(4):
        keep = {e for e in (0, 1) if mask & (1 << e)}

        def phi(u, e, keep=keep):
            return e in keep or u.time.theta(u.clock) == 0
        vs = exists_forall_experiment(MODEL, two, phi)
        assert all(v.lhs == v.rhs for v in vs.values()), mask


def test_unique_exists_commutes():
    two = const_psh(MODEL.time, (0, 1))
    out = unique_exists_check(
        MODEL, two, lambda u, e: e == 1 or u.time.theta(u.clock) == 0, n=1)
    assert out["hypothesis_holds"] and out["commutes"]


def test_non_unique_witnesses_flagged():
    two = const_psh(MODEL.time, (0, 1))
    out = unique_exists_check(MODEL, two, lambda u, e: True, n=0)
    assert not out["hypothesis_holds"]
    assert out["counterexample"] is not None
