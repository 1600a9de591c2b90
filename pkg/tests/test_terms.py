"""Properties of the raw syntax: substitution, free names, alpha-equality."""
from hypothesis import given, settings

from clott.terms import (AOp, AVar, App, Const, Forall, Lam, Later, Pi,
                         TickAbs, Var, alg_free_vars, alpha_eq, clock_subst,
                         free_names, fresh, rename, subst, tick_subst)

from .strategies import alg_terms, names, terms


@given(terms())
def test_alpha_eq_reflexive(t):
    assert alpha_eq(t, t)


def test_alpha_eq_binders():
    assert alpha_eq(Lam("x", Var("x")), Lam("y", Var("y")))
    assert not alpha_eq(Lam("x", Var("x")), Lam("y", Var("x")))
    assert alpha_eq(Pi("x", Const("unit"), Var("x")),
                    Pi("z", Const("unit"), Var("z")))
    assert alpha_eq(TickAbs("a", "k", Var("x")),
                    TickAbs("b", "k", Var("x")))
    assert not alpha_eq(Forall("k", Later("a", "k", Const("unit"))),
                        Forall("k2", Later("a", "k", Const("unit"))))


@given(terms(), names)
def test_subst_identity_on_nonfree(t, x):
    if x not in free_names(t).vars:
        assert subst(t, x, Const("tt")) == t


@given(terms(), names)
def test_subst_removes_free_variable(t, x):
    r = subst(t, x, Const("tt"))
    assert x not in free_names(r).vars


@given(terms(), names)
def test_subst_var_for_itself_is_alpha_identity(t, x):
    assert alpha_eq(subst(t, x, Var(x)), t)


@given(terms())
def test_rename_clock_swaps_free_clocks(t):
    r = clock_subst(t, "k1", "k2")
    assert "k1" not in free_names(r).clocks


@given(terms())
def test_tick_subst_removes_free_tick(t):
    r = tick_subst(t, "a1", "a2")
    assert "a1" not in free_names(r).ticks


@given(terms())
def test_rename_preserves_alpha_class_on_fresh_targets(t):
    # renaming into entirely fresh names and back is the identity up to alpha
    there = rename(t, {"x": "x_tmp", "y": "y_tmp"})
    back = rename(there, {"x_tmp": "x", "y_tmp": "y"})
    assert alpha_eq(back, t)


def test_fresh_avoids():
    assert fresh("x", {"x"}) != "x"
    assert fresh("x", set()) == "x"
    assert fresh("x1", {"x1", "x2"}) not in {"x1", "x2"}


def test_free_names_app():
    t = App(Lam("x", Var("x")), Var("y"))
    fn = free_names(t)
    assert fn.vars == frozenset({"y"})


@given(alg_terms())
def test_alg_free_vars_subterm_monotone(t):
    if isinstance(t, AOp):
        for a in t.args:
            assert alg_free_vars(a) <= alg_free_vars(t)
    else:
        assert alg_free_vars(t) == frozenset({t.name})
