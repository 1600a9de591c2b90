"""Algebraic theories: drop equations, free-model monads, minimal
support, and the finite preservation checks."""
import itertools

import pytest

from clott.terms import AOp, AVar
from clott.theories import (BUILTINS, Budget, CheckResult, Theory,
                            TheoryError, check_preserves_monos,
                            check_preserves_pullbacks_of_monos, class_equal,
                            drop_equations, fmap, free_model,
                            has_drop_equations, interpret, is_drop_equation,
                            minimal_support, mult, theory_from_file, unit)

LEFTZERO = theory_from_file(
    {"f": 2}, [(AOp("f", (AVar("x"), AVar("y"))), AVar("x"))], None,
    "leftzero")


# -- drop equations -----------------------------------------------------------

def test_drop_detection():
    assert is_drop_equation((AOp("f", (AVar("x"), AVar("y"))), AVar("x")))
    assert not is_drop_equation((AOp("f", (AVar("x"), AVar("y"))),
                                 AOp("f", (AVar("y"), AVar("x")))))
    assert has_drop_equations(LEFTZERO)
    assert has_drop_equations(BUILTINS["truncation"])
    for name in ("semilattice", "convex", "monoid", "commutative-monoid"):
        assert not has_drop_equations(BUILTINS[name]), name


def test_drop_equations_listed():
    assert drop_equations(LEFTZERO) == [
        (AOp("f", (AVar("x"), AVar("y"))), AVar("x"))]
    assert drop_equations(BUILTINS["semilattice"]) == []


# -- carriers ----------------------------------------------------------------

def test_semilattice_carrier_is_powerset():
    t = BUILTINS["semilattice"]
    for n in range(5):
        m = free_model(t, tuple(range(n)))
        assert m.exact
        assert len(m.elements) == 2 ** n


def test_monoid_carrier_counts():
    t = BUILTINS["monoid"]
    for n in range(4):
        m = free_model(t, tuple(range(n)), Budget(max_len=3))
        assert len(m.elements) == sum(n ** k for k in range(4))


def test_commutative_monoid_carrier_counts():
    t = BUILTINS["commutative-monoid"]
    m = free_model(t, (0, 1), Budget(max_len=3))
    # multisets of size <= 3 over two generators: 1 + 2 + 3 + 4
    assert len(m.elements) == 10


def test_truncation_carrier():
    t = BUILTINS["truncation"]
    assert free_model(t, ()).elements == ()
    assert free_model(t, (0, 1, 2)).elements == (("star",),)


def test_convex_carrier_denominator_bound():
    t = BUILTINS["convex"]
    m = free_model(t, (0, 1), Budget(max_denominator=4))
    masses = {frac for e in m.elements for _, frac in e[1]}
    assert all(q.denominator <= 4 for q in masses)
    assert ("dist", ((0, __import__("fractions").Fraction(1, 2)),
                     (1, __import__("fractions").Fraction(1, 2)))) \
        in m.elements


# -- custom theories: congruence oracle --------------------------------------

def _leftzero_normal(term):
    """Independent oracle: f(x, y) rewrites to x, so every ground term
    normalizes to its leftmost leaf."""
    while isinstance(term, AOp):
        term = term.args[0]
    return term


def test_leftzero_classes_match_rewriting_oracle():
    m = free_model(LEFTZERO, ("a", "b"), Budget(term_size=3))
    # every class representative must be a normal form (a bare generator)
    reps = {e[1] for e in m.elements}
    assert reps == {AVar(("gen", "a")), AVar(("gen", "b"))}
    assert not m.exact


def test_class_equal_three_valued():
    m = free_model(LEFTZERO, ("a",), Budget(term_size=2))
    e = m.elements[0]
    assert class_equal(m, e, e) == "equal"
    assert class_equal(m, e, ("class", AVar(("gen", "zz")))) == "unknown"
    noeq = theory_from_file({"g": 1}, [], None, "freeop")
    mn = free_model(noeq, ("a",), Budget(term_size=2))
    assert class_equal(mn, mn.elements[0], mn.elements[1]) == "apart"


def test_custom_interpret_rejected():
    with pytest.raises(TheoryError):
        interpret(LEFTZERO, AOp("f", (AVar("x"), AVar("x"))),
                  {"x": unit(LEFTZERO, "a")})


def test_theory_from_file_validates():
    with pytest.raises(TheoryError):
        theory_from_file({"f": 2}, [(AOp("f", (AVar("x"),)), AVar("x"))],
                         None)
    with pytest.raises(TheoryError):
        theory_from_file({}, [], "no-such-builtin")
    assert theory_from_file({}, [], "monoid") is BUILTINS["monoid"]


# -- equations hold in the free models ----------------------------------------

def _env_product(m, variables):
    return ({v: e for v, e in zip(variables, choice)}
            for choice in itertools.product(m.elements,
                                            repeat=len(variables)))


@pytest.mark.parametrize("name", ["semilattice", "convex", "monoid",
                                  "commutative-monoid"])
def test_equations_hold(name):
    t = BUILTINS[name]
    m = free_model(t, (0, 1), Budget(max_len=2, max_denominator=2))
    from clott.terms import alg_free_vars
    for lhs, rhs in t.equations:
        variables = sorted(alg_free_vars(lhs) | alg_free_vars(rhs))
        for env in _env_product(m, variables):
            assert interpret(t, lhs, env) == interpret(t, rhs, env)


# -- monad laws ---------------------------------------------------------------

BUILTIN_NAMES = ["semilattice", "convex", "monoid", "commutative-monoid",
                 "truncation"]


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_monad_left_unit(name):
    t = BUILTINS[name]
    m = free_model(t, (0, 1), Budget(max_len=2, max_denominator=3))
    for e in m.elements:
        assert mult(t, unit(t, e)) == e


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_monad_right_unit(name):
    t = BUILTINS[name]
    m = free_model(t, (0, 1), Budget(max_len=2, max_denominator=3))
    lift = {x: unit(t, x) for x in m.base}
    for e in m.elements:
        assert mult(t, fmap(t, lift, e)) == e


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_monad_associative(name):
    t = BUILTINS[name]
    m = free_model(t, (0,), Budget(max_len=2, max_denominator=2))
    mm = free_model(t, m.elements, Budget(max_len=2, max_denominator=2))
    mmm = free_model(t, mm.elements, Budget(max_len=2, max_denominator=2))
    flat = {inner: mult(t, inner) for inner in mm.elements}
    for e in mmm.elements:
        assert mult(t, mult(t, e)) == mult(t, fmap(t, flat, e))


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_fmap_functorial(name):
    t = BUILTINS[name]
    m = free_model(t, (0, 1, 2), Budget(max_len=2, max_denominator=3))
    ident = {x: x for x in m.base}
    f = {0: "p", 1: "q", 2: "p"}
    g = {"p": 10, "q": 11}
    for e in m.elements:
        assert fmap(t, ident, e) == e
        assert fmap(t, {x: g[f[x]] for x in m.base}, e) == \
            fmap(t, g, fmap(t, f, e))


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_unit_is_natural(name):
    t = BUILTINS[name]
    f = {0: "p", 1: "q"}
    for x in (0, 1):
        assert fmap(t, f, unit(t, x)) == unit(t, f[x])


# -- minimal support -----------------------------------------------------------

def _brute_support(t, base, elem, budget):
    best = None
    for r in range(len(base) + 1):
        for sub in itertools.combinations(base, r):
            if elem in free_model(t, sub, budget).elements:
                if best is None or len(sub) < len(best):
                    best = sub
        if best is not None:
            return frozenset(best)
    raise AssertionError("element not found in any sub-carrier")


@pytest.mark.parametrize("name", ["semilattice", "convex", "monoid",
                                  "commutative-monoid"])
def test_minimal_support_matches_brute_force(name):
    t = BUILTINS[name]
    budget = Budget(max_len=3, max_denominator=3)
    for n in range(1, 5):
        base = tuple(range(n))
        m = free_model(t, base, budget)
        for e in m.elements:
            assert minimal_support(t, e) == _brute_support(t, base, e,
                                                           budget)


def test_truncation_support_not_unique():
    with pytest.raises(TheoryError):
        minimal_support(BUILTINS["truncation"], ("star",))


# -- preservation of monos and pullbacks ---------------------------------------

@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_all_builtins_preserve_monos(name):
    r = check_preserves_monos(BUILTINS[name], size_bound=3)
    assert isinstance(r, CheckResult) and r.ok


@pytest.mark.parametrize("name", ["semilattice", "convex", "monoid",
                                  "commutative-monoid"])
def test_nondrop_builtins_preserve_pullbacks(name):
    assert check_preserves_pullbacks_of_monos(BUILTINS[name],
                                              size_bound=3).ok


def test_truncation_fails_pullbacks_with_canonical_square():
    r = check_preserves_pullbacks_of_monos(BUILTINS["truncation"],
                                           size_bound=3)
    assert not r.ok
    square = dict(r.counterexample)
    # the square: X = {0} maps into Y = {0,1} missing Z = {0}, so the
    # pullback carrier P is empty while T(X) x_{T(Y)} T(Z) is a point
    assert square["P"] == ()
    assert square["X"] == (0,) and square["Z"] == (0,)
    assert square["f"] == ((0, 1),)


def test_leftzero_preservation_checks_run_on_custom_theories():
    # f(x, y) = x collapses every term to its leftmost leaf, so the free
    # functor acts like the identity and both finite checks go through
    monos = check_preserves_monos(LEFTZERO, size_bound=2,
                                  budget=Budget(term_size=2))
    pullbacks = check_preserves_pullbacks_of_monos(
        LEFTZERO, size_bound=2, budget=Budget(term_size=2))
    assert monos.ok and pullbacks.ok
