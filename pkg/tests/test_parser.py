"""Parser and printer: round trips and error reporting."""
import pytest
from hypothesis import given, settings

from clott.parser import (ParseError, parse_alg_term, parse_declarations,
                          parse_term, parse_theory_file)
from clott.printer import show_alg_term, show_term
from clott.terms import (AOp, AVar, App, Lam, Later, Pi, Sigma, TickAbs,
                         Var)

from .strategies import alg_terms, terms


@settings(max_examples=300)
@given(terms())
def test_roundtrip(t):
    assert parse_term(show_term(t)) == t


@given(alg_terms())
def test_alg_roundtrip(t):
    ops = {"f": 2, "g": 1, "c": 0}
    assert parse_alg_term(show_alg_term(t), ops) == t


def test_lambda_sugar():
    assert parse_term("fun x y -> x") == Lam("x", Lam("y", Var("x")))


def test_arrow_right_associative():
    t = parse_term("A -> B -> C")
    assert t == Pi("_", Var("A"), Pi("_", Var("B"), Var("C")))


def test_sigma_binds_tighter_than_arrow():
    t = parse_term("A * B -> C")
    assert t == Pi("_", Sigma("_", Var("A"), Var("B")), Var("C"))


def test_dependent_arrow_with_binder_rhs():
    t = parse_term("(x : A) -> forall-clk k -> B")
    assert isinstance(t, Pi) and t.name == "x"


def test_tick_abs_and_app():
    t = parse_term("tick a : k -> d [a]")
    assert isinstance(t, TickAbs) and (t.tick, t.clock) == ("a", "k")
    assert t.body.tick == "a" and t.body.fn == Var("d")


def test_later_simple_and_dependent():
    simple = parse_term("later k A")
    dep = parse_term("later (a : k) -> A")
    assert isinstance(simple, Later) and simple.tick == "_tick"
    assert isinstance(dep, Later) and dep.tick == "a"


def test_declarations():
    decls = parse_declarations(
        "-- comment\ndef f : unit = tt\ndef g : unit = tt\n")
    assert [d.name for d in decls] == ["f", "g"]


def test_parse_error_has_position():
    with pytest.raises(ParseError) as exc:
        parse_term("fun ->")
    assert exc.value.line == 1


def test_unbalanced_paren_rejected():
    with pytest.raises(ParseError):
        parse_term("(tt")


def test_theory_file():
    ops, eqs, builtin = parse_theory_file(
        "op f/2\neq f(x, y) = f(y, x)\n")
    assert ops == {"f": 2}
    assert eqs == [(AOp("f", (AVar("x"), AVar("y"))),
                    AOp("f", (AVar("y"), AVar("x"))))]
    assert builtin is None


def test_theory_file_builtin():
    _, _, builtin = parse_theory_file("builtin truncation\n")
    assert builtin == "truncation"


def test_theory_file_bad_line():
    with pytest.raises(ParseError):
        parse_theory_file("nonsense here\n")
