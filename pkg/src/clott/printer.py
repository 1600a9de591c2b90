"""Canonical pretty-printer; round-trips with the parser up to alpha-equivalence."""
from __future__ import annotations

from .terms import (
    AOp, AVar, Ann, App, Case, ClockAbs, ClockApp, Const, El, Forall,
    ForallCode, Fst, Id, IdCode, Incl, Inl, Inr, Lam, Later, LaterCode,
    PAnd, PEq, PExists, PForall, PForallClk, PLater, POr, Pair, Pi, PiCode,
    Prf, PropU, Sigma, SigmaCode, Snd, Sum, SumCode, Term, TickAbs, TickApp,
    Univ, Var,
)

# precedence levels, loosest first
_TERM = 0      # binder forms
_ARROW = 1
_SIGMA = 2
_SUM = 3
_POR = 4
_PAND = 5
_APP = 6
_POSTFIX = 7
_ATOM = 8


def show_term(t: Term) -> str:
    return _show(t, _TERM)


def _wrap(s: str, level: int, minimum: int) -> str:
    return f"({s})" if level < minimum else s


def _clockset(names: tuple[str, ...]) -> str:
    return "{" + ", ".join(names) + "}"


def _show(t: Term, minimum: int) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        return t.name
    if isinstance(t, Lam):
        return _wrap(f"fun {t.name} -> {_show(t.body, _TERM)}", _TERM, minimum)
    if isinstance(t, TickAbs):
        return _wrap(f"tick {t.tick} : {t.clock} -> {_show(t.body, _TERM)}",
                     _TERM, minimum)
    if isinstance(t, ClockAbs):
        return _wrap(f"clock {t.clock} -> {_show(t.body, _TERM)}", _TERM, minimum)
    if isinstance(t, (Later, LaterCode, PLater)):
        kw = {Later: "later", LaterCode: "clater", PLater: "plater"}[type(t)]
        return _wrap(f"{kw} ({t.tick} : {t.clock}) -> {_show(t.body, _TERM)}",
                     _TERM, minimum)
    if isinstance(t, (Forall, ForallCode, PForallClk)):
        kw = {Forall: "forall-clk", ForallCode: "cforall",
              PForallClk: "pforall-clk"}[type(t)]
        return _wrap(f"{kw} {t.clock} -> {_show(t.body, _TERM)}", _TERM, minimum)
    if isinstance(t, Pi):
        if t.name == "_":
            return _wrap(f"{_show(t.dom, _SIGMA)} -> {_show(t.cod, _ARROW)}",
                         _ARROW, minimum)
        return _wrap(f"({t.name} : {_show(t.dom, _TERM)}) -> {_show(t.cod, _ARROW)}",
                     _ARROW, minimum)
    if isinstance(t, Sigma):
        if t.name == "_":
            return _wrap(f"{_show(t.dom, _SUM)} * {_show(t.cod, _SIGMA)}",
                         _SIGMA, minimum)
        return _wrap(f"({t.name} : {_show(t.dom, _TERM)}) * {_show(t.cod, _SIGMA)}",
                     _SIGMA, minimum)
    if isinstance(t, (PiCode, SigmaCode)):
        kw = "cpi" if isinstance(t, PiCode) else "csig"
        return _wrap(f"{kw} ({t.name} : {_show(t.dom, _TERM)}) -> {_show(t.cod, _TERM)}",
                     _TERM, minimum)
    if isinstance(t, (PExists, PForall)):
        kw = "exists" if isinstance(t, PExists) else "all"
        return _wrap(f"{kw} ({t.name} : {_show(t.dom, _TERM)}) -> {_show(t.body, _TERM)}",
                     _TERM, minimum)
    if isinstance(t, Sum):
        return _wrap(f"{_show(t.left, _SUM)} + {_show(t.right, _POR)}",
                     _SUM, minimum)
    if isinstance(t, POr):
        return _wrap(f"{_show(t.left, _POR)} \\/ {_show(t.right, _PAND)}",
                     _POR, minimum)
    if isinstance(t, PAnd):
        return _wrap(f"{_show(t.left, _PAND)} /\\ {_show(t.right, _APP)}",
                     _PAND, minimum)
    if isinstance(t, App):
        return _wrap(f"{_show(t.fn, _APP)} {_show(t.arg, _POSTFIX)}",
                     _APP, minimum)
    if isinstance(t, TickApp):
        return _wrap(f"{_show(t.fn, _POSTFIX)} [{t.tick}]", _POSTFIX, minimum)
    if isinstance(t, ClockApp):
        return _wrap(f"{_show(t.fn, _POSTFIX)} @ {t.clock}", _POSTFIX, minimum)
    if isinstance(t, (Fst, Snd, Inl, Inr)):
        kw = {Fst: "fst", Snd: "snd", Inl: "inl", Inr: "inr"}[type(t)]
        return _wrap(f"{kw} {_show(t.arg, _POSTFIX)}", _APP, minimum)
    if isinstance(t, El):
        return _wrap(f"El {_show(t.code, _POSTFIX)}", _APP, minimum)
    if isinstance(t, Prf):
        return _wrap(f"Prf {_show(t.prop, _POSTFIX)}", _APP, minimum)
    if isinstance(t, Id):
        return _wrap(f"Id {_show(t.type_, _POSTFIX)} {_show(t.lhs, _POSTFIX)} "
                     f"{_show(t.rhs, _POSTFIX)}", _APP, minimum)
    if isinstance(t, IdCode):
        return _wrap(f"cid {_show(t.code, _POSTFIX)} {_show(t.lhs, _POSTFIX)} "
                     f"{_show(t.rhs, _POSTFIX)}", _APP, minimum)
    if isinstance(t, PEq):
        return _wrap(f"peq {_show(t.code, _POSTFIX)} {_show(t.lhs, _POSTFIX)} "
                     f"{_show(t.rhs, _POSTFIX)}", _APP, minimum)
    if isinstance(t, SumCode):
        return _wrap(f"csum {_show(t.left, _POSTFIX)} {_show(t.right, _POSTFIX)}",
                     _APP, minimum)
    if isinstance(t, Incl):
        return _wrap(f"In{{{', '.join(t.small)} => {', '.join(t.big)}}} "
                     f"{_show(t.code, _POSTFIX)}", _APP, minimum)
    if isinstance(t, Univ):
        return "U" + _clockset(t.clocks)
    if isinstance(t, PropU):
        return "Prop" + _clockset(t.clocks)
    if isinstance(t, Pair):
        return f"({_show(t.fst, _TERM)}, {_show(t.snd, _TERM)})"
    if isinstance(t, Ann):
        return f"({_show(t.term, _TERM)} : {_show(t.type_, _TERM)})"
    if isinstance(t, Case):
        return _wrap(f"case {_show(t.scrut, _TERM)} {{ inl {t.lname} -> "
                     f"{_show(t.left, _TERM)} | inr {t.rname} -> "
                     f"{_show(t.right, _TERM)} }}", _TERM, minimum)
    raise AssertionError(f"unhandled term node {type(t).__name__}")


def show_alg_term(t: AVar | AOp) -> str:
    if isinstance(t, AVar):
        return t.name
    if not t.args:
        return t.op
    return f"{t.op}({', '.join(show_alg_term(a) for a in t.args)})"
