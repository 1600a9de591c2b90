"""Algebraic theories, free-model monads on finite sets, and the finite
preservation checks behind the drop-equation criterion.

Builtin theories (semilattice, convex, monoid, commutative-monoid,
truncation) come with exact canonical normal forms.  Custom theories fall
back on bounded term enumeration plus congruence closure, with
three-valued equality: distinct classes are only `unknown` apart, never
`apart`, since a bigger budget might merge them.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .terms import AOp, AVar, AlgTerm, alg_free_vars


class TheoryError(Exception):
    pass


class BudgetExceeded(Exception):
    pass


@dataclass(frozen=True)
class Theory:
    name: str
    ops: tuple[tuple[str, int], ...]            # (operation, arity)
    equations: tuple[tuple[AlgTerm, AlgTerm], ...]
    builtin: str | None = None

    def arity(self, op: str) -> int:
        for o, n in self.ops:
            if o == op:
                return n
        raise TheoryError(f"unknown operation {op!r}")


@dataclass(frozen=True)
class Budget:
    term_size: int = 4          # operation nodes per term (custom theories)
    max_terms: int = 200_000
    max_len: int = 3            # list/multiset length (monoid builtins)
    max_denominator: int = 4    # convex distributions
    max_elements: int = 1_000_000


def _v(n: str) -> AVar:
    return AVar(n)


def _op(o: str, *args: AlgTerm) -> AOp:
    return AOp(o, tuple(args))


# representative weights for the convex-choice family; the associativity
# instance at p = q = 1/2 needs 1/4, 1/3 and their mirror weights
CONVEX_WEIGHTS = {
    "c12": Fraction(1, 2), "c13": Fraction(1, 3), "c14": Fraction(1, 4),
    "c23": Fraction(2, 3), "c34": Fraction(3, 4),
}

BUILTINS: dict[str, Theory] = {
    "semilattice": Theory(
        "semilattice",
        (("or", 2), ("bot", 0)),
        (
            (_op("or", _v("x"), _v("y")), _op("or", _v("y"), _v("x"))),
            (_op("or", _op("or", _v("x"), _v("y")), _v("z")),
             _op("or", _v("x"), _op("or", _v("y"), _v("z")))),
            (_op("or", _v("x"), _v("x")), _v("x")),
            (_op("or", _v("x"), _op("bot")), _v("x")),
        ),
        builtin="semilattice"),
    "convex": Theory(
        "convex",
        tuple((o, 2) for o in sorted(CONVEX_WEIGHTS)),
        (
            # idempotence, commutativity (p vs 1-p), associativity at 1/2
            (_op("c12", _v("x"), _v("x")), _v("x")),
            (_op("c12", _v("x"), _v("y")), _op("c12", _v("y"), _v("x"))),
            (_op("c13", _v("x"), _v("y")), _op("c23", _v("y"), _v("x"))),
            (_op("c14", _v("x"), _v("y")), _op("c34", _v("y"), _v("x"))),
            (_op("c12", _op("c12", _v("x"), _v("y")), _v("z")),
             _op("c14", _v("x"), _op("c13", _v("y"), _v("z")))),
        ),
        builtin="convex"),
    "monoid": Theory(
        "monoid",
        (("mul", 2), ("e", 0)),
        (
            (_op("mul", _op("mul", _v("x"), _v("y")), _v("z")),
             _op("mul", _v("x"), _op("mul", _v("y"), _v("z")))),
            (_op("mul", _v("x"), _op("e")), _v("x")),
            (_op("mul", _op("e"), _v("x")), _v("x")),
        ),
        builtin="monoid"),
    "commutative-monoid": Theory(
        "commutative-monoid",
        (("mul", 2), ("e", 0)),
        (
            (_op("mul", _op("mul", _v("x"), _v("y")), _v("z")),
             _op("mul", _v("x"), _op("mul", _v("y"), _v("z")))),
            (_op("mul", _v("x"), _op("e")), _v("x")),
            (_op("mul", _op("e"), _v("x")), _v("x")),
            (_op("mul", _v("x"), _v("y")), _op("mul", _v("y"), _v("x"))),
        ),
        builtin="commutative-monoid"),
    "truncation": Theory(
        "truncation",
        (),
        ((_v("x"), _v("y")),),
        builtin="truncation"),
}


def theory_from_file(ops: dict[str, int],
                     equations: list[tuple[AlgTerm, AlgTerm]],
                     builtin: str | None,
                     name: str = "theory") -> Theory:
    if builtin is not None:
        if builtin not in BUILTINS:
            raise TheoryError(f"unknown builtin theory {builtin!r}")
        return BUILTINS[builtin]
    t = Theory(name, tuple(sorted(ops.items())), tuple(equations))
    for lhs, rhs in t.equations:
        for side in (lhs, rhs):
            _check_arities(t, side)
    return t


def _check_arities(t: Theory, term: AlgTerm) -> None:
    if isinstance(term, AOp):
        if t.arity(term.op) != len(term.args):
            raise TheoryError(f"operation {term.op!r} applied to "
                              f"{len(term.args)} arguments")
        for a in term.args:
            _check_arities(t, a)


# ---------------------------------------------------------------------------
# Drop equations
# ---------------------------------------------------------------------------

def is_drop_equation(eq: tuple[AlgTerm, AlgTerm]) -> bool:
    lhs, rhs = eq
    return alg_free_vars(lhs) != alg_free_vars(rhs)


def drop_equations(t: Theory) -> list[tuple[AlgTerm, AlgTerm]]:
    return [eq for eq in t.equations if is_drop_equation(eq)]


def has_drop_equations(t: Theory) -> bool:
    return bool(drop_equations(t))


# ---------------------------------------------------------------------------
# Canonical element order
# ---------------------------------------------------------------------------

def canon_key(v):
    """Total order key across the mixed canonical encodings (ints, strings,
    fractions, tagged tuples)."""
    if isinstance(v, bool):
        return (0, int(v))
    if isinstance(v, int):
        return (0, v)
    if isinstance(v, Fraction):
        return (1, v)
    if isinstance(v, str):
        return (2, v)
    if isinstance(v, tuple):
        return (3, tuple(canon_key(x) for x in v))
    if isinstance(v, frozenset):
        return (4, tuple(sorted((canon_key(x) for x in v))))
    raise TypeError(f"no canonical order for {type(v).__name__}")


def csorted(xs):
    return sorted(xs, key=canon_key)


# ---------------------------------------------------------------------------
# Free models
# ---------------------------------------------------------------------------

STAR = ("star",)


@dataclass(frozen=True)
class FreeModel:
    theory: Theory
    base: tuple
    elements: tuple
    exact: bool     # False for budget-bounded custom carriers (lower bound)

    def __contains__(self, elem) -> bool:
        return elem in self.elements


def unit(t: Theory, x):
    """Monad unit: the variable x as an element of T(X)."""
    b = t.builtin
    if b == "semilattice":
        return ("set", (x,))
    if b == "convex":
        return ("dist", ((x, Fraction(1)),))
    if b in ("monoid",):
        return ("list", (x,))
    if b == "commutative-monoid":
        return ("bag", (x,))
    if b == "truncation":
        return STAR
    return ("class", _v_of(x))


def _v_of(x) -> AlgTerm:
    # ground terms over a carrier reuse AVar leaves tagged with the element
    return AVar(("gen", x))


def free_model(t: Theory, base, budget: Budget | None = None) -> FreeModel:
    """The carrier of T(X) in canonical normal forms (builtins) or as
    congruence classes of bounded terms (custom)."""
    budget = budget or Budget()
    base = tuple(csorted(base))
    b = t.builtin
    if b == "semilattice":
        elems = [("set", tuple(csorted(s)))
                 for r in range(len(base) + 1)
                 for s in itertools.combinations(base, r)]
        return FreeModel(t, base, tuple(csorted(elems)), True)
    if b == "convex":
        elems = set()
        for d in range(1, budget.max_denominator + 1):
            for masses in _compositions(d, len(base)):
                dist = tuple((x, Fraction(m, d))
                             for x, m in zip(base, masses) if m)
                if dist:
                    elems.add(("dist", dist))
            if len(elems) > budget.max_elements:
                raise BudgetExceeded("convex carrier too large")
        return FreeModel(t, base, tuple(csorted(elems)), True)
    if b in ("monoid", "commutative-monoid"):
        tag = "list" if b == "monoid" else "bag"
        elems = []
        for n in range(budget.max_len + 1):
            words = itertools.product(base, repeat=n) if tag == "list" \
                else itertools.combinations_with_replacement(base, n)
            elems.extend((tag, tuple(w)) for w in words)
            if len(elems) > budget.max_elements:
                raise BudgetExceeded(f"{b} carrier too large")
        # length-capped slice of an infinite free monoid: still exact
        # equality on the listed elements
        return FreeModel(t, base, tuple(csorted(set(elems))), True)
    if b == "truncation":
        return FreeModel(t, base, (STAR,) if base else (), True)
    classes = _congruence_classes(t, base, budget)
    elems = tuple(("class", rep) for rep in classes)
    return FreeModel(t, base, elems, False)


def _compositions(total: int, parts: int):
    """All tuples of `parts` nonnegative ints summing to `total`."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def interpret(t: Theory, term: AlgTerm, env: dict) -> object:
    """Evaluate an algebraic term in T(X) with variables bound to elements
    of T(X) by env."""
    if isinstance(term, AVar):
        return env[term.name]
    args = [interpret(t, a, env) for a in term.args]
    return apply_op(t, term.op, args)


def apply_op(t: Theory, op: str, args: list):
    b = t.builtin
    if b == "semilattice":
        if op == "bot":
            return ("set", ())
        acc = set()
        for _, xs in args:
            acc.update(xs)
        return ("set", tuple(csorted(acc)))
    if b == "convex":
        p = CONVEX_WEIGHTS[op]
        (_, d1), (_, d2) = args
        acc: dict = {}
        for x, m in d1:
            acc[x] = acc.get(x, Fraction(0)) + p * m
        for x, m in d2:
            acc[x] = acc.get(x, Fraction(0)) + (1 - p) * m
        return ("dist", tuple(csorted([(x, m) for x, m in acc.items() if m])))
    if b in ("monoid", "commutative-monoid"):
        if op == "e":
            return ("list" if b == "monoid" else "bag", ())
        (tag, w1), (_, w2) = args
        w = w1 + w2
        return (tag, w if tag == "list" else tuple(csorted(w)))
    if b == "truncation":
        raise TheoryError("truncation has no operations")
    raise TheoryError(f"interpret: custom theory {t.name!r}; use the "
                      "congruence-class model")


def fmap(t: Theory, f: dict, elem):
    """Functor action T(f): rename the free variables of a normal form."""
    tag = elem[0]
    if tag == "set":
        return ("set", tuple(csorted({f[x] for x in elem[1]})))
    if tag == "dist":
        acc: dict = {}
        for x, m in elem[1]:
            acc[f[x]] = acc.get(f[x], Fraction(0)) + m
        return ("dist", tuple(csorted(acc.items())))
    if tag == "list":
        return ("list", tuple(f[x] for x in elem[1]))
    if tag == "bag":
        return ("bag", tuple(csorted(f[x] for x in elem[1])))
    if tag == "star":
        return elem
    if tag == "class":
        return ("class", _subst_gens(elem[1], f))
    raise TheoryError(f"unknown element tag {tag!r}")


def _subst_gens(term: AlgTerm, f: dict) -> AlgTerm:
    if isinstance(term, AVar):
        _, x = term.name
        return _v_of(f[x])
    return AOp(term.op, tuple(_subst_gens(a, f) for a in term.args))


def mult(t: Theory, elem):
    """Monad multiplication T(T(X)) -> T(X): flatten one layer."""
    tag = elem[0]
    if tag == "set":
        acc = set()
        for inner in elem[1]:
            acc.update(inner[1])
        return ("set", tuple(csorted(acc)))
    if tag == "dist":
        acc: dict = {}
        for inner, m in elem[1]:
            for x, mx in inner[1]:
                acc[x] = acc.get(x, Fraction(0)) + m * mx
        return ("dist", tuple(csorted(acc.items())))
    if tag == "list":
        out = ()
        for inner in elem[1]:
            out = out + inner[1]
        return ("list", out)
    if tag == "bag":
        out = []
        for inner in elem[1]:
            out.extend(inner[1])
        return ("bag", tuple(csorted(out)))
    if tag == "star":
        return STAR
    raise TheoryError("mult is only defined for builtin theories")


# ---------------------------------------------------------------------------
# Bounded congruence closure (custom theories; enumeration oracle)
# ---------------------------------------------------------------------------

class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int) -> bool:
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return False
        if rj < ri:
            ri, rj = rj, ri
        self.parent[rj] = ri
        return True


def enumerate_terms(t: Theory, base, size_budget: int,
                    max_terms: int) -> list[AlgTerm]:
    """All ground terms over the carrier with at most size_budget
    operation nodes, smallest first."""
    by_size: list[list[AlgTerm]] = [[_v_of(x) for x in csorted(base)]]
    nullary = [AOp(o, ()) for o, n in t.ops if n == 0]
    total = len(by_size[0])
    for size in range(1, size_budget + 1):
        layer: list[AlgTerm] = list(nullary) if size == 1 else []
        for o, n in t.ops:
            if n == 0:
                continue
            # distribute size-1 operation nodes among n children
            for sizes in _compositions(size - 1, n):
                pools = [by_size[s] for s in sizes]
                for args in itertools.product(*pools):
                    layer.append(AOp(o, tuple(args)))
        by_size.append(layer)
        total += len(layer)
        if total > max_terms:
            raise BudgetExceeded(f"term universe exceeds {max_terms}")
    return [u for layer in by_size for u in layer]


def _term_size(term: AlgTerm) -> int:
    if isinstance(term, AVar):
        return 0
    return 1 + sum(_term_size(a) for a in term.args)


def _congruence_classes(t: Theory, base, budget: Budget) -> list[AlgTerm]:
    universe = enumerate_terms(t, base, budget.term_size, budget.max_terms)
    index = {u: i for i, u in enumerate(universe)}
    uf = _UnionFind(len(universe))

    # equation instances whose two sides both fall inside the universe
    for lhs, rhs in t.equations:
        variables = sorted(alg_free_vars(lhs) | alg_free_vars(rhs))
        occ = {v: max(_occurrences(lhs, v), 1) for v in variables}
        head = max(_term_size(lhs), _term_size(rhs))
        room = budget.term_size - head
        for assign in _assignments(variables, universe, occ, room,
                                   _occurrences_map(lhs, rhs, variables)):
            li = index.get(_subst_vars(lhs, assign))
            ri = index.get(_subst_vars(rhs, assign))
            if li is not None and ri is not None:
                uf.union(li, ri)

    # congruence: equal arguments force equal applications
    changed = True
    while changed:
        changed = False
        sig: dict = {}
        for i, u in enumerate(universe):
            if isinstance(u, AVar):
                key = ("gen", u.name)
            else:
                key = (u.op, tuple(uf.find(index[a]) for a in u.args))
            j = sig.get(key)
            if j is None:
                sig[key] = i
            elif uf.union(i, j):
                changed = True

    classes: dict[int, AlgTerm] = {}
    for i, u in enumerate(universe):
        r = uf.find(i)
        cur = classes.get(r)
        if cur is None or _term_key(u) < _term_key(cur):
            classes[r] = u
    return sorted(classes.values(), key=_term_key)


def _occurrences(term: AlgTerm, v: str) -> int:
    if isinstance(term, AVar):
        return 1 if term.name == v else 0
    return sum(_occurrences(a, v) for a in term.args)


def _occurrences_map(lhs, rhs, variables):
    return {v: (_occurrences(lhs, v), _occurrences(rhs, v))
            for v in variables}


def _assignments(variables, universe, occ, room, occmap):
    """Assignments of universe terms to equation variables such that both
    instantiated sides stay within the size budget."""
    lhs_head = room  # placeholder; budgets rechecked per side below
    del lhs_head, occ

    def rec(i, assign, lsize, rsize):
        if i == len(variables):
            yield dict(assign)
            return
        v = variables[i]
        lo, ro = occmap[v]
        for u in universe:
            s = _term_size(u)
            nl, nr = lsize + lo * s, rsize + ro * s
            if nl > room and nr > room:
                continue
            if nl > room or nr > room:
                # one side would leave the universe; its instance lookup
                # would fail anyway, so prune
                continue
            assign.append((v, u))
            yield from rec(i + 1, assign, nl, nr)
            assign.pop()

    yield from rec(0, [], 0, 0)


def _subst_vars(term: AlgTerm, assign: dict) -> AlgTerm:
    if isinstance(term, AVar):
        return assign.get(term.name, term)
    return AOp(term.op, tuple(_subst_vars(a, assign) for a in term.args))


def _term_key(term: AlgTerm):
    if isinstance(term, AVar):
        return (_term_size(term), 0, canon_key(term.name[1]))
    return (_term_size(term), 1, term.op,
            tuple(_term_key(a) for a in term.args))


def class_equal(model: FreeModel, a, b) -> str:
    """Three-valued equality on a custom free model: equal | unknown."""
    if a == b:
        return "equal"
    if not model.theory.equations:
        return "apart"      # no equations: the free model is the term model
    return "unknown"


# ---------------------------------------------------------------------------
# Minimal support
# ---------------------------------------------------------------------------

def minimal_support(t: Theory, elem) -> frozenset:
    """The least subset X' of the carrier with elem in T(X').

    For truncation the minimum is not unique (any singleton carries the
    point); ties break toward the canonically least element.
    """
    tag = elem[0]
    if tag == "set":
        return frozenset(elem[1])
    if tag == "dist":
        return frozenset(x for x, _ in elem[1])
    if tag in ("list", "bag"):
        return frozenset(elem[1])
    if tag == "star":
        raise TheoryError("truncation support is not unique; use "
                          "brute force with a tie-break")
    raise TheoryError("minimal_support requires a builtin normal form")


# ---------------------------------------------------------------------------
# Preservation checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    ok: bool
    counterexample: tuple | None
    bounds: dict


def _sets_upto(bound: int):
    for n in range(bound + 1):
        yield tuple(range(n))


def check_preserves_monos(t: Theory, size_bound: int = 3,
                          budget: Budget | None = None) -> CheckResult:
    """Exhaustively check that T sends injections X >-> Y (sets of size at
    most size_bound) to injections."""
    budget = budget or Budget()
    for x in _sets_upto(size_bound):
        mx = free_model(t, x, budget)
        for y in _sets_upto(size_bound):
            if len(y) < len(x):
                continue
            for images in itertools.permutations(y, len(x)):
                f = dict(zip(x, images))
                seen: dict = {}
                for e in mx.elements:
                    img = fmap(t, f, e)
                    if img in seen and seen[img] != e:
                        return CheckResult(False, (x, y, tuple(
                            sorted(f.items())), seen[img], e),
                            {"size_bound": size_bound})
                    seen[img] = e
    return CheckResult(True, None, {"size_bound": size_bound})


def check_preserves_pullbacks_of_monos(
        t: Theory, size_bound: int = 3,
        budget: Budget | None = None) -> CheckResult:
    """Exhaustively compare T(f^{-1}Z) with the pullback of T(X) -> T(Y)
    <- T(Z) over all f: X -> Y and subsets Z of Y with |X|, |Y| at most
    size_bound.  First counterexample in canonical enumeration order."""
    budget = budget or Budget()
    for y in _sets_upto(size_bound):
        for z in _subsets(y):
            mz = free_model(t, z, budget)
            incl = {v: v for v in z}
            for x in _sets_upto(size_bound):
                mx = free_model(t, x, budget)
                for f_images in itertools.product(y, repeat=len(x)):
                    f = dict(zip(x, f_images))
                    p = tuple(v for v in x if f[v] in z)
                    mp = free_model(t, p, budget)
                    # pullback of T(X) --T(f)--> T(Y) <--T(incl)-- T(Z)
                    pb = {(u, v)
                          for u in mx.elements for v in mz.elements
                          if fmap(t, f, u) == fmap(t, incl, v)}
                    # image of the canonical map T(P) -> T(X) x T(Z)
                    can = [(fmap(t, {v: v for v in p}, e),
                            fmap(t, {v: f[v] for v in p}, e))
                           for e in mp.elements]
                    if len(set(can)) == len(can) and set(can) == pb:
                        continue
                    square = {"X": x, "Y": y, "Z": z, "P": p,
                              "f": tuple(sorted(f.items()))}
                    return CheckResult(False, tuple(sorted(square.items())),
                                       {"size_bound": size_bound})
    return CheckResult(True, None, {"size_bound": size_bound})


def _subsets(y):
    for r in range(len(y) + 1):
        yield from itertools.combinations(y, r)
