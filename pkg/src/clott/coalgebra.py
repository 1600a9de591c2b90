"""Set-endofunctor expressions, terminal sequences, final coalgebras,
and bisimilarity engines.

The functor grammar is `const{a,b} | id | prod(F,G) | sum(F,G) | pf(F) |
df(F)` where pf is the finite-powerset monad (free semilattice) and df
the finitely-supported-distribution monad (free convex algebra).
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction

from . import theories
from .theories import BUILTINS, Budget, BudgetExceeded, canon_key, csorted


# ---------------------------------------------------------------------------
# Functor expressions
# ---------------------------------------------------------------------------

class FunctorExpr:
    pass


@dataclass(frozen=True)
class FConst(FunctorExpr):
    elems: tuple


@dataclass(frozen=True)
class FId(FunctorExpr):
    pass


@dataclass(frozen=True)
class FProd(FunctorExpr):
    left: FunctorExpr
    right: FunctorExpr


@dataclass(frozen=True)
class FSum(FunctorExpr):
    left: FunctorExpr
    right: FunctorExpr


@dataclass(frozen=True)
class FFree(FunctorExpr):
    """Composition T ∘ G for the free-model monad T of a builtin theory."""
    theory: str     # "semilattice" (pf) or "convex" (df)
    inner: FunctorExpr


_FUNCTOR_TOKEN = re.compile(r"\s*([a-z]+|[(){},]|[A-Za-z0-9_]+)")


class FunctorParseError(Exception):
    pass


def parse_functor(text: str) -> FunctorExpr:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _FUNCTOR_TOKEN.match(text, pos)
        if not m:
            raise FunctorParseError(f"bad character at offset {pos}")
        tokens.append(m.group(1))
        pos = m.end()
    expr, rest = _parse_functor(tokens)
    if rest:
        raise FunctorParseError(f"trailing tokens: {' '.join(rest)}")
    return expr


def _parse_functor(ts: list[str]) -> tuple[FunctorExpr, list[str]]:
    if not ts:
        raise FunctorParseError("unexpected end of functor expression")
    head, ts = ts[0], ts[1:]
    if head == "id":
        return FId(), ts
    if head == "const":
        if not ts or ts[0] != "{":
            raise FunctorParseError("const expects {elements}")
        ts = ts[1:]
        elems = []
        while ts and ts[0] != "}":
            if ts[0] == ",":
                ts = ts[1:]
                continue
            elems.append(ts[0])
            ts = ts[1:]
        if not ts:
            raise FunctorParseError("unterminated const{...}")
        return FConst(tuple(csorted(elems))), ts[1:]
    if head in ("prod", "sum"):
        if not ts or ts[0] != "(":
            raise FunctorParseError(f"{head} expects (F, G)")
        left, ts = _parse_functor(ts[1:])
        if not ts or ts[0] != ",":
            raise FunctorParseError(f"{head} expects two arguments")
        right, ts = _parse_functor(ts[1:])
        if not ts or ts[0] != ")":
            raise FunctorParseError("expected ')'")
        cls = FProd if head == "prod" else FSum
        return cls(left, right), ts[1:]
    if head in ("pf", "df"):
        if not ts or ts[0] != "(":
            raise FunctorParseError(f"{head} expects (F)")
        inner, ts = _parse_functor(ts[1:])
        if not ts or ts[0] != ")":
            raise FunctorParseError("expected ')'")
        theory = "semilattice" if head == "pf" else "convex"
        return FFree(theory, inner), ts[1:]
    raise FunctorParseError(f"unknown functor constructor {head!r}")


def show_functor(f: FunctorExpr) -> str:
    if isinstance(f, FId):
        return "id"
    if isinstance(f, FConst):
        return "const{" + ",".join(str(e) for e in f.elems) + "}"
    if isinstance(f, FProd):
        return f"prod({show_functor(f.left)}, {show_functor(f.right)})"
    if isinstance(f, FSum):
        return f"sum({show_functor(f.left)}, {show_functor(f.right)})"
    if isinstance(f, FFree):
        kw = "pf" if f.theory == "semilattice" else "df"
        return f"{kw}({show_functor(f.inner)})"
    raise AssertionError(type(f).__name__)


# ---------------------------------------------------------------------------
# Functor action on sets and functions
# ---------------------------------------------------------------------------

def functor_eval(f: FunctorExpr, base, budget: Budget | None = None) -> tuple:
    """The set F(X) in canonical order."""
    budget = budget or Budget()
    base = tuple(csorted(base))
    if isinstance(f, FId):
        return base
    if isinstance(f, FConst):
        return f.elems
    if isinstance(f, FProd):
        ls = functor_eval(f.left, base, budget)
        rs = functor_eval(f.right, base, budget)
        _guard(len(ls) * len(rs), budget)
        return tuple(("pair", l, r) for l in ls for r in rs)
    if isinstance(f, FSum):
        ls = functor_eval(f.left, base, budget)
        rs = functor_eval(f.right, base, budget)
        _guard(len(ls) + len(rs), budget)
        return tuple(itertools.chain((("inl", l) for l in ls),
                                     (("inr", r) for r in rs)))
    if isinstance(f, FFree):
        inner = functor_eval(f.inner, base, budget)
        theory = BUILTINS[f.theory]
        if f.theory == "semilattice":
            if len(inner) > 64 or 2 ** len(inner) > budget.max_elements:
                raise BudgetExceeded(
                    f"powerset of a {len(inner)}-element set exceeds "
                    f"budget {budget.max_elements}")
        model = theories.free_model(theory, inner, budget)
        return model.elements
    raise AssertionError(type(f).__name__)


def _guard(size: int, budget: Budget) -> None:
    if size > budget.max_elements:
        raise BudgetExceeded(f"functor stage of size {size} exceeds "
                             f"budget {budget.max_elements}")


def functor_map(f: FunctorExpr, fn: dict, value):
    """The function F(fn) applied to one element of F(X)."""
    if isinstance(f, FId):
        return fn[value]
    if isinstance(f, FConst):
        return value
    if isinstance(f, FProd):
        _, l, r = value
        return ("pair", functor_map(f.left, fn, l),
                functor_map(f.right, fn, r))
    if isinstance(f, FSum):
        tag, v = value
        side = f.left if tag == "inl" else f.right
        return (tag, functor_map(side, fn, v))
    if isinstance(f, FFree):
        theory = BUILTINS[f.theory]
        members = value[1] if value[0] == "set" else [x for x, _ in value[1]]
        inner_fn = {m: functor_map(f.inner, fn, m) for m in members}
        return theories.fmap(theory, inner_fn, value)
    raise AssertionError(type(f).__name__)


def functor_map_all(f: FunctorExpr, fn: dict, values) -> dict:
    """F(fn) over a whole fiber, caching shared sub-results.

    Elements of F(X) share their X-level members heavily (a powerset fiber
    reuses the same few members in every subset), so mapping them one by
    one with functor_map repeats work quadratically."""
    cache: dict = {}
    keys: dict = {}

    def ckey(v):
        k = keys.get(v)
        if k is None:
            k = keys[v] = theories.canon_key(v)
        return k

    def go(fx, v, pos):
        if isinstance(fx, FId):
            return fn[v]
        if isinstance(fx, FConst):
            return v
        key = (pos, v)
        hit = cache.get(key)
        if hit is not None:
            return hit
        if isinstance(fx, FProd):
            r = ("pair", go(fx.left, v[1], pos + "l"),
                 go(fx.right, v[2], pos + "r"))
        elif isinstance(fx, FSum):
            tag, u = v
            side = fx.left if tag == "inl" else fx.right
            r = (tag, go(side, u, pos + tag))
        elif v[0] == "set":
            mapped = {go(fx.inner, x, pos + "i") for x in v[1]}
            r = ("set", tuple(sorted(mapped, key=ckey)))
        else:
            theory = BUILTINS[fx.theory]
            members = [x for x, _ in v[1]] if v[0] == "dist" else v[1]
            inner_fn = {x: go(fx.inner, x, pos + "i") for x in members}
            r = theories.fmap(theory, inner_fn, v)
        cache[key] = r
        return r

    return {v: go(f, v, "") for v in values}


# ---------------------------------------------------------------------------
# Terminal sequences and final coalgebras
# ---------------------------------------------------------------------------

UNIT = ("unit",)


@dataclass(frozen=True)
class TerminalSeq:
    """Stages are relabelled: stage k+1 is computed as F applied to the
    integer labels 0..len(stage k)-1, and `labels[k]` maps each raw
    element of stage k to its label.  Connectors are label-to-label."""
    stages: tuple            # stages[k] = tuple of raw elements of F^k(1)
    connectors: tuple        # connectors[k]: dict label(k+1) -> label(k)
    convergence: int | None  # first k with connectors[k] bijective
    budget_hit: bool = False

    def sizes(self) -> list[int]:
        return [len(s) for s in self.stages]


class NotConverged(Exception):
    pass


def terminal_sequence(f: FunctorExpr, max_steps: int,
                      budget: Budget | None = None) -> TerminalSeq:
    budget = budget or Budget()
    stages: list[tuple] = [(UNIT,)]
    indices: list[dict] = [{UNIT: 0}]
    raw_connectors: list[dict] = []   # label(k+1) -> label(k)
    convergence = None
    budget_hit = False
    for k in range(max_steps):
        labels_k = tuple(range(len(stages[k])))
        try:
            nxt = functor_eval(f, labels_k, budget)
        except BudgetExceeded:
            budget_hit = True
            break
        index = {v: i for i, v in enumerate(nxt)}
        if k == 0:
            conn = {i: 0 for i in range(len(nxt))}
        else:
            conn = {index[v]: indices[k][functor_map(
                f, raw_connectors[k - 1], v)] for v in nxt}
        stages.append(nxt)
        indices.append(index)
        raw_connectors.append(conn)
        if convergence is None and len(nxt) == len(stages[k]) \
                and len(set(conn.values())) == len(stages[k]):
            convergence = k
            break
    return TerminalSeq(tuple(tuple(s) for s in stages),
                       tuple(raw_connectors), convergence, budget_hit)


@dataclass(frozen=True)
class Coalgebra:
    functor: FunctorExpr
    states: tuple
    structure: dict  # state -> element of F(states)


@dataclass(frozen=True)
class FinalityReport:
    verified: bool
    size_bound: int
    coalgebras_checked: int


def final_coalgebra(f: FunctorExpr, max_steps: int = 16,
                    budget: Budget | None = None,
                    verify_size_bound: int = 3
                    ) -> tuple[Coalgebra, TerminalSeq, FinalityReport]:
    """Carrier and structure from the converged terminal sequence, plus a
    bounded finality check (uniqueness of the morphism from every
    F-coalgebra with at most verify_size_bound states)."""
    budget = budget or Budget()
    seq = terminal_sequence(f, max_steps, budget)
    if seq.convergence is None:
        raise NotConverged(
            f"no bijective connector within {max_steps} steps; stage sizes "
            f"{[len(s) for s in seq.stages]}")
    k = seq.convergence
    carrier = tuple(range(len(seq.stages[k])))
    conn = seq.connectors[k]
    structure = {conn[i]: v for i, v in enumerate(seq.stages[k + 1])}
    final = Coalgebra(f, carrier, structure)
    checked = 0
    for n in range(verify_size_bound + 1):
        states = tuple(range(n))
        fx = functor_eval(f, states, budget)
        for images in itertools.product(fx, repeat=n):
            xi = dict(zip(states, images))
            checked += 1
            homs = _coalgebra_homs(f, Coalgebra(f, states, xi), final)
            if len(homs) != 1:
                return final, seq, FinalityReport(False, verify_size_bound,
                                                  checked)
    return final, seq, FinalityReport(True, verify_size_bound, checked)


def _coalgebra_homs(f: FunctorExpr, source: Coalgebra,
                    target: Coalgebra) -> list[dict]:
    homs = []
    for images in itertools.product(target.states,
                                    repeat=len(source.states)):
        h = dict(zip(source.states, images))
        if all(functor_map(f, h, source.structure[s]) ==
               target.structure[h[s]] for s in source.states):
            homs.append(h)
    return homs


# ---------------------------------------------------------------------------
# Bisimilarity by partition refinement
# ---------------------------------------------------------------------------

def bisimilarity(coalg: Coalgebra) -> tuple:
    """Coarsest partition P with P = ker(F(quotient) ∘ ξ), as a tuple of
    canonically sorted state blocks."""
    states = tuple(csorted(coalg.states))
    if not states:
        return ()
    class_of = {s: 0 for s in states}
    while True:
        sigs = {s: functor_map(coalg.functor, class_of, coalg.structure[s])
                for s in states}
        blocks: dict = {}
        for s in states:
            blocks.setdefault((class_of[s], _freeze(sigs[s])), []).append(s)
        new_class = {}
        for i, key in enumerate(sorted(blocks, key=canon_key)):
            for s in blocks[key]:
                new_class[s] = i
        if new_class == class_of:
            break
        class_of = new_class
    out: dict = {}
    for s in states:
        out.setdefault(class_of[s], []).append(s)
    return tuple(sorted((tuple(b) for b in out.values()),
                        key=canon_key))


def _freeze(v):
    # signatures already use hashable canonical encodings
    return v


def brute_force_bisimilarity(coalg: Coalgebra) -> tuple:
    """Oracle: enumerate every partition of the state set and return the
    coarsest stable one (a partition is stable when states in a common
    block have equal structure maps after quotienting by the partition)."""
    states = tuple(csorted(coalg.states))
    if not states:
        return ()
    best = None
    for partition in _all_partitions(list(states)):
        class_of = {s: i for i, block in enumerate(partition) for s in block}
        stable = all(
            functor_map(coalg.functor, class_of, coalg.structure[x]) ==
            functor_map(coalg.functor, class_of, coalg.structure[y])
            for block in partition for x in block for y in block)
        if stable and (best is None or len(partition) < len(best)):
            best = partition
    return tuple(tuple(block) for block in
                 sorted(best, key=lambda b: canon_key(tuple(b))))


def _all_partitions(xs: list):
    if not xs:
        yield []
        return
    first, rest = xs[0], xs[1:]
    for sub in _all_partitions(rest):
        for i in range(len(sub)):
            yield sub[:i] + [[first] + sub[i]] + sub[i + 1:]
        yield [[first]] + sub


# ---------------------------------------------------------------------------
# Weak bisimilarity on the truncated delay monad
# ---------------------------------------------------------------------------

BOT = ("bot",)


def now(a):
    return ("now", a)


def step(d):
    return ("step", d)


def delay_depth(d) -> int:
    n = 0
    while d[0] == "step":
        n += 1
        d = d[1]
    return n


def _strip_to_now(d, cap: int):
    """Follow step constructors (at most cap of them) to a now, if any."""
    n = 0
    while d[0] == "step" and n <= cap:
        d = d[1]
        n += 1
    if d[0] == "now":
        return n, d[1]
    return None


def weak_bisim_delay(x, y, rel, n_bound: int) -> dict:
    """Per-stage verdicts for x ~_R y on the truncated delay monad.

    rel is a predicate on pairs of base values; the existential in the
    now-clause ranges over n <= n_bound; the step/step clause consumes one
    stage, and stage 0 holds trivially for it.  Returns {stage: bool} for
    stages 0..n_bound-1 plus "all": the conjunction.
    """
    verdicts = {s: _wb(x, y, rel, s, n_bound) for s in range(n_bound)}
    verdicts["all"] = all(verdicts[s] for s in range(n_bound))
    return verdicts


def _wb(x, y, rel, stage: int, cap: int) -> bool:
    if x[0] == "now":
        hit = _strip_to_now(y, cap)
        return hit is not None and rel(x[1], hit[1])
    if y[0] == "now":
        hit = _strip_to_now(x, cap)
        return hit is not None and rel(hit[1], y[1])
    # both are step or bot; bot behaves as an infinite step chain
    if stage == 0:
        return True
    x2 = x[1] if x[0] == "step" else BOT
    y2 = y[1] if y[0] == "step" else BOT
    return _wb(x2, y2, rel, stage - 1, cap)


# ---------------------------------------------------------------------------
# Edge-list coalgebra files, F(X) = pf(prod(const{labels}, id))
# ---------------------------------------------------------------------------

def parse_coalgebra_file(text: str) -> Coalgebra:
    """Lines `x a y` (transition x --a--> y) and `state x`; comments `--`."""
    states: list[str] = []
    edges: dict[str, set] = {}
    labels: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("--")[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "state" and len(parts) == 2:
            if parts[1] not in states:
                states.append(parts[1])
            continue
        if len(parts) != 3:
            raise FunctorParseError(
                f"line {lineno}: expected `x label y` or `state x`")
        src, label, dst = parts
        for s in (src, dst):
            if s not in states:
                states.append(s)
        labels.add(label)
        edges.setdefault(src, set()).add((label, dst))
    functor = FFree("semilattice",
                    FProd(FConst(tuple(csorted(labels))), FId()))
    structure = {
        s: ("set", tuple(csorted(("pair", a, t)
                                 for a, t in edges.get(s, set()))))
        for s in states}
    return Coalgebra(functor, tuple(csorted(states)), structure)
