"""The truncated time category and its category of elements by Clk.

Objects are pairs (E, θ) of a finite set of clock names from a fixed pool
with a stage assignment θ : E → {0, …, N−1}; morphisms σ : (E,θ) → (E',θ')
are functions with θ'∘σ ≤ θ pointwise.  The slice category by Clk has
objects (E, θ, λ) with λ ∈ E and morphisms preserving the marked clock.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass


@dataclass(frozen=True)
class TimeObj:
    names: tuple[str, ...]          # E, sorted
    stages: tuple[int, ...]         # θ(names[i]) = stages[i]

    def theta(self, name: str) -> int:
        return self.stages[self.names.index(name)]

    def with_stage(self, name: str, stage: int) -> "TimeObj":
        i = self.names.index(name)
        return TimeObj(self.names,
                       self.stages[:i] + (stage,) + self.stages[i + 1:])

    def add_clock(self, name: str, stage: int) -> "TimeObj":
        assert name not in self.names
        pairs = sorted(zip(self.names + (name,), self.stages + (stage,)))
        return TimeObj(tuple(n for n, _ in pairs),
                       tuple(s for _, s in pairs))


@dataclass(frozen=True)
class ElObj:
    """Object of the category of elements of Clk: a time object with a
    marked clock."""
    time: TimeObj
    clock: str


@dataclass(frozen=True)
class TimeMor:
    src: object       # TimeObj or ElObj
    dst: object
    sigma: tuple[tuple[str, str], ...]    # graph of σ, sorted by source

    def apply(self, name: str) -> str:
        for a, b in self.sigma:
            if a == name:
                return b
        raise KeyError(name)


def _time_of(o) -> TimeObj:
    return o.time if isinstance(o, ElObj) else o


@dataclass
class FinCategory:
    objects: tuple
    morphisms: tuple          # all TimeMors
    kind: str                 # "time" | "slice"

    def __post_init__(self):
        self._hom: dict = {}
        for m in self.morphisms:
            self._hom.setdefault((m.src, m.dst), []).append(m)
        self._ident = {o: TimeMor(o, o, tuple(
            (n, n) for n in _time_of(o).names)) for o in self.objects}

    def hom(self, a, b) -> list[TimeMor]:
        return self._hom.get((a, b), [])

    def identity(self, o) -> TimeMor:
        return self._ident[o]

    def compose(self, g: TimeMor, f: TimeMor) -> TimeMor:
        """g ∘ f for f : A → B, g : B → C."""
        assert f.dst == g.src
        return TimeMor(f.src, g.dst,
                       tuple((a, g.apply(b)) for a, b in f.sigma))

    def composable_pairs(self):
        by_src: dict = {}
        for m in self.morphisms:
            by_src.setdefault(m.src, []).append(m)
        for f in self.morphisms:
            for g in by_src.get(f.dst, []):
                yield g, f


def pool_names(pool: int) -> tuple[str, ...]:
    return tuple(f"l{i}" for i in range(pool))


def enumerate_category(pool: int, bound: int) -> FinCategory:
    """All objects and morphisms of the truncated time category with clock
    pool size `pool` and stages below `bound`."""
    if pool < 1 or bound < 2:
        raise ValueError("need pool >= 1 and bound >= 2")
    names = pool_names(pool)
    objects = []
    for r in range(pool + 1):
        for sub in itertools.combinations(names, r):
            for stages in itertools.product(range(bound), repeat=r):
                objects.append(TimeObj(sub, stages))
    morphisms = [m for a in objects for b in objects
                 for m in _homs(a, b)]
    return FinCategory(tuple(objects), tuple(morphisms), "time")


def _homs(a: TimeObj, b: TimeObj):
    for images in itertools.product(b.names, repeat=len(a.names)):
        if all(b.theta(img) <= a.theta(n)
               for n, img in zip(a.names, images)):
            yield TimeMor(a, b, tuple(zip(a.names, images)))


def slice_category(t: FinCategory) -> FinCategory:
    """Category of elements of the presheaf Clk (fiber E): objects gain a
    marked clock, morphisms must map it to the target's marked clock."""
    objects = tuple(ElObj(o, n) for o in t.objects for n in o.names)
    morphisms = []
    for m in t.morphisms:
        for n in m.src.names:
            morphisms.append(TimeMor(ElObj(m.src, n),
                                     ElObj(m.dst, m.apply(n)), m.sigma))
    return FinCategory(objects, tuple(morphisms), "slice")


def obj_key(o):
    t = _time_of(o)
    k = (len(t.names), t.names, t.stages)
    return k + (o.clock,) if isinstance(o, ElObj) else k


def mor_key(m: TimeMor):
    return (obj_key(m.src), obj_key(m.dst), m.sigma)
