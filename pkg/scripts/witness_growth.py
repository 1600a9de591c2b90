#!/usr/bin/env python3
"""Scan the least uniform exists/forall witness against the truncation
bound N.

For the stage-indexed predicate phi(u, e) = (stage(u) <= e) over the
constant family {0, ..., N-1}, the pointwise existential holds everywhere
while the least witness working uniformly across clock introductions is
N - 1: the gap grows with the bound, which is the finite shadow of the
quantifier-exchange counterexample.
"""
import argparse

from clott.model import Model, const_psh, exists_forall_experiment


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--min", type=int, default=3)
    ap.add_argument("--max", type=int, default=8)
    ap.add_argument("--pool", type=int, default=2)
    args = ap.parse_args()

    print(f"{'N':>3}  {'witnesses':>12}  fibers")
    for n in range(args.min, args.max + 1):
        model = Model(pool=args.pool, bound=n)
        x = const_psh(model.time, tuple(range(n)))
        verdicts = exists_forall_experiment(
            model, x, lambda u, e: u.time.theta(u.clock) <= e)
        witnesses = sorted({v.witness for v in verdicts.values()})
        n_comm = sum(v.lhs == v.rhs for v in verdicts.values())
        print(f"{n:>3}  {str(witnesses):>12}  "
              f"{n_comm}/{len(verdicts)} commute")


if __name__ == "__main__":
    main()
