#!/usr/bin/env python3
"""Scan the force comparison across truncation bounds.

Compares the fibers of forall-clk A with forall-clk (later A) for a
constant family and for the guarded delay type mu X. 1 + X.  The constant
family is always an isomorphism; the delay type fails at every finite
bound with the failure stage pinned at the truncation boundary, which is
the expected truncation artifact (the limit-ordinal step is unavailable).
"""
import argparse

from clott.coalgebra import parse_functor
from clott.model import Model, check_force, const_psh, mu


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--min", type=int, default=3)
    ap.add_argument("--max", type=int, default=6)
    ap.add_argument("--pool", type=int, default=2)
    args = ap.parse_args()

    delay = parse_functor("sum(const{u},id)")
    print(f"{'N':>3}  {'constant':>9}  {'delay iso':>9}  "
          f"{'artifact':>8}  first failure")
    for n in range(args.min, args.max + 1):
        model = Model(pool=args.pool, bound=n)
        const = check_force(model, const_psh(model.slice, (0, 1)))
        d = check_force(model, mu(model, delay))
        print(f"{n:>3}  {str(const.iso):>9}  {str(d.iso):>9}  "
              f"{str(d.truncation_artifact):>8}  {d.first_failure}")


if __name__ == "__main__":
    main()
