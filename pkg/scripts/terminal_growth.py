#!/usr/bin/env python3
"""Tabulate terminal-sequence stage sizes for a few functors.

The finite powerset functor produces the doubly-exponential tower
1, 2, 4, 16, 65536; the delay functor grows linearly and never converges
at finite stages; constant functors converge at step 1.
"""
import argparse

from clott.coalgebra import Budget, parse_functor, terminal_sequence

DEFAULT = ["const{a,b}", "sum(const{u},id)", "prod(const{a,b},id)",
           "pf(id)", "df(const{a,b})"]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("functors", nargs="*", default=DEFAULT)
    ap.add_argument("--steps", type=int, default=4)
    ap.add_argument("--max-elements", type=int, default=200_000)
    args = ap.parse_args()

    for text in args.functors:
        f = parse_functor(text)
        seq = terminal_sequence(f, args.steps,
                                Budget(max_elements=args.max_elements))
        sizes = [len(s) for s in seq.stages]
        note = (f"converges at {seq.convergence}"
                if seq.convergence is not None
                else "budget hit" if seq.budget_hit else "no convergence")
        print(f"{text:<24} {sizes}  ({note})")


if __name__ == "__main__":
    main()
