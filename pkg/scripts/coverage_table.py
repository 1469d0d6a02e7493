#!/usr/bin/env python3
"""Distinct cycles, qubit counts and VQA coverage by network size."""

import argparse

from vqtsp.codec import FACTORIAL, NON_FACTORIAL, bit_length
from vqtsp.config import SpsaConfig
from vqtsp.cost import coverage, distinct_cycles


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[4, 5, 6, 7, 8, 9, 10, 11, 12, 15, 17, 26, 42, 48])
    args = ap.parse_args()
    spsa = SpsaConfig()
    budget = (3 * spsa.iterations + 1) * spsa.shots
    print(f"{'n':>3} {'cycles':>12} {'q non-fact':>10} {'q fact':>7} {'VQA coverage':>13}")
    for n in args.sizes:
        print(f"{n:>3} {distinct_cycles(n):>12.4g} {bit_length(NON_FACTORIAL, n):>10} "
              f"{bit_length(FACTORIAL, n):>7} {coverage(budget, n).coverage:>13.4g}")


if __name__ == "__main__":
    main()
