#!/usr/bin/env python3
"""Wall time of parameter-shift training with and without the cost cache."""

import argparse
import time

from vqtsp.config import ParamShiftConfig, VqaConfig
from vqtsp.optimize import run_vqa
from vqtsp.tsp import random_instance


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=8)
    ap.add_argument("--iterations", type=int, default=250)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    inst = random_instance(args.n, 1000 * args.n)
    results = {}
    for cache in (True, False):
        cfg = VqaConfig(optimizer="param_shift", cache=cache, param_shift=ParamShiftConfig(iterations=args.iterations))
        t = time.perf_counter()
        rec = run_vqa(inst, cfg, seed=args.seed)
        results[cache] = (time.perf_counter() - t, rec)
        print(f"cache={cache!s:<5}  {results[cache][0]:8.1f} s  best {rec.best_distance:.4f}  "
              f"hits {rec.hits}  misses {rec.misses}")
    (t_on, a), (t_off, b) = results[True], results[False]
    print(f"speedup {t_off / t_on:.2f}x, identical traces: {a.trace == b.trace}")


if __name__ == "__main__":
    main()
