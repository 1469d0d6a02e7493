#!/usr/bin/env python3
"""Run one or more plan files and write a results CSV next to each.

    python3 scripts/run_plan.py plans/gray_ablation.json --jobs 4
    python3 scripts/run_plan.py plans/*.json --runs 1 --max-n 6
"""

import argparse
import dataclasses
import logging
from pathlib import Path

from vqtsp.bench import load_plan, run_plan, write_results


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("plans", nargs="+", type=Path)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--runs", type=int, help="override the plan's run count")
    ap.add_argument("--max-n", type=int, help="drop instances above this size")
    ap.add_argument("--out-dir", type=Path, default=Path("results"))
    ap.add_argument("--timing", action="store_true")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    args.out_dir.mkdir(parents=True, exist_ok=True)
    for path in args.plans:
        plan = load_plan(path)
        changes = {}
        if args.runs:
            changes["runs"] = args.runs
        if args.max_n:
            changes["instances"] = [s for s in plan.instances if s.get("n", 0) <= args.max_n]
        plan = dataclasses.replace(plan, **changes)
        logging.info("running %s (%d cells, %d instances, r=%d)", plan.name, len(plan.cells()), len(plan.instances), plan.runs)
        rows = run_plan(plan, jobs=args.jobs)
        out = args.out_dir / f"{plan.name}.csv"
        write_results(rows, out, timing=args.timing)
        logging.info("wrote %s", out)


if __name__ == "__main__":
    main()
