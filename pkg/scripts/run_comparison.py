"""Graded vs. non-graded comparison over the standard topology sizes.

Writes the per-run CSV and prints a per-size summary (mean nodes selected,
route length and generations for each mode).

    python3 scripts/run_comparison.py --out results.csv --jobs 4
"""

import argparse
from collections import defaultdict
from statistics import fmean

from gradenet.harness import MODES, emit_report, load_config, run_comparison


def summarise(records):
    groups = defaultdict(list)
    for r in records:
        if not r.failed:
            groups[(r.total_nodes, r.mode)].append(r)
    print(f"{'nodes':>5} {'mode':>10} {'runs':>4} {'selected':>8} {'hops':>5} {'gens':>6} {'bw':>8}")
    for (size, mode), rows in sorted(groups.items(), key=lambda kv: (kv[0][0], MODES.index(kv[0][1]))):
        print(f"{size:>5} {mode:>10} {len(rows):>4} "
              f"{fmean(r.nodes_selected for r in rows):>8.1f} "
              f"{fmean(r.route_length for r in rows):>5.2f} "
              f"{fmean(r.generations_used for r in rows):>6.2f} "
              f"{fmean(r.best_bandwidth for r in rows):>8.2f}")
    failed = sum(r.failed for r in records)
    print(f"{failed} of {len(records)} rows failed")


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--sizes", default="4,8,16,32,64,128,256")
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--config")
    ap.add_argument("--out", default="results.csv")
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    sizes = [int(s) for s in args.sizes.split(",")]
    records = run_comparison(sizes, range(1, args.seeds + 1), load_config(args.config), jobs=args.jobs)
    emit_report(records, args.out, timing=True)
    summarise(records)


if __name__ == "__main__":
    main()
