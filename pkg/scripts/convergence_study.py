"""How quickly the GA reaches the exact widest path on random small graphs.

For each graph, records the generation at which the best chromosome first
matched the widest-path oracle and whether the run converged at all.

    python3 scripts/convergence_study.py --graphs 200 --population 20
"""

import argparse
import itertools
from collections import Counter

import numpy as np

from gradenet.ga_router import GaConfig, evolve, widest_path_oracle
from gradenet.grading import SurvivorGraph


def random_graph(rng, max_nodes, density):
    n = int(rng.integers(4, max_nodes + 1))
    pairs = {(int(rng.integers(v)), v) for v in range(1, n)}
    pairs |= {(u, v) for u, v in itertools.combinations(range(n), 2) if rng.random() < density}
    edges = {}
    for u, v in pairs:
        bw = float(rng.uniform(10, 100))
        edges[(u, v)] = edges[(v, u)] = bw
    return SurvivorGraph.from_edges(edges), n


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--graphs", type=int, default=100)
    ap.add_argument("--max-nodes", type=int, default=12)
    ap.add_argument("--density", type=float, default=0.35)
    ap.add_argument("--population", type=int, default=20)
    ap.add_argument("--generations", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    first_hit = Counter()
    misses = 0
    for k in range(args.graphs):
        graph, n = random_graph(rng, args.max_nodes, args.density)
        target = widest_path_oracle(graph, 0, n - 1).raw_bandwidth
        cfg = GaConfig(population_size=args.population, generations=args.generations, seed=k)
        result = evolve(graph, 0, n - 1, cfg)
        hit = next((h.generation for h in result.history if h.best_bandwidth == target), None)
        if hit is None:
            misses += 1
        else:
            first_hit[hit] += 1

    print("generation  graphs reaching optimum")
    for gen in sorted(first_hit):
        print(f"{gen:>10}  {first_hit[gen]}")
    print(f"missed: {misses} of {args.graphs}")


if __name__ == "__main__":
    main()
