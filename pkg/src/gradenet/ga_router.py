"""Level-2 path search: a genetic algorithm over simple source-to-destination paths.

Chromosomes are loop-free paths in a survivor graph. A path's raw bandwidth
is its bottleneck link bandwidth; population fitness is the bandwidth share
``B(i) / sum_j B(j)`` and drives roulette parent selection. Crossover splices
two parents at a shared interior node, mutation regrows a suffix by random
walk, so every individual stays a usable route.
"""

from __future__ import annotations

import bisect
import heapq
import itertools
import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from gradenet.grading import SurvivorGraph

# offspring re-bred this many times when they repeat a path already in the next generation
DUPLICATE_RETRIES = 3


class NoPathError(RuntimeError):
    def __init__(self, source: int, dest: int):
        self.source, self.dest = source, dest
        super().__init__(f"no path from {source} to {dest}")


@dataclass(frozen=True)
class Chromosome:
    path: tuple[int, ...]
    raw_bandwidth: float
    fitness: float = 0.0

    @property
    def hops(self) -> int:
        return len(self.path) - 1


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 20
    generations: int = 50
    crossover_rate: float = 0.9
    mutation_rate: float = 0.1
    acceptance_threshold: float = 0.9
    seed: int = 0
    mutation_attempts: int = 10
    # DFS expansions allowed while trying to list every simple path
    enumeration_budget: int = 20_000

    def __post_init__(self):
        if self.population_size < 1 or self.generations < 1:
            raise ValueError("population size and generation count must be positive")
        if not math.isclose(self.crossover_rate + self.mutation_rate, 1.0, abs_tol=1e-9):
            raise ValueError("crossover_rate + mutation_rate must equal 1")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ValueError("crossover_rate must lie in [0, 1]")
        if not 0.0 < self.acceptance_threshold <= 1.0:
            raise ValueError("acceptance_threshold must lie in (0, 1]")


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    best_bandwidth: float
    best_fitness: float
    mean_fitness: float
    distinct_paths: int


@dataclass(frozen=True)
class GaResult:
    best_path: Chromosome
    generations_used: int
    converged: bool
    history: tuple[GenerationStats, ...]
    population: tuple[Chromosome, ...] = field(default=(), repr=False)


# -- path helpers ------------------------------------------------------------

def path_bandwidth(graph: SurvivorGraph, path: Sequence[int]) -> float:
    return min(graph.bandwidth(u, v) for u, v in zip(path, path[1:]))


def make_chromosome(graph: SurvivorGraph, path: Sequence[int]) -> Chromosome:
    path = tuple(path)
    return Chromosome(path=path, raw_bandwidth=path_bandwidth(graph, path))


def is_valid_path(graph: SurvivorGraph, path: Sequence[int], source: int, dest: int) -> bool:
    if len(path) < 2 or path[0] != source or path[-1] != dest:
        return False
    if len(set(path)) != len(path):
        return False
    return all((u, v) in graph.kept_edges for u, v in zip(path, path[1:]))


def remove_loops(path: Sequence[int]) -> tuple[int, ...]:
    """Shortcut every revisit: ``a x ... x b`` becomes ``a x b``."""
    out: list[int] = []
    position: dict[int, int] = {}
    for node in path:
        if node in position:
            cut = position[node]
            for dropped in out[cut + 1:]:
                del position[dropped]
            del out[cut + 1:]
        else:
            position[node] = len(out)
            out.append(node)
    return tuple(out)


def _check_endpoints(graph: SurvivorGraph, source: int, dest: int) -> None:
    if source == dest:
        raise ValueError("source and destination must differ")
    for n in (source, dest):
        if n not in graph.kept_nodes:
            raise KeyError(f"node {n} is not in the survivor graph")


def _reachable(graph: SurvivorGraph, source: int, dest: int) -> bool:
    seen = {source}
    queue = deque([source])
    while queue:
        cur = queue.popleft()
        if cur == dest:
            return True
        for nxt in graph.successors[cur]:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return False


def simple_paths(
    graph: SurvivorGraph, source: int, dest: int, limit: int, budget: int = 20_000
) -> list[tuple[int, ...]] | None:
    """All simple paths in DFS order, or None once more than ``limit`` exist
    or the search exceeds ``budget`` node expansions."""
    found: list[tuple[int, ...]] = []
    path = [source]
    on_path = {source}
    stack = [iter(graph.successors[source])]
    steps = 0
    while stack:
        nxt = next(stack[-1], None)
        if nxt is None:
            stack.pop()
            on_path.discard(path.pop())
            continue
        if nxt in on_path:
            continue
        steps += 1
        if steps > budget:
            return None
        if nxt == dest:
            found.append(tuple(path) + (dest,))
            if len(found) > limit:
                return None
            continue
        path.append(nxt)
        on_path.add(nxt)
        stack.append(iter(graph.successors[nxt]))
    return found


def random_dfs_path(
    graph: SurvivorGraph,
    source: int,
    dest: int,
    rng: np.random.Generator,
    avoid: frozenset[int] | set[int] = frozenset(),
) -> tuple[int, ...] | None:
    """Randomized depth-first search; returns a simple path or None."""
    if source == dest:
        return (source,)
    visited = set(avoid) | {source}
    path = [source]
    frontier = [_shuffled(graph.successors[source], rng)]
    while frontier:
        options = frontier[-1]
        while options and options[-1] in visited:
            options.pop()
        if not options:
            frontier.pop()
            path.pop()
            continue
        nxt = options.pop()
        visited.add(nxt)
        path.append(nxt)
        if nxt == dest:
            return tuple(path)
        frontier.append(_shuffled(graph.successors[nxt], rng))
    return None


def _shuffled(items: list[int], rng: np.random.Generator) -> list[int]:
    out = list(items)
    rng.shuffle(out)
    return out


# -- GA operators --------------------------------------------------------------

def enumerate_initial_population(
    graph: SurvivorGraph,
    source: int,
    dest: int,
    config: GaConfig,
    rng: np.random.Generator | None = None,
) -> list[Chromosome]:
    """Every simple path when there are at most N of them, else N distinct
    paths drawn by randomized DFS (fewer if sampling stalls)."""
    _check_endpoints(graph, source, dest)
    if not _reachable(graph, source, dest):
        raise NoPathError(source, dest)
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    n = config.population_size
    paths = simple_paths(graph, source, dest, limit=n, budget=config.enumeration_budget)
    if paths is None:
        seen: dict[tuple[int, ...], None] = {}
        for _ in range(20 * n):
            p = random_dfs_path(graph, source, dest, rng)
            seen.setdefault(p)
            if len(seen) == n:
                break
        paths = list(seen)
    return fitness_assign([make_chromosome(graph, p) for p in paths])


def fitness_assign(population: Sequence[Chromosome]) -> list[Chromosome]:
    """Bandwidth share f(i) = B(i) / sum_j B(j)."""
    if not population:
        raise ValueError("empty population")
    total = math.fsum(c.raw_bandwidth for c in population)
    return [replace(c, fitness=c.raw_bandwidth / total) for c in population]


def roulette_select(
    population: Sequence[Chromosome],
    rng: np.random.Generator,
    cumulative: Sequence[float] | None = None,
) -> Chromosome:
    """Fitness-proportional pick; pass ``cumulative`` to reuse running sums."""
    if cumulative is None:
        cumulative = list(itertools.accumulate(c.fitness for c in population))
    idx = bisect.bisect_right(cumulative, rng.random() * cumulative[-1])
    return population[min(idx, len(population) - 1)]


def crossover_paths(
    parent1: Chromosome, parent2: Chromosome, rng: np.random.Generator, graph: SurvivorGraph
) -> Chromosome:
    """Splice parent1's prefix onto parent2's suffix at a random shared interior node.

    Loops created by the splice are shortcut. Parents without a shared
    interior node yield a copy of the fitter one.
    """
    if parent1.path[0] != parent2.path[0] or parent1.path[-1] != parent2.path[-1]:
        raise ValueError("parents must share source and destination")
    where2 = {n: i for i, n in enumerate(parent2.path[1:-1], start=1)}
    shared = [n for n in parent1.path[1:-1] if n in where2]
    if not shared:
        return parent1 if parent1.raw_bandwidth >= parent2.raw_bandwidth else parent2
    node = shared[int(rng.integers(len(shared)))]
    cut1 = parent1.path.index(node)
    child = remove_loops(parent1.path[:cut1] + parent2.path[where2[node]:])
    return make_chromosome(graph, child)


def mutate_path(
    parent: Chromosome,
    graph: SurvivorGraph,
    rng: np.random.Generator,
    attempts: int = 10,
    cut: int | None = None,
) -> Chromosome:
    """Keep the path up to a random cut node and regrow the rest by random walk.

    The cut node is any node but the destination, so the first hop can
    change too; a direct source-destination link has nothing to cut and is
    returned as is. The walk avoids nodes used before the cut. If no walk
    reaches the destination within ``attempts`` tries, the parent is returned.
    ``cut`` fixes the cut position instead of drawing it.
    """
    path = parent.path
    if len(path) < 3:
        return parent
    if cut is None:
        cut = int(rng.integers(0, len(path) - 1))
    elif not 0 <= cut < len(path) - 1:
        raise ValueError(f"cut position {cut} outside 0..{len(path) - 2}")
    dest = path[-1]
    prefix = path[:cut]
    for _ in range(attempts):
        visited = set(prefix)
        walk = [path[cut]]
        visited.add(path[cut])
        while walk[-1] != dest:
            options = [n for n in graph.successors[walk[-1]] if n not in visited]
            if not options:
                break
            nxt = options[int(rng.integers(len(options)))]
            walk.append(nxt)
            visited.add(nxt)
        if walk[-1] == dest:
            return make_chromosome(graph, prefix + tuple(walk))
    return parent


# -- evolution loop ------------------------------------------------------------

def _stats(generation: int, population: Sequence[Chromosome], best: Chromosome) -> GenerationStats:
    best_share = best.raw_bandwidth / math.fsum(c.raw_bandwidth for c in population)
    relative = [c.raw_bandwidth / best.raw_bandwidth for c in population]
    return GenerationStats(
        generation=generation,
        best_bandwidth=best.raw_bandwidth,
        best_fitness=best_share,
        mean_fitness=math.fsum(relative) / len(relative),
        distinct_paths=len({c.path for c in population}),
    )


def _breed(
    population: Sequence[Chromosome],
    cumulative: Sequence[float],
    graph: SurvivorGraph,
    config: GaConfig,
    rng: np.random.Generator,
) -> Chromosome:
    if rng.random() < config.crossover_rate:
        p1 = roulette_select(population, rng, cumulative)
        p2 = roulette_select(population, rng, cumulative)
        return crossover_paths(p1, p2, rng, graph)
    parent = roulette_select(population, rng, cumulative)
    return mutate_path(parent, graph, rng, config.mutation_attempts)


def evolve(
    graph: SurvivorGraph,
    source: int,
    dest: int,
    config: GaConfig,
    on_generation: Callable[[int, Sequence[Chromosome]], None] | None = None,
) -> GaResult:
    """Run the GA for at most ``config.generations`` generations.

    Each generation keeps the best path seen so far (one elite) plus every
    other distinct path whose bandwidth relative to that best is above
    ``acceptance_threshold``. Remaining slots are filled with offspring:
    crossover of two roulette-selected parents with probability
    ``crossover_rate``, mutation of one otherwise. An offspring repeating a
    path already in the new generation is re-bred up to DUPLICATE_RETRIES
    times. The run converges when the best did not improve and every member
    of the new generation clears the threshold.
    """
    rng = np.random.default_rng(config.seed)
    n = config.population_size
    population = enumerate_initial_population(graph, source, dest, config, rng)
    # fewer than N paths found: pad with mutants of existing members
    base = len(population)
    for i in range(n - base):
        population.append(mutate_path(population[i % base], graph, rng, config.mutation_attempts))
    population = fitness_assign(population)
    best = max(population, key=lambda c: c.raw_bandwidth)
    history = [_stats(0, population, best)]
    if on_generation:
        on_generation(0, population)

    converged = False
    generation = 0
    for generation in range(1, config.generations + 1):
        carried: list[Chromosome] = []
        seen = {best.path}
        for c in population:
            if c.path not in seen and c.raw_bandwidth / best.raw_bandwidth > config.acceptance_threshold:
                seen.add(c.path)
                carried.append(c)
        cumulative = list(itertools.accumulate(c.fitness for c in population))
        taken = {best.path} | {c.path for c in carried}
        offspring = []
        for _ in range(n - 1 - len(carried)):
            child = _breed(population, cumulative, graph, config, rng)
            for _retry in range(DUPLICATE_RETRIES):
                if child.path not in taken:
                    break
                child = _breed(population, cumulative, graph, config, rng)
            taken.add(child.path)
            offspring.append(child)
        population = fitness_assign([best] + carried + offspring)
        challenger = max(population, key=lambda c: c.raw_bandwidth)
        improved = challenger.raw_bandwidth > best.raw_bandwidth
        if improved:
            best = challenger
        history.append(_stats(generation, population, best))
        if on_generation:
            on_generation(generation, population)
        converged = not improved and all(
            c.raw_bandwidth / best.raw_bandwidth > config.acceptance_threshold for c in population)
        if converged:
            break

    best = next(c for c in population if c.path == best.path)
    return GaResult(
        best_path=best,
        generations_used=generation,
        converged=converged,
        history=tuple(history),
        population=tuple(population),
    )


# -- exact oracle ----------------------------------------------------------------

def widest_path_oracle(graph: SurvivorGraph, source: int, dest: int) -> Chromosome:
    """Exact maximum-bottleneck path.

    A maximin best-first search fixes the widest bottleneck; among paths
    that achieve it, the one with fewest hops and then the lexicographically
    smallest node sequence is returned.
    """
    _check_endpoints(graph, source, dest)
    width = {source: math.inf}
    heap = [(-math.inf, source)]
    done: set[int] = set()
    while heap:
        neg, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v in graph.successors[u]:
            w = min(-neg, graph.bandwidth(u, v))
            if w > width.get(v, -math.inf):
                width[v] = w
                heapq.heappush(heap, (-w, v))
    if dest not in width:
        raise NoPathError(source, dest)
    bottleneck = width[dest]

    # hop distance to dest using only links at least as wide as the bottleneck
    wide_pred: dict[int, list[int]] = {}
    for (u, v), bw in graph.kept_edges.items():
        if bw >= bottleneck:
            wide_pred.setdefault(v, []).append(u)
    dist = {dest: 0}
    queue = deque([dest])
    while queue:
        v = queue.popleft()
        for u in wide_pred.get(v, ()):
            if u not in dist:
                dist[u] = dist[v] + 1
                queue.append(u)
    path = [source]
    while path[-1] != dest:
        u = path[-1]
        path.append(min(
            v for v in graph.successors[u]
            if graph.bandwidth(u, v) >= bottleneck and dist.get(v) == dist[u] - 1
        ))
    return make_chromosome(graph, path)
