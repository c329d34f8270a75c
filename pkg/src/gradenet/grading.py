"""Level-1 node grading: priority chain, grade scale and region-wise filtering."""

from __future__ import annotations

import csv
import heapq
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from statistics import fmean
from typing import Iterable

from gradenet.queueing import UnstableQueueError, congestion_score, node_state
from gradenet.topology import NodeAttributes, Topology

PREDICATES = ("NL", "ND<5", "TC", "RA", "delay")

# priority when the i-th predicate of PREDICATES is the first to fail
_FAIL_PRIORITY = (6, 5, 4, 3, 2)

DEFAULT_GRADE_MAP = {1: 0, 2: 1, 3: 2, 4: 3, 5: 3, 6: -3}


class RegionStarvationError(RuntimeError):
    def __init__(self, region: int):
        self.region = region
        super().__init__(f"region {region} has no node left after Level-1 selection")


@dataclass(frozen=True)
class GradingConfig:
    nl_threshold: float = 0.1
    nd_limit: int = 5
    tc_threshold: float = 0.7
    ra_threshold: float = 0.3
    delay_threshold: float = 0.05
    top_classes: int = 3
    window: tuple[int, int] = (0, 2)
    grade_map: dict[int, int] = field(default_factory=lambda: dict(DEFAULT_GRADE_MAP))

    def __post_init__(self):
        if sorted(self.grade_map) != [1, 2, 3, 4, 5, 6]:
            raise ValueError("grade_map must cover priorities 1..6")
        if any(not -3 <= g <= 3 for g in self.grade_map.values()):
            raise ValueError("grades must lie in -3..+3")
        if self.window[0] > self.window[1]:
            raise ValueError(f"empty grade window {self.window}")


@dataclass(frozen=True)
class GradeReport:
    priority: int
    grade: int
    reasons: tuple[tuple[str, bool], ...]


def priority_from_outcomes(outcomes: Iterable[bool]) -> int:
    """Priority P of the nested-IF chain given (NL, ND<5, TC, RA, delay) outcomes.

    An outcome is True when the node passes that check (alive, sparse,
    uncongested, resourced, low delay). The first failure fixes P.
    """
    outcomes = tuple(outcomes)
    if len(outcomes) != len(PREDICATES):
        raise ValueError(f"expected {len(PREDICATES)} outcomes, got {len(outcomes)}")
    for passed, priority in zip(outcomes, _FAIL_PRIORITY):
        if not passed:
            return priority
    return 1


def evaluate_predicates(
    attrs: NodeAttributes, in_degree: int, config: GradingConfig
) -> tuple[tuple[str, bool], ...]:
    try:
        low_delay = node_state(attrs).mean_delay_s < config.delay_threshold
    except UnstableQueueError:
        low_delay = False
    outcomes = (
        attrs.network_lifetime > config.nl_threshold,
        in_degree < config.nd_limit,
        congestion_score(attrs) < config.tc_threshold,
        attrs.resource_allocated > config.ra_threshold,
        low_delay,
    )
    return tuple(zip(PREDICATES, outcomes))


def priority_of(
    attrs: NodeAttributes, in_degree: int, config: GradingConfig | None = None
) -> GradeReport:
    config = config or GradingConfig()
    reasons = evaluate_predicates(attrs, in_degree, config)
    priority = priority_from_outcomes(ok for _, ok in reasons)
    return GradeReport(priority=priority, grade=config.grade_map[priority], reasons=reasons)


@dataclass(frozen=True)
class RegionSummary:
    region: int
    kept: int
    dropped: int
    mean_grade: float | None


@dataclass(frozen=True)
class SurvivorGraph:
    """Subgraph handed to the path search.

    ``pinned`` holds nodes forced into the graph regardless of grade (the
    route endpoints) and ``connectors`` holds dropped nodes re-admitted only
    to reconnect the survivors. Neither counts in the grade statistics.
    """

    kept_nodes: frozenset[int]
    kept_edges: dict[tuple[int, int], float]
    region_summaries: tuple[RegionSummary, ...] = ()
    reports: dict[int, GradeReport] = field(default_factory=dict)
    pinned: frozenset[int] = frozenset()
    connectors: frozenset[int] = frozenset()

    @classmethod
    def full(cls, topology: Topology) -> "SurvivorGraph":
        """Whole topology without any filtering."""
        return cls(kept_nodes=frozenset(topology.nodes), kept_edges=dict(topology.edges))

    @classmethod
    def from_edges(cls, edges: dict[tuple[int, int], float], nodes: Iterable[int] = ()) -> "SurvivorGraph":
        kept = set(nodes)
        for u, v in edges:
            kept.update((u, v))
        return cls(kept_nodes=frozenset(kept), kept_edges=dict(edges))

    @cached_property
    def successors(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {n: [] for n in sorted(self.kept_nodes)}
        for u, v in sorted(self.kept_edges):
            adj[u].append(v)
        return adj

    def bandwidth(self, u: int, v: int) -> float:
        return self.kept_edges[(u, v)]

    @property
    def graded_nodes(self) -> list[int]:
        return sorted(n for n in self.kept_nodes if n not in self.pinned and n not in self.connectors)


def grade_topology(topology: Topology, config: GradingConfig | None = None) -> dict[int, GradeReport]:
    config = config or GradingConfig()
    degrees = topology.in_degrees
    return {n: priority_of(topology.nodes[n], degrees[n], config) for n in topology.node_ids}


def level1_select(
    topology: Topology,
    config: GradingConfig | None = None,
    pinned: Iterable[int] = (),
    connect: bool = False,
) -> SurvivorGraph:
    """Region-wise Level-1 selection.

    In each region, keep nodes whose priority is among the ``top_classes``
    best priority classes present there and whose grade lies inside the
    selection window. Survivor edges are the topology edges between kept
    nodes. Raises RegionStarvationError if a region keeps nothing.

    With ``connect=True`` the survivors are then joined into one connected
    piece where possible, see ``reconnect``.
    """
    config = config or GradingConfig()
    pinned = frozenset(pinned)
    unknown = sorted(pinned - set(topology.nodes))
    if unknown:
        raise KeyError(f"unknown node {unknown[0]}")
    reports = grade_topology(topology, config)
    lo, hi = config.window

    kept: set[int] = set()
    selected_by_region: dict[int, list[int]] = {}
    for region, members in topology.region_members.items():
        classes = sorted({reports[n].priority for n in members})[: config.top_classes]
        selected = [
            n for n in members
            if reports[n].priority in classes and lo <= reports[n].grade <= hi
        ]
        region_kept = set(selected) | (pinned & set(members))
        if not region_kept:
            raise RegionStarvationError(region)
        kept |= region_kept
        selected_by_region[region] = selected

    connectors: frozenset[int] = frozenset()
    if connect:
        connectors = reconnect(topology, kept, reports)
        kept |= connectors

    summaries = []
    for region, members in topology.region_members.items():
        selected = selected_by_region[region]
        n_kept = sum(1 for n in members if n in kept)
        mean = fmean(reports[n].grade for n in selected) if selected else None
        summaries.append(RegionSummary(region, n_kept, len(members) - n_kept, mean))

    kept_edges = {(u, v): bw for (u, v), bw in topology.edges.items() if u in kept and v in kept}
    return SurvivorGraph(
        kept_nodes=frozenset(kept),
        kept_edges=kept_edges,
        region_summaries=tuple(summaries),
        reports=reports,
        pinned=pinned,
        connectors=connectors - pinned,
    )


def reconnect(topology: Topology, kept: set[int], reports: dict[int, GradeReport]) -> frozenset[int]:
    """Dropped nodes to re-admit so the kept nodes form one connected piece.

    Works on the undirected view of the links. Starting from the piece that
    holds the lowest kept id, repeatedly route to the nearest other piece
    through dropped nodes, where entering a dropped node costs its priority
    and nodes without network lifetime are never used. Pieces that cannot
    be reached are left apart.
    """
    neighbours: dict[int, set[int]] = {n: set() for n in topology.nodes}
    for u, v in topology.edges:
        neighbours[u].add(v)
        neighbours[v].add(u)
    members = set(kept)
    added: set[int] = set()

    def piece(start: int) -> set[int]:
        seen, stack = {start}, [start]
        while stack:
            for nxt in neighbours[stack.pop()]:
                if nxt in members and nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return seen

    main = piece(min(members))
    while len(main) < len(members):
        dist = dict.fromkeys(main, 0)
        prev: dict[int, int] = {}
        heap = [(0, n) for n in sorted(main)]
        heapq.heapify(heap)
        hit = None
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            if u in members and u not in main:
                hit = u
                break
            for v in sorted(neighbours[u]):
                if v in members:
                    step = 0
                elif reports[v].priority == 6:
                    continue
                else:
                    step = reports[v].priority
                if d + step < dist.get(v, math.inf):
                    dist[v] = d + step
                    prev[v] = u
                    heapq.heappush(heap, (d + step, v))
        if hit is None:
            break
        node = hit
        while node not in main:
            if node not in members:
                added.add(node)
            node = prev[node]
        members |= added
        main = piece(min(members))
    return frozenset(added)


def mean_grade(survivors: SurvivorGraph) -> float:
    """Mean grade over kept nodes that were selected by grade (pinned excluded)."""
    graded = survivors.graded_nodes
    if not graded:
        raise ValueError("survivor graph has no graded nodes")
    return fmean(survivors.reports[n].grade for n in graded)


def write_grade_report(topology: Topology, reports: dict[int, GradeReport], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["node", "region", "priority", "grade", "reasons"])
        for n in sorted(reports):
            rep = reports[n]
            reasons = ";".join(f"{name}={'pass' if ok else 'fail'}" for name, ok in rep.reasons)
            writer.writerow([n, topology.regions[n], rep.priority, rep.grade, reasons])
