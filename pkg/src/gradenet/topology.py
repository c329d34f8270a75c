"""Region-partitioned random topologies and their text file format.

A topology is a directed graph whose links come in both directions, with a
per-node quality vector (bandwidth, lifetime, resources, M/M/1 rates,
current traffic), per-link bandwidth, a region label per node and a sparse
external traffic matrix ``gamma[(j, k)]`` in messages/second.

File format (UTF-8, ``#`` starts a comment)::

    node <id> <region> <bandwidth> <lifetime> <resource> <lambda> <mu> <capacity> <traffic>
    edge <from> <to> <link_bandwidth>
    gamma <j> <k> <rate>
"""

from __future__ import annotations

import hashlib
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np


class TopologyError(ValueError):
    """Invalid topology contents or an unparsable topology file."""


@dataclass(frozen=True)
class NodeAttributes:
    bandwidth_mbps: float
    network_lifetime: float
    resource_allocated: float
    arrival_rate_lambda: float
    service_rate_mu: float
    capacity: float
    current_traffic: float

    def __post_init__(self):
        if not self.bandwidth_mbps > 0:
            raise TopologyError(f"bandwidth must be positive, got {self.bandwidth_mbps}")
        if not self.service_rate_mu > 0:
            raise TopologyError(f"service rate must be positive, got {self.service_rate_mu}")
        if not self.capacity > 0:
            raise TopologyError(f"capacity must be positive, got {self.capacity}")
        for name in ("network_lifetime", "resource_allocated"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise TopologyError(f"{name} must lie in [0, 1], got {value}")
        if self.arrival_rate_lambda < 0 or self.current_traffic < 0:
            raise TopologyError("arrival rate and traffic must be nonnegative")

    @property
    def service_capacity(self) -> float:
        """Effective service rate mu * C of the node's outgoing channel."""
        return self.service_rate_mu * self.capacity


@dataclass(frozen=True)
class AttributeRanges:
    """Uniform sampling ranges for generated node attributes."""

    bandwidth: tuple[float, float] = (10.0, 100.0)
    lifetime: tuple[float, float] = (0.0, 1.0)
    resource: tuple[float, float] = (0.0, 1.0)
    service_rate: tuple[float, float] = (50.0, 150.0)
    capacity: tuple[float, float] = (1.0, 10.0)
    # arrival rate is drawn from [0, load_cap * mu * C]
    load_cap: float = 0.9
    gamma_max: float = 5.0


@dataclass(frozen=True, eq=True)
class Topology:
    """Immutable network description. Treat the mappings as read-only."""

    nodes: dict[int, NodeAttributes]
    edges: dict[tuple[int, int], float]
    regions: dict[int, int]
    gamma: dict[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.nodes:
            raise TopologyError("topology has no nodes")
        missing = sorted(set(self.nodes) - set(self.regions))
        if missing:
            raise TopologyError(f"node {missing[0]} has no region")
        extra = sorted(set(self.regions) - set(self.nodes))
        if extra:
            raise TopologyError(f"region assigned to unknown node {extra[0]}")
        for (u, v), bw in self.edges.items():
            for n in (u, v):
                if n not in self.nodes:
                    raise TopologyError(f"edge {u} -> {v} references unknown node {n}")
            if u == v:
                raise TopologyError(f"self-loop on node {u}")
            if not bw > 0:
                raise TopologyError(f"edge {u} -> {v} has non-positive bandwidth {bw}")
        for (j, k), rate in self.gamma.items():
            for n in (j, k):
                if n not in self.nodes:
                    raise TopologyError(f"gamma {j} {k} references unknown node {n}")
            if rate < 0:
                raise TopologyError(f"gamma {j} {k} is negative")
            if j == k and rate != 0:
                raise TopologyError(f"gamma diagonal entry for node {j} must be 0")

    @property
    def node_ids(self) -> list[int]:
        return sorted(self.nodes)

    @cached_property
    def region_members(self) -> dict[int, list[int]]:
        members: dict[int, list[int]] = {}
        for node in sorted(self.regions):
            members.setdefault(self.regions[node], []).append(node)
        return dict(sorted(members.items()))

    @cached_property
    def successors(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {n: [] for n in self.node_ids}
        for u, v in sorted(self.edges):
            adj[u].append(v)
        return adj

    @cached_property
    def in_degrees(self) -> dict[int, int]:
        deg = dict.fromkeys(self.nodes, 0)
        for _, v in self.edges:
            deg[v] += 1
        return deg

    @property
    def gamma_total(self) -> float:
        return math.fsum(self.gamma.values())

    @cached_property
    def serialized(self) -> str:
        return dumps(self)

    def fingerprint(self) -> str:
        """64-bit content hash of the serialized topology, as 16 hex digits."""
        return hashlib.blake2b(self.serialized.encode("utf-8"), digest_size=8).hexdigest()

    def is_connected(self) -> bool:
        """Connectivity of the underlying undirected graph."""
        undirected: dict[int, set[int]] = {n: set() for n in self.nodes}
        for u, v in self.edges:
            undirected[u].add(v)
            undirected[v].add(u)
        start = next(iter(self.nodes))
        seen = {start}
        queue = deque([start])
        while queue:
            for nxt in undirected[queue.popleft()]:
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        return len(seen) == len(self.nodes)


def node_density(topology: Topology, node: int) -> int:
    """In-degree of ``node``; this is the node density used for grading."""
    if node not in topology.nodes:
        raise KeyError(f"unknown node {node}")
    return topology.in_degrees[node]


def split_regions(node_count: int, region_count: int) -> list[list[int]]:
    """Contiguous near-equal blocks of node ids (sizes differ by at most one)."""
    base, extra = divmod(node_count, region_count)
    blocks, start = [], 0
    for r in range(region_count):
        size = base + (1 if r < extra else 0)
        blocks.append(list(range(start, start + size)))
        start += size
    return blocks


def _draw_attributes(rng: np.random.Generator, ranges: AttributeRanges) -> NodeAttributes:
    bandwidth = float(rng.uniform(*ranges.bandwidth))
    lifetime = float(rng.uniform(*ranges.lifetime))
    resource = float(rng.uniform(*ranges.resource))
    mu = float(rng.uniform(*ranges.service_rate))
    capacity = float(rng.uniform(*ranges.capacity))
    lam = float(rng.uniform(0.0, ranges.load_cap * mu * capacity))
    traffic = float(rng.uniform(0.0, bandwidth))
    return NodeAttributes(bandwidth, lifetime, resource, lam, mu, capacity, traffic)


def _components(members: list[int], pairs: set[tuple[int, int]]) -> list[list[int]]:
    adj: dict[int, list[int]] = {n: [] for n in members}
    for a, b in pairs:
        if a in adj and b in adj:
            adj[a].append(b)
            adj[b].append(a)
    seen: set[int] = set()
    comps = []
    for n in members:
        if n in seen:
            continue
        comp, stack = [], [n]
        seen.add(n)
        while stack:
            cur = stack.pop()
            comp.append(cur)
            for nxt in adj[cur]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        comps.append(sorted(comp))
    return comps


def generate_topology(
    node_count: int,
    region_count: int,
    edge_density: float,
    seed: int,
    ranges: AttributeRanges | None = None,
) -> Topology:
    """Random region-based topology, fully determined by the arguments.

    Within a region every node pair is linked with probability
    ``edge_density``; disconnected pieces of a region are then chained
    together. Regions sit on a ring and each ring-adjacent pair receives
    ``max(1, ceil(edge_density * smaller_region_size))`` bridge links.
    Every link is bidirectional and carries the smaller endpoint bandwidth.
    """
    if node_count < 2:
        raise ValueError(f"node_count must be at least 2, got {node_count}")
    if region_count < 1:
        raise ValueError(f"region_count must be at least 1, got {region_count}")
    if region_count > node_count:
        raise ValueError("region_count cannot exceed node_count")
    if not 0.0 < edge_density <= 1.0:
        raise ValueError(f"edge_density must lie in (0, 1], got {edge_density}")
    ranges = ranges or AttributeRanges()
    rng = np.random.default_rng(seed)

    blocks = split_regions(node_count, region_count)
    regions = {n: r for r, block in enumerate(blocks) for n in block}
    nodes = {n: _draw_attributes(rng, ranges) for n in range(node_count)}

    pairs: set[tuple[int, int]] = set()
    for block in blocks:
        for i, a in enumerate(block):
            for b in block[i + 1:]:
                if rng.random() < edge_density:
                    pairs.add((a, b))
        comps = _components(block, pairs)
        for left, right in zip(comps, comps[1:]):
            a = left[int(rng.integers(len(left)))]
            b = right[int(rng.integers(len(right)))]
            pairs.add((min(a, b), max(a, b)))

    ring: list[tuple[int, int]] = []
    if region_count == 2:
        ring = [(0, 1)]
    elif region_count > 2:
        ring = [(r, (r + 1) % region_count) for r in range(region_count)]
    for ra, rb in ring:
        left, right = blocks[ra], blocks[rb]
        bridges = max(1, math.ceil(edge_density * min(len(left), len(right))))
        for _ in range(bridges):
            a = left[int(rng.integers(len(left)))]
            b = right[int(rng.integers(len(right)))]
            pairs.add((min(a, b), max(a, b)))

    edges: dict[tuple[int, int], float] = {}
    for a, b in sorted(pairs):
        bw = min(nodes[a].bandwidth_mbps, nodes[b].bandwidth_mbps)
        edges[(a, b)] = bw
        edges[(b, a)] = bw

    gamma: dict[tuple[int, int], float] = {}
    for j in range(node_count):
        for k in range(node_count):
            if j == k:
                continue
            rate = float(rng.uniform(0.0, ranges.gamma_max))
            if rate > 0:
                gamma[(j, k)] = rate

    return Topology(nodes=nodes, edges=dict(sorted(edges.items())), regions=regions, gamma=gamma)


# -- file format ------------------------------------------------------------

def dumps(topology: Topology) -> str:
    lines = []
    for n in topology.node_ids:
        a = topology.nodes[n]
        values = (
            a.bandwidth_mbps, a.network_lifetime, a.resource_allocated,
            a.arrival_rate_lambda, a.service_rate_mu, a.capacity, a.current_traffic,
        )
        lines.append(f"node {n} {topology.regions[n]} " + " ".join(repr(float(v)) for v in values))
    for (u, v), bw in sorted(topology.edges.items()):
        lines.append(f"edge {u} {v} {float(bw)!r}")
    for (j, k), rate in sorted(topology.gamma.items()):
        if rate != 0:
            lines.append(f"gamma {j} {k} {float(rate)!r}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> Topology:
    nodes: dict[int, NodeAttributes] = {}
    regions: dict[int, int] = {}
    raw_edges: list[tuple[int, int, int, float]] = []
    gamma: dict[tuple[int, int], float] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        kind, *fields = line.split()
        try:
            if kind == "node":
                if len(fields) == 8:
                    raise TopologyError(f"line {lineno}: node {fields[0]} is missing its region")
                if len(fields) != 9:
                    raise TopologyError(f"line {lineno}: node needs 9 fields, got {len(fields)}")
                nid, region = int(fields[0]), int(fields[1])
                if nid in nodes:
                    raise TopologyError(f"line {lineno}: duplicate node id {nid}")
                nodes[nid] = NodeAttributes(*(float(x) for x in fields[2:]))
                regions[nid] = region
            elif kind == "edge":
                if len(fields) != 3:
                    raise TopologyError(f"line {lineno}: edge needs 3 fields, got {len(fields)}")
                raw_edges.append((lineno, int(fields[0]), int(fields[1]), float(fields[2])))
            elif kind == "gamma":
                if len(fields) != 3:
                    raise TopologyError(f"line {lineno}: gamma needs 3 fields, got {len(fields)}")
                gamma[(int(fields[0]), int(fields[1]))] = float(fields[2])
            else:
                raise TopologyError(f"line {lineno}: unknown record type {kind!r}")
        except TopologyError as exc:
            if str(exc).startswith("line "):
                raise
            raise TopologyError(f"line {lineno}: {exc}") from exc
        except ValueError as exc:
            raise TopologyError(f"line {lineno}: {exc}") from exc

    edges: dict[tuple[int, int], float] = {}
    for lineno, u, v, bw in raw_edges:
        for n in (u, v):
            if n not in nodes:
                raise TopologyError(f"line {lineno}: edge {u} -> {v} references unknown node {n}")
        edges[(u, v)] = bw
    for j, k in gamma:
        for n in (j, k):
            if n not in nodes:
                raise TopologyError(f"gamma {j} {k} references unknown node {n}")
    return Topology(nodes=nodes, edges=dict(sorted(edges.items())), regions=regions, gamma=gamma)


def save_topology(topology: Topology, path: str | Path) -> None:
    Path(path).write_text(topology.serialized, encoding="utf-8")


def load_topology(path: str | Path) -> Topology:
    return loads(Path(path).read_text(encoding="utf-8"))
