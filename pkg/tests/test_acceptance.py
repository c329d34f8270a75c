"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` to see the summary lines.
"""

import csv
import itertools
import math
import subprocess
import sys
import time
from dataclasses import replace
from fractions import Fraction
from statistics import fmean

import networkx as nx
import numpy as np
import pytest

from conftest import undirected
from gradenet.ga_router import Chromosome, GaConfig, evolve, fitness_assign, is_valid_path
from gradenet.grading import (
    GradingConfig,
    RegionStarvationError,
    SurvivorGraph,
    grade_topology,
    level1_select,
    mean_grade,
    priority_of,
)
from gradenet.harness import HarnessConfig, run_comparison
from gradenet.knowledge_base import KnowledgeEntry, lookup, record
from gradenet.queueing import mm1_state, network_delay
from gradenet.topology import NodeAttributes, Topology, dumps, generate_topology, loads, load_topology, save_topology

SIZES = (4, 8, 16, 32, 64, 128, 256)
SEEDS = tuple(range(1, 11))


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")
        assert ok, detail
    return emit


def rel_err(a, b):
    return abs(a - b) / abs(b) if b else abs(a)


def test_criterion_1_mm1(report):
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        mu, cap = rng.uniform(1, 200), rng.uniform(0.5, 10)
        lam = rng.uniform(0, 0.99) * mu * cap
        st = mm1_state(lam, mu, cap)
        rho = Fraction(lam) / (Fraction(mu) * Fraction(cap))
        jobs = float(rho / (1 - rho))
        worst = max(worst, rel_err(st.mean_jobs, jobs), rel_err(st.mean_jobs, lam * st.mean_delay_s))
    elapsed = time.perf_counter() - start
    report(1, worst <= 1e-12 and elapsed < 1.0,
           f"M/M/1 over 1000 triples, worst relative error {worst:.2e}, {elapsed:.3f}s")


def ten_channel_topology(rng):
    # five-node bidirectional ring: ten directed channels
    nodes = {}
    for n in range(5):
        mu, cap = rng.uniform(50, 150), rng.uniform(1, 10)
        nodes[n] = NodeAttributes(50.0, 0.5, 0.5, 0.0, mu, cap, 0.0)
    edges = undirected((n, (n + 1) % 5, 10.0) for n in range(5))
    gamma = {(j, k): rng.uniform(0.1, 5) for j in range(5) for k in range(5) if j != k}
    return Topology(nodes, edges, {n: 0 for n in range(5)}, gamma)


def test_criterion_2_network_delay(report):
    rng = np.random.default_rng(202)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        t = ten_channel_topology(rng)
        flows = {e: rng.uniform(0, 0.95) * t.nodes[e[0]].service_rate_mu * t.nodes[e[0]].capacity
                 for e in t.edges}
        got = network_delay(t, flows).total_delay_s
        gamma = sum(Fraction(g) for g in t.gamma.values())
        expected = Fraction(0)
        for (u, v), lam in flows.items():
            served = Fraction(t.nodes[u].service_rate_mu) * Fraction(t.nodes[u].capacity)
            expected += (Fraction(lam) / gamma) / (served - Fraction(lam))
        worst = max(worst, rel_err(got, float(expected)))
    elapsed = time.perf_counter() - start
    report(2, worst <= 1e-12 and elapsed < 1.0,
           f"network delay over 100 ten-channel instances, worst relative error {worst:.2e}, {elapsed:.3f}s")


def nested_if(nl, nd, tc, ra, delay):
    if nl:
        if nd:
            if tc:
                if ra:
                    if delay:
                        return 1
                    return 2
                return 3
            return 4
        return 5
    return 6


def attrs_for(nl, tc, ra, delay):
    return NodeAttributes(
        bandwidth_mbps=100.0,
        network_lifetime=0.9 if nl else 0.05,
        resource_allocated=0.8 if ra else 0.1,
        arrival_rate_lambda=10.0 if delay else 90.0,
        service_rate_mu=100.0,
        capacity=1.0,
        current_traffic=20.0 if tc else 90.0,
    )


def test_criterion_3_priority_truth_table(report):
    mismatches = []
    for nl, nd, tc, ra, delay in itertools.product((True, False), repeat=5):
        rep = priority_of(attrs_for(nl, tc, ra, delay), in_degree=2 if nd else 6)
        observed = tuple(ok for _, ok in rep.reasons)
        if observed != (nl, nd, tc, ra, delay) or rep.priority != nested_if(nl, nd, tc, ra, delay):
            mismatches.append((nl, nd, tc, ra, delay))
    best = priority_of(attrs_for(True, True, True, True), 2)
    dead = priority_of(attrs_for(False, True, True, True), 2)
    ends = (best.grade, dead.grade) == (0, -3)
    report(3, not mismatches and ends,
           f"32/32 predicate outcomes follow the chain: {not mismatches}, grade endpoints 0 and -3: {ends}")


def test_criterion_4_level1_soundness(report):
    rng = np.random.default_rng(404)
    harness = HarnessConfig()
    config = GradingConfig()
    start = time.perf_counter()
    problems, starved, checked = [], 0, 0
    for i in range(100):
        n = int(rng.integers(16, 65))
        t = generate_topology(n, harness.region_count(n), harness.edge_density, seed=i)
        try:
            sv = level1_select(t, config)
        except RegionStarvationError as exc:
            # only acceptable when no member of that region sits in the window
            reports = grade_topology(t, config)
            members = t.region_members[exc.region]
            top = sorted({reports[m].priority for m in members})[:3]
            if any(reports[m].priority in top and 0 <= reports[m].grade <= 2 for m in members):
                problems.append(f"seed {i}: spurious starvation")
            starved += 1
            continue
        checked += 1
        if any(not 0 <= sv.reports[m].grade <= 2 for m in sv.kept_nodes):
            problems.append(f"seed {i}: kept node outside window")
        if any(u not in sv.kept_nodes or v not in sv.kept_nodes for u, v in sv.kept_edges):
            problems.append(f"seed {i}: dangling edge")
        induced = {e for e in t.edges if e[0] in sv.kept_nodes and e[1] in sv.kept_nodes}
        if induced != set(sv.kept_edges):
            problems.append(f"seed {i}: not the induced subgraph")
        if not 0 <= mean_grade(sv) <= 2:
            problems.append(f"seed {i}: mean grade out of range")
    elapsed = time.perf_counter() - start
    report(4, not problems and elapsed < 5.0,
           f"{checked} topologies sound, {starved} correctly reported starvation, "
           f"{len(problems)} violations, {elapsed:.2f}s")


def test_criterion_5_fitness_normalisation(report):
    rng = np.random.default_rng(505)
    worst = 0.0
    for _ in range(1000):
        size = int(rng.integers(1, 60))
        bws = rng.uniform(1e-3, 1e3, size) * 10.0 ** rng.integers(-3, 4, size)
        pop = fitness_assign([Chromosome((0, 1), float(b)) for b in bws])
        worst = max(worst, abs(math.fsum(c.fitness for c in pop) - 1.0))
    report(5, worst <= 1e-12, f"fitness sums over 1000 populations, worst deviation {worst:.2e}")


def random_survivor_graph(rng):
    n = int(rng.integers(4, 13))
    pairs = {(int(rng.integers(v)), v) for v in range(1, n)}
    pairs |= {(u, v) for u, v in itertools.combinations(range(n), 2) if rng.random() < 0.35}
    return SurvivorGraph.from_edges(undirected((u, v, float(rng.uniform(10, 100))) for u, v in pairs)), n


def brute_force_width(graph, s, d):
    g = nx.DiGraph(list(graph.kept_edges))
    return max(min(graph.kept_edges[e] for e in zip(p, p[1:])) for p in nx.all_simple_paths(g, s, d))


def test_criterion_6_ga_matches_oracle(report):
    rng = np.random.default_rng(606)
    config = GaConfig(population_size=20, generations=50)
    start = time.perf_counter()
    hits, invalid = 0, 0
    for seed in range(100):
        graph, n = random_survivor_graph(rng)
        s, d = 0, n - 1
        seen = []
        result = evolve(graph, s, d, replace(config, seed=seed),
                        on_generation=lambda _, pop: seen.append(pop))
        invalid += sum(not is_valid_path(graph, c.path, s, d) for pop in seen for c in pop)
        hits += result.best_path.raw_bandwidth == brute_force_width(graph, s, d)
    elapsed = time.perf_counter() - start
    report(6, hits >= 95 and invalid == 0 and elapsed < 30.0,
           f"GA reached the widest path on {hits}/100 graphs, {invalid} invalid chromosomes, {elapsed:.2f}s")


@pytest.mark.slow
def test_criterion_7_comparison_shape(report):
    start = time.perf_counter()
    rows = run_comparison(SIZES, SEEDS)
    elapsed = time.perf_counter() - start
    ok_rows = [r for r in rows if not r.failed]
    share = len(ok_rows) / len(rows)
    graded = {n: [r.nodes_selected for r in ok_rows if r.mode == "graded" and r.total_nodes == n] for n in SIZES}
    reduced = all(graded[n] and fmean(graded[n]) < n for n in SIZES if n >= 8)
    over = all(x <= n for n in SIZES for x in graded[n])
    pairs = {}
    for r in ok_rows:
        pairs.setdefault((r.total_nodes, r.seed), {})[r.mode] = r.generations_used
    shared = [p for p in pairs.values() if len(p) == 2]
    g_gen = fmean(p["graded"] for p in shared)
    n_gen = fmean(p["nongraded"] for p in shared)
    fractions = ", ".join(f"{n}:{fmean(graded[n]) / n:.2f}" for n in SIZES)
    # the per-size check is on the mean; single small topologies may keep every node
    full_rows = sum(x == n for n in SIZES if n >= 8 for x in graded[n])
    report(7, share >= 0.9 and reduced and over and g_gen <= n_gen and elapsed < 300,
           f"{share:.1%} rows ok, graded selection fraction per size {{{fractions}}}, "
           f"{full_rows} graded rows of size >= 8 kept every node, "
           f"mean generations graded {g_gen:.2f} vs non-graded {n_gen:.2f}, {elapsed:.1f}s")


@pytest.mark.slow
def test_criterion_8_cli_determinism(report, tmp_path):
    outs = []
    for name in ("first.csv", "second.csv"):
        out = tmp_path / name
        cmd = [sys.executable, "-m", "gradenet", "run", "--sizes", ",".join(map(str, SIZES)),
               "--seeds", "1..10", "--out", str(out), "--jobs", "4"]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        assert proc.returncode in (0, 2), proc.stderr
        outs.append(out.read_bytes())
    rows = len(list(csv.reader(outs[0].decode().splitlines()))) - 1
    report(8, outs[0] == outs[1], f"two CLI runs over {rows} rows byte-identical: {outs[0] == outs[1]}")


def test_criterion_9_persistence(report, tmp_path):
    rng = np.random.default_rng(909)
    topo_bad, kb_bad = 0, 0
    for i in range(200):
        n = int(rng.integers(2, 40))
        t = generate_topology(n, int(rng.integers(1, n + 1)), float(rng.uniform(0.05, 1.0)), seed=i)
        path = tmp_path / f"t{i}.txt"
        save_topology(t, path)
        back = load_topology(path)
        topo_bad += back != t or back.fingerprint() != t.fingerprint() or loads(dumps(back)) != t

        store = tmp_path / f"s{i}.kb"
        length = int(rng.integers(2, 10))
        nodes = tuple(int(x) for x in rng.choice(1000, size=length, replace=False))
        entry = KnowledgeEntry(t.fingerprint(), nodes[0], nodes[-1], nodes,
                               float(rng.uniform(0.1, 100)), float(rng.uniform(-3, 3)), i + 1)
        record(entry, store)
        kb_bad += lookup(entry.topology_fingerprint, entry.source, entry.dest, store) != entry
    report(9, topo_bad == 0 and kb_bad == 0,
           f"200 topology round trips ({topo_bad} mismatches), 200 knowledge-base round trips ({kb_bad} mismatches)")
