"""Graded vs. non-graded GA routing experiments and their CSV reports."""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from gradenet.ga_router import GaConfig, GaResult, NoPathError, evolve
from gradenet.grading import (
    GradingConfig,
    RegionStarvationError,
    SurvivorGraph,
    level1_select,
    mean_grade,
)
from gradenet.knowledge_base import KnowledgeEntry, next_run_counter, record
from gradenet.topology import Topology, generate_topology, save_topology

REPORT_HEADER = (
    "total_nodes", "mode", "nodes_selected", "route_length", "generations_used",
    "converged", "best_bandwidth", "mean_grade", "wall_time_ms", "error",
    "seed", "topology_fingerprint",
)
MODES = ("graded", "nongraded")


@dataclass(frozen=True)
class HarnessConfig:
    grading: GradingConfig = field(default_factory=GradingConfig)
    ga: GaConfig = field(default_factory=GaConfig)
    edge_density: float = 0.25
    # target nodes per region; every topology gets at least two regions
    region_size: int = 16
    # re-admit dropped relays so that the regions stay connected after Level-1
    connect_regions: bool = True

    def region_count(self, node_count: int) -> int:
        return min(node_count, max(2, node_count // self.region_size))


@dataclass(frozen=True)
class ExperimentRecord:
    total_nodes: int
    mode: str
    seed: int
    topology_fingerprint: str
    nodes_selected: int | None = None
    route_length: int | None = None
    generations_used: int | None = None
    converged: bool | None = None
    best_bandwidth: float | None = None
    mean_grade: float | None = None
    wall_time_ms: float | None = field(default=None, compare=False)
    error: str = ""
    best_path: tuple[int, ...] = field(default=(), compare=False, repr=False)

    @property
    def failed(self) -> bool:
        return bool(self.error)


# -- config file -------------------------------------------------------------

_GRADING_KEYS = {f.name for f in fields(GradingConfig)} - {"window", "grade_map"}
_GA_KEYS = {f.name for f in fields(GaConfig)}
_HARNESS_KEYS = {"edge_density", "region_size", "connect_regions"}
_INT_KEYS = {"connect_regions", "nd_limit", "top_classes", "population_size", "generations", "seed",
             "mutation_attempts", "enumeration_budget", "region_size", "window_low", "window_high"}
# accepted for completeness; no formula in use depends on them
_IGNORED_KEYS = {"channel_cost", "delay_constant_d"}


def parse_config(text: str) -> HarnessConfig:
    """Build a HarnessConfig from ``key=value`` lines (``#`` comments allowed)."""
    grading: dict = {}
    ga: dict = {}
    harness: dict = {}
    window = [None, None]
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            parsed = int(value) if key in _INT_KEYS else float(value)
        except ValueError:
            raise ValueError(f"config line {lineno}: bad value {value!r} for {key}") from None
        if key in _GRADING_KEYS:
            grading[key] = parsed
        elif key in _GA_KEYS:
            ga[key] = parsed
        elif key in _HARNESS_KEYS:
            harness[key] = parsed
        elif key == "window_low":
            window[0] = parsed
        elif key == "window_high":
            window[1] = parsed
        elif key in _IGNORED_KEYS:
            continue
        else:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
    if window != [None, None]:
        lo, hi = GradingConfig().window
        grading["window"] = (window[0] if window[0] is not None else lo,
                             window[1] if window[1] is not None else hi)
    return HarnessConfig(grading=GradingConfig(**grading), ga=GaConfig(**ga), **harness)


def load_config(path: str | Path | None) -> HarnessConfig:
    if path is None:
        return HarnessConfig()
    return parse_config(Path(path).read_text(encoding="utf-8"))


# -- experiment cells ------------------------------------------------------------

def derive_seed(*parts: int) -> int:
    """Stable 63-bit seed from a tuple of integers."""
    state = np.random.SeedSequence([int(p) & 0xFFFFFFFFFFFFFFFF for p in parts]).generate_state(2)
    return int((int(state[0]) << 32 | int(state[1])) & 0x7FFFFFFFFFFFFFFF)


def endpoints(topology: Topology) -> tuple[int, int]:
    """Lowest id of the first region and lowest id of the last region."""
    members = topology.region_members
    labels = list(members)
    return members[labels[0]][0], members[labels[-1]][0]


def graded_route(
    topology: Topology, source: int, dest: int, config: HarnessConfig
) -> tuple[SurvivorGraph, GaResult]:
    survivors = level1_select(topology, config.grading, pinned=(source, dest), connect=config.connect_regions)
    return survivors, evolve(survivors, source, dest, config.ga)


def nongraded_route(topology: Topology, source: int, dest: int, config: HarnessConfig) -> GaResult:
    return evolve(SurvivorGraph.full(topology), source, dest, config.ga)


def _run_cell(size: int, seed: int, config: HarnessConfig) -> tuple[Topology, list[ExperimentRecord]]:
    topology = generate_topology(
        size, config.region_count(size), config.edge_density, derive_seed(seed, size)
    )
    fp = topology.fingerprint()
    source, dest = endpoints(topology)
    ga = replace(config.ga, seed=derive_seed(config.ga.seed, seed, size))
    cell_config = replace(config, ga=ga)
    base = dict(total_nodes=size, seed=seed, topology_fingerprint=fp)

    rows = []
    start = time.perf_counter()
    try:
        survivors, result = graded_route(topology, source, dest, cell_config)
        graded_nodes = survivors.graded_nodes
        rows.append(ExperimentRecord(
            mode="graded",
            nodes_selected=len(survivors.kept_nodes),
            route_length=result.best_path.hops,
            generations_used=result.generations_used,
            converged=result.converged,
            best_bandwidth=result.best_path.raw_bandwidth,
            mean_grade=mean_grade(survivors) if graded_nodes else None,
            wall_time_ms=(time.perf_counter() - start) * 1e3,
            best_path=result.best_path.path,
            **base,
        ))
    except RegionStarvationError:
        rows.append(ExperimentRecord(mode="graded", error="region_starvation", **base))
    except NoPathError:
        rows.append(ExperimentRecord(mode="graded", error="no_path", **base))

    start = time.perf_counter()
    try:
        result = nongraded_route(topology, source, dest, cell_config)
        touched = {n for c in result.population for n in c.path}
        rows.append(ExperimentRecord(
            mode="nongraded",
            nodes_selected=len(touched),
            route_length=result.best_path.hops,
            generations_used=result.generations_used,
            converged=result.converged,
            best_bandwidth=result.best_path.raw_bandwidth,
            wall_time_ms=(time.perf_counter() - start) * 1e3,
            best_path=result.best_path.path,
            **base,
        ))
    except NoPathError:
        rows.append(ExperimentRecord(mode="nongraded", error="no_path", **base))
    return topology, rows


def _cell_rows(args) -> list[ExperimentRecord]:
    return _run_cell(*args)[1]


def run_comparison(
    sizes: Sequence[int],
    seeds: Sequence[int],
    config: HarnessConfig | None = None,
    kb: str | Path | None = None,
    topology_dir: str | Path | None = None,
    jobs: int = 1,
) -> list[ExperimentRecord]:
    """Graded and non-graded GA on the same topology and GA seed for every (size, seed)."""
    config = config or HarnessConfig()
    if any(s < 4 for s in sizes):
        raise ValueError("topology sizes must be at least 4")
    cells = [(size, seed, config) for size in sizes for seed in seeds]

    if topology_dir is not None or jobs <= 1:
        results = []
        for cell in cells:
            topology, rows = _run_cell(*cell)
            if topology_dir is not None:
                out = Path(topology_dir)
                out.mkdir(parents=True, exist_ok=True)
                save_topology(topology, out / f"topology_n{cell[0]}_s{cell[1]}.txt")
            results.append(rows)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_cell_rows, cells))

    records = [r for rows in results for r in rows]
    if kb is not None:
        for r in records:
            if r.mode == "graded" and not r.failed:
                record(KnowledgeEntry(
                    topology_fingerprint=r.topology_fingerprint,
                    source=r.best_path[0],
                    dest=r.best_path[-1],
                    best_path=r.best_path,
                    raw_bandwidth=r.best_bandwidth,
                    mean_grade=r.mean_grade if r.mean_grade is not None else math.nan,
                    recorded_at=next_run_counter(kb),
                ), kb)
    return sort_records(records)


def sort_records(records: Iterable[ExperimentRecord]) -> list[ExperimentRecord]:
    return sorted(records, key=lambda r: (r.total_nodes, MODES.index(r.mode), r.seed))


# -- CSV ------------------------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_report(records: Sequence[ExperimentRecord], out_path: str | Path, timing: bool = False) -> None:
    """Write the comparison CSV. Wall times are left blank unless ``timing``
    is set, so that repeated runs produce identical files."""
    if not records:
        raise ValueError("no records to report")
    try:
        with open(out_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(REPORT_HEADER)
            for r in sort_records(records):
                row = asdict(r)
                if not timing:
                    row["wall_time_ms"] = None
                writer.writerow([_fmt(row[col]) for col in REPORT_HEADER])
    except OSError as exc:
        raise OSError(f"{out_path}: {exc}") from exc


def read_report(path: str | Path) -> list[ExperimentRecord]:
    def opt(cast, text):
        return cast(text) if text != "" else None

    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != REPORT_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        for row in reader:
            out.append(ExperimentRecord(
                total_nodes=int(row["total_nodes"]),
                mode=row["mode"],
                seed=int(row["seed"]),
                topology_fingerprint=row["topology_fingerprint"],
                nodes_selected=opt(int, row["nodes_selected"]),
                route_length=opt(int, row["route_length"]),
                generations_used=opt(int, row["generations_used"]),
                converged=opt(lambda s: s == "true", row["converged"]),
                best_bandwidth=opt(float, row["best_bandwidth"]),
                mean_grade=opt(float, row["mean_grade"]),
                wall_time_ms=opt(float, row["wall_time_ms"]),
                error=row["error"],
            ))
    return out


def write_history(result: GaResult, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["generation", "best_fitness", "mean_fitness", "distinct_paths", "best_bandwidth"])
        for h in result.history:
            writer.writerow([h.generation, repr(h.best_fitness), repr(h.mean_fitness),
                             h.distinct_paths, repr(h.best_bandwidth)])
