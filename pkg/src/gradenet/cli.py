"""Command line entry point: ``gradenet run|grade|route|oracle|generate``."""

from __future__ import annotations

import argparse
import sys

from gradenet import knowledge_base
from gradenet.ga_router import NoPathError, evolve, widest_path_oracle
from gradenet.grading import (
    RegionStarvationError,
    SurvivorGraph,
    grade_topology,
    mean_grade,
    write_grade_report,
)
from gradenet.harness import (
    emit_report,
    graded_route,
    load_config,
    run_comparison,
    write_history,
)
from gradenet.queueing import UnstableQueueError, network_delay, route_flows
from gradenet.topology import TopologyError, generate_topology, load_topology, save_topology

EXIT_OK, EXIT_USAGE, EXIT_FAILURES = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_int_list(text: str) -> list[int]:
    """``4,8,16`` or ``1..10`` (inclusive) or a mix: ``1..3,7``."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            lo_i, hi_i = int(lo), int(hi)
            if hi_i < lo_i:
                raise argparse.ArgumentTypeError(f"empty range {part!r}")
            out.extend(range(lo_i, hi_i + 1))
        else:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _int_list(text: str) -> list[int]:
    try:
        return parse_int_list(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gradenet", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="graded vs. non-graded comparison over topology sizes")
    run.add_argument("--sizes", type=_int_list, default=[4, 8, 16, 32, 64, 128, 256])
    run.add_argument("--seeds", type=_int_list, default=list(range(1, 11)))
    run.add_argument("--config")
    run.add_argument("--out", required=True)
    run.add_argument("--kb")
    run.add_argument("--topology-dir")
    run.add_argument("--timing", action="store_true", help="write wall_time_ms (makes output run-dependent)")
    run.add_argument("--jobs", type=int, default=1)

    grade = sub.add_parser("grade", help="Level-1 grade report for a topology file")
    grade.add_argument("--topology", required=True)
    grade.add_argument("--out", required=True)
    grade.add_argument("--config")

    route = sub.add_parser("route", help="GA route between two nodes")
    route.add_argument("--topology", required=True)
    route.add_argument("--source", type=int, required=True)
    route.add_argument("--dest", type=int, required=True)
    route.add_argument("--mode", choices=("graded", "nongraded"), default="graded")
    route.add_argument("--config")
    route.add_argument("--kb")
    route.add_argument("--history")

    oracle = sub.add_parser("oracle", help="exact widest path between two nodes")
    oracle.add_argument("--topology", required=True)
    oracle.add_argument("--source", type=int, required=True)
    oracle.add_argument("--dest", type=int, required=True)

    gen = sub.add_parser("generate", help="write a random region-based topology file")
    gen.add_argument("--nodes", type=int, required=True)
    gen.add_argument("--regions", type=int, required=True)
    gen.add_argument("--density", type=float, required=True)
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--out", required=True)
    return parser


def _fmt_path(path) -> str:
    return "-".join(str(n) for n in path)


def cmd_run(args) -> int:
    config = load_config(args.config)
    records = run_comparison(
        args.sizes, args.seeds, config, kb=args.kb, topology_dir=args.topology_dir, jobs=args.jobs
    )
    emit_report(records, args.out, timing=args.timing)
    failed = sum(r.failed for r in records)
    print(f"{len(records)} rows written to {args.out}, {failed} failed")
    return EXIT_FAILURES if failed else EXIT_OK


def cmd_grade(args) -> int:
    topology = load_topology(args.topology)
    config = load_config(args.config)
    write_grade_report(topology, grade_topology(topology, config.grading), args.out)
    print(f"{len(topology.nodes)} nodes graded, report in {args.out}")
    return EXIT_OK


def cmd_route(args) -> int:
    topology = load_topology(args.topology)
    config = load_config(args.config)
    fingerprint = topology.fingerprint()
    if args.kb:
        hit = knowledge_base.lookup(fingerprint, args.source, args.dest, args.kb)
        if hit is not None:
            print(f"path {_fmt_path(hit.best_path)} bandwidth {hit.raw_bandwidth!r} (knowledge base)")
            return EXIT_OK

    if args.mode == "graded":
        survivors, result = graded_route(topology, args.source, args.dest, config)
        grade = mean_grade(survivors) if survivors.graded_nodes else float("nan")
        print(f"level-1 kept {len(survivors.kept_nodes)} of {len(topology.nodes)} nodes, mean grade {grade:.3f}")
    else:
        result = evolve(SurvivorGraph.full(topology), args.source, args.dest, config.ga)
        grade = float("nan")
    best = result.best_path
    print(f"path {_fmt_path(best.path)} bandwidth {best.raw_bandwidth!r} hops {best.hops}")
    print(f"generations {result.generations_used} converged {str(result.converged).lower()}")
    if topology.gamma_total > 0:
        flows = route_flows({(args.source, args.dest): best.path}, topology.gamma)
        try:
            delay = network_delay(topology, flows)
            print(f"network delay {delay.total_delay_s!r} s")
        except UnstableQueueError as exc:
            print(f"network delay unavailable: {exc}")
    if args.history:
        write_history(result, args.history)
    if args.kb and args.mode == "graded":
        knowledge_base.record(knowledge_base.KnowledgeEntry(
            topology_fingerprint=fingerprint,
            source=args.source,
            dest=args.dest,
            best_path=best.path,
            raw_bandwidth=best.raw_bandwidth,
            mean_grade=grade,
            recorded_at=knowledge_base.next_run_counter(args.kb),
        ), args.kb)
    return EXIT_OK


def cmd_oracle(args) -> int:
    topology = load_topology(args.topology)
    best = widest_path_oracle(SurvivorGraph.full(topology), args.source, args.dest)
    print(f"path {_fmt_path(best.path)} bandwidth {best.raw_bandwidth!r} hops {best.hops}")
    return EXIT_OK


def cmd_generate(args) -> int:
    topology = generate_topology(args.nodes, args.regions, args.density, args.seed)
    save_topology(topology, args.out)
    print(f"topology {topology.fingerprint()} written to {args.out}")
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "grade": cmd_grade,
    "route": cmd_route,
    "oracle": cmd_oracle,
    "generate": cmd_generate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (TopologyError, ValueError, KeyError, OSError, knowledge_base.KnowledgeBaseError) as exc:
        print(f"gradenet {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NoPathError, RegionStarvationError) as exc:
        print(f"gradenet {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAILURES


if __name__ == "__main__":
    sys.exit(main())
