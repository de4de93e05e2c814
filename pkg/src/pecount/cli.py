"""Command-line entry point.

Subcommands: build, query, shadowed, loops, verify, selftest, bench.
Exit codes: 0 success (or expected outcome), 1 input/parse error,
2 internal invariant violation or selftest failure, 3 violations found
(inverted by --expect-violations).  Set PEC_LOG=debug|info|warning for
log verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import analysis, ingest, oracle, query as query_mod, selftest
from .elements import ElementError, SchemaError
from .lattice import Lattice, LatticeError

log = logging.getLogger("pecount")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INTERNAL = 2
EXIT_VIOLATIONS = 3


def _configure_logging() -> None:
    level_name = os.environ.get("PEC_LOG", "warning").upper()
    level = getattr(logging, level_name, logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _emit(args, payload: dict, human_lines) -> None:
    if getattr(args, "json", False):
        print(json.dumps(payload, indent=2))
    else:
        for line in human_lines:
            print(line)


def _load_schema(args, inputs, query_texts=()) -> object:
    schema = ingest.load_schema_doc(args.schema)
    for path in inputs:
        ingest.collect_input_values(schema, path)
    for text in query_texts:
        ingest.collect_query_values(schema, text)
    return schema.freeze()


def _build_lattice(schema, dataset, amortized: bool) -> Lattice:
    lattice = Lattice(schema, eager=not amortized)
    for elem in dataset.elements:
        lattice.insert(elem)
    if amortized:
        lattice.settle()
    return lattice


def _topology_lattice(args):
    schema = _load_schema(args, [args.topology],
                          [args.query] if getattr(args, "query", None) else ())
    topology = ingest.parse_topology(args.topology, schema)
    lattice = Lattice(schema, eager=not getattr(args, "amortized", False))
    analysis.prepare_topology(lattice, topology)
    lattice.settle()
    return schema, topology, lattice


def _violations_exit(args, found: bool) -> int:
    if getattr(args, "expect_violations", False):
        return EXIT_OK if found else EXIT_VIOLATIONS
    return EXIT_VIOLATIONS if found else EXIT_OK


def cmd_build(args) -> int:
    schema = _load_schema(args, [args.rules])
    dataset = ingest.load_dataset(args.rules, schema)
    lattice = _build_lattice(schema, dataset, args.amortized)
    report = lattice.report(dump_nodes=args.dump_nodes)
    if dataset.duplicates:
        log.info("dropped %d duplicate match conditions", dataset.duplicates)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(report.to_json(indent=2))
            fh.write("\n")
    payload = report.to_dict()
    payload["duplicates_dropped"] = dataset.duplicates
    _emit(args, payload, [report.summary()])
    return EXIT_OK


def cmd_query(args) -> int:
    schema = _load_schema(args, [args.rules], [args.query])
    dataset = ingest.load_dataset(args.rules, schema)
    lattice = _build_lattice(schema, dataset, args.amortized)
    parsed = query_mod.parse_query(args.query, schema)
    query_mod.prepare(lattice, parsed)
    lattice.settle()
    pecs = sorted(query_mod.convert_to_pecs(lattice, parsed), key=lambda n: n.id)
    live = query_mod.nonempty(lattice, pecs)
    payload = {
        "query": args.query,
        "pecs": [
            {
                "id": n.id,
                "element": str(n.elem),
                "cardinality": lattice.pec_cardinality(n),
                "empty": lattice.is_empty_pec(n),
            }
            for n in pecs
        ],
        "nonempty": sorted(n.id for n in live),
    }
    lines = [f"query: {args.query}", f"pecs: {len(pecs)} nonempty: {len(live)}"]
    for entry in payload["pecs"]:
        tag = "empty" if entry["empty"] else f"cardinality {entry['cardinality']}"
        lines.append(f"  pec {entry['id']}: {entry['element']} ({tag})")
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_shadowed(args) -> int:
    _, topology, lattice = _topology_lattice(args)
    findings = []
    for device in sorted(topology.tables):
        for rule in analysis.shadowed_rules(lattice, topology.tables[device]):
            findings.append({"device": device, "priority": rule.priority,
                             "match": str(rule.match)})
    payload = {"shadowed": findings}
    lines = [f"shadowed rules: {len(findings)}"]
    lines += [f"  {f['device']} priority {f['priority']}: {f['match']}"
              for f in findings]
    _emit(args, payload, lines)
    return _violations_exit(args, bool(findings))


def cmd_loops(args) -> int:
    _, topology, lattice = _topology_lattice(args)
    graph = analysis.ForwardingGraph(lattice, topology)
    findings = analysis.detect_loops(graph)
    payload = {"loops": [f.to_dict() for f in findings]}
    lines = [f"loops: {len(findings)}"]
    lines += [f"  pec {f.pec.id} ({f.pec.elem}): {' -> '.join(f.cycle)}"
              for f in findings]
    _emit(args, payload, lines)
    return _violations_exit(args, bool(findings))


def cmd_verify(args) -> int:
    schema, topology, lattice = _topology_lattice(args)
    parsed = query_mod.parse_query(args.query, schema)
    query_mod.prepare(lattice, parsed)
    lattice.settle()
    graph = analysis.ForwardingGraph(lattice, topology)
    verdict = analysis.verify(graph, parsed, args.expect, start=args.start,
                              filter_empty=not args.no_empty_filter,
                              sample_cap=args.enum_cap)
    payload = verdict.to_dict()
    lines = [f"verify: {'PASS' if verdict.passed else 'FAIL'}"]
    for witness in verdict.witnesses:
        sample = "" if witness.sample is None else f" sample={witness.sample}"
        lines.append(f"  pec {witness.pec.id} ({witness.pec.elem}) "
                     f"reached {witness.reached}{sample}")
    _emit(args, payload, lines)
    return _violations_exit(args, not verdict.passed)


def cmd_selftest(args) -> int:
    result = selftest.run_selftest(
        seed=args.seed, width=args.width, count=args.count,
        iterations=args.iterations, enum_cap=args.enum_cap,
        log=log.info)
    payload = {
        "seed": result.seed,
        "iterations": result.iterations,
        "checks_run": result.checks_run,
        "failures": result.failures,
        "rng": selftest.PORTABLE_RNG,
    }
    lines = [f"selftest: {'PASS' if result.passed else 'FAIL'} "
             f"({result.checks_run} checks, seed {result.seed})"]
    lines += [f"  {failure}" for failure in result.failures]
    _emit(args, payload, lines)
    return EXIT_OK if result.passed else EXIT_INTERNAL


def cmd_bench(args) -> int:
    result = selftest.run_bench(count=args.count, width=args.width,
                                seed=args.seed, runs=args.runs, log=log.info)
    payload = {
        "count": result.count,
        "width": result.width,
        "seed": result.seed,
        "build_seconds": result.build_seconds,
        "emptiness_seconds": result.emptiness_seconds,
        "nodes": result.nodes,
        "empty_pecs": result.empty_pecs,
        "deterministic": result.deterministic,
        "note": "wall-clock on synthetic input; not comparable to published results",
    }
    _emit(args, payload, [result.summary(),
                          "(synthetic input; timings are machine-local)"])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pecount",
        description="Partition packet-header space into exact equivalence "
                    "classes and answer data-plane verification queries.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, topology=False, rules=False, needs_query=False):
        p.add_argument("--schema", required=True, help="schema JSON file")
        if rules:
            p.add_argument("--rules", required=True,
                           help="rule table JSON, or one prefix/tbv per line")
        if topology:
            p.add_argument("--topology", required=True, help="topology JSON file")
        if needs_query:
            p.add_argument("--query", required=True, help="query text")
        p.add_argument("--json", action="store_true", help="JSON output")
        p.add_argument("--amortized", action="store_true",
                       help="defer cardinality recomputation to one settle")

    p = sub.add_parser("build", help="build the lattice and report class counts")
    add_common(p, rules=True)
    p.add_argument("--out", help="write the JSON report to a file")
    p.add_argument("--dump-nodes", action="store_true",
                   help="include a per-node dump in the report")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("query", help="convert a query to its class set")
    add_common(p, rules=True, needs_query=True)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("shadowed", help="report rules with no effective classes")
    add_common(p, topology=True)
    p.add_argument("--expect-violations", action="store_true",
                   help="exit 0 when findings exist, 3 otherwise")
    p.set_defaults(func=cmd_shadowed)

    p = sub.add_parser("loops", help="detect forwarding loops per class")
    add_common(p, topology=True)
    p.add_argument("--expect-violations", action="store_true")
    p.set_defaults(func=cmd_loops)

    p = sub.add_parser("verify", help="check where the query's classes end up")
    add_common(p, topology=True, needs_query=True)
    p.add_argument("--expect", required=True,
                   help="expected terminal: drop | controller | <port or peer>")
    p.add_argument("--start", help="entry device (default: every device)")
    p.add_argument("--no-empty-filter", action="store_true",
                   help="keep empty classes in play (regression mode)")
    p.add_argument("--enum-cap", type=int, default=1 << 16,
                   help="universe cap for witness header sampling")
    p.add_argument("--expect-violations", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("selftest", help="randomized property suites vs oracles")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--width", type=int, default=8, help="header bits (<= 16)")
    p.add_argument("--count", type=int, default=20, help="max elements per instance")
    p.add_argument("--iterations", type=int, default=25)
    p.add_argument("--enum-cap", type=int, default=oracle.DEFAULT_ENUM_CAP)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_selftest)

    p = sub.add_parser("bench", help="timed synthetic build (not comparable)")
    p.add_argument("--count", type=int, default=3000)
    p.add_argument("--width", type=int, default=128)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--runs", type=int, default=2)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ingest.ParseError, ElementError, SchemaError, query_mod.QueryError,
            analysis.TopologyError, oracle.UniverseTooLarge, OSError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except LatticeError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
