"""Command line entry point: ``mbsmp <subcommand> ...``.

Exit codes: 0 success, 1 other errors, 2 parse or usage error, 3 time limit
reached with a nonzero gap.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys

from .bench import BenchPlan, run_bench
from .graph import Instance, InstanceError, LabeledDigraph
from .generate import (GenConfig, add_parallel_arcs, assign_labels_negbin, generate_instance,
                       sample_scenarios, select_seeds_imm)
from .io import (REPORT_COLUMNS, ParseError, append_report_rows, format_instance,
                 load_instance, read_edge_list, simple_edges)
from .master import REL_GAP_TOL, SETTINGS, SolverSettings, branch_and_benders_cut, brute_force_oracle
from .separation import format_cut

EXIT_OK, EXIT_ERROR, EXIT_PARSE, EXIT_TIMELIMIT = 0, 1, 2, 3


def _write(text: str, path: str | None):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _add_sampling_flags(p, with_graph=True):
    if with_graph:
        p.add_argument("--labels", type=int, default=20, help="number of blockable labels n_L")
        p.add_argument("--class", dest="label_class", type=int, choices=(1, 2), default=1)
        p.add_argument("--label-mean", type=float, default=None,
                       help="override the label distribution mean")
        p.add_argument("--parallel", action="store_true", help="add parallel arcs")
    p.add_argument("--plive", type=float, default=0.1, help="arc live probability")
    p.add_argument("--scenarios", type=int, default=50)
    p.add_argument("--rng", type=int, default=0, help="random seed (u64)")
    p.add_argument("-o", "--out", default=None, help="output instance file (default stdout)")


def cmd_generate(args) -> int:
    config = GenConfig(model=args.model, n=args.nodes, m=args.edges, n_labels=args.labels,
                       label_class=args.label_class, p_live=args.plive,
                       scenario_count=args.scenarios, seed_count=args.seeds,
                       rr_samples=args.rr, rng_seed=args.rng, label_mean=args.label_mean,
                       parallel_arcs=args.parallel)
    config.mean  # fail early on an unknown label mean
    instance = generate_instance(config, args.budget)
    _write(format_instance(instance), args.out)
    return EXIT_OK


def cmd_ingest_snap(args) -> int:
    with open(args.edges, encoding="utf-8") as fh:
        n, edges, _ = read_edge_list(fh)
    edges = simple_edges(edges, args.undirected)
    mean = GenConfig(n_labels=args.labels, label_class=args.label_class,
                     label_mean=args.label_mean).mean
    labeled = assign_labels_negbin(edges, args.labels, args.label_class, args.rng, mean)
    if args.undirected:
        graph = LabeledDigraph.from_undirected(n, labeled, args.labels + 1)
    else:
        graph = LabeledDigraph.from_arcs(n, labeled, args.labels + 1)
    if args.parallel:
        graph = add_parallel_arcs(graph, args.rng)
    scenarios = sample_scenarios(graph, args.plive, args.scenarios, args.rng)
    seeds = select_seeds_imm(graph, args.plive, min(args.seeds, n), args.rr, args.rng)
    costs = (math.inf,) + (1.0,) * args.labels
    instance = Instance(graph, costs, args.budget, tuple(seeds), scenarios)
    _write(format_instance(instance), args.out)
    return EXIT_OK


def cmd_sample(args) -> int:
    instance = load_instance(args.instance)
    scenarios = sample_scenarios(instance.graph, args.plive, args.scenarios, args.rng)
    _write(format_instance(instance.with_scenarios(scenarios)), args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    instance = load_instance(args.instance)
    if args.budget is not None:
        instance = instance.with_budget(args.budget)
    settings = SolverSettings.from_name(args.setting, args.tau, args.timelimit)
    trace = [] if args.trace else None
    report = branch_and_benders_cut(instance, settings, trace)
    row = report.row()
    if args.report:
        append_report_rows(args.report, [row])
    if trace is not None:
        with open(args.trace, "w", encoding="utf-8", newline="\n") as fh:
            for cut, violated in trace:
                fh.write(format_cut(cut, violated) + "\n")
    print(",".join(REPORT_COLUMNS))
    print(",".join(row[c] for c in REPORT_COLUMNS))
    print("blocking:", " ".join(map(str, report.blocking)) or "-")
    gap = math.inf if report.gap is None else report.gap
    if report.setting != "g" and not report.optimal and gap > 100 * REL_GAP_TOL:
        return EXIT_TIMELIMIT
    return EXIT_OK


def cmd_oracle(args) -> int:
    instance = load_instance(args.instance)
    if args.budget is not None:
        instance = instance.with_budget(args.budget)
    blocking, value = brute_force_oracle(instance, args.cap)
    row = dict.fromkeys(REPORT_COLUMNS, "")
    row.update(instance=instance.name, setting="oracle", UB=f"{float(value):.6f}",
               LB=f"{float(value):.6f}", gap="0.0000", opt="1")
    if args.report:
        append_report_rows(args.report, [row])
    print("blocking:", " ".join(map(str, blocking)) or "-")
    print(f"objective: {value} ({float(value):.6f})")
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.plan:
        plan = BenchPlan.from_json(args.plan)
        if args.out:
            plan.output = args.out
    else:
        if not args.instances:
            raise ParseError("give --plan or a list of instance files")
        plan = BenchPlan.grid(args.instances, args.settings.split(","), args.budget,
                              args.timelimit, args.tau, args.out)
    plan.validate()
    rows = run_bench(plan, args.jobs, log=lambda r: print(
        f"{r['instance']} {r['setting']} t={r['t_s']} UB={r['UB']} gap={r['gap']}",
        file=sys.stderr))
    if not plan.output:
        print(",".join(REPORT_COLUMNS))
        for r in rows:
            print(",".join(r[c] for c in REPORT_COLUMNS))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mbsmp", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="synthetic BA or ER instance")
    p.add_argument("--model", choices=("ba", "er"), default="ba")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--edges", type=int, required=True)
    p.add_argument("--seeds", type=int, default=50)
    p.add_argument("--rr", "--rr-samples", dest="rr", type=int, default=1000)
    p.add_argument("--budget", type=float, default=4)
    _add_sampling_flags(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("ingest-snap", help="instance from a SNAP edge list")
    p.add_argument("edges", help="whitespace separated edge list")
    p.add_argument("--undirected", action="store_true", help="use each edge in both directions")
    p.add_argument("--seeds", type=int, default=50)
    p.add_argument("--rr", "--rr-samples", dest="rr", type=int, default=1000)
    p.add_argument("--budget", type=float, default=4)
    _add_sampling_flags(p)
    p.set_defaults(func=cmd_ingest_snap)

    p = sub.add_parser("sample", help="replace the scenarios of an instance")
    p.add_argument("instance")
    _add_sampling_flags(p, with_graph=False)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("solve", help="branch-and-Benders-cut under one setting")
    p.add_argument("instance")
    p.add_argument("--setting", choices=SETTINGS, default="i+sfp")
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--timelimit", type=float, default=3600.0)
    p.add_argument("--budget", type=float, default=None)
    p.add_argument("--report", default=None, help="CSV file to append the result row to")
    p.add_argument("--trace", default=None, help="write every separated cut here")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="brute-force enumeration of blockings")
    p.add_argument("instance")
    p.add_argument("--budget", type=float, default=None)
    p.add_argument("--cap", type=int, default=10**6)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bench", help="run a benchmark plan")
    p.add_argument("instances", nargs="*")
    p.add_argument("--plan", default=None, help="JSON plan file")
    p.add_argument("--settings", default="i,i+s,i+sfp")
    p.add_argument("--budget", type=float, default=None)
    p.add_argument("--timelimit", type=float, default=3600.0)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--jobs", type=int, default=1, help="parallel runs (timings then interfere)")
    p.add_argument("-o", "--out", default=None, help="CSV output (default stdout)")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (InstanceError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
