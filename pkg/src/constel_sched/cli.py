"""Command-line entry point: ``constel-sched {run,bench,graph,solve-graph}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .baselines import export_ilp, write_schedule_json
from .experiment import StageError, format_text_table, results_table, run_benchmark_suite, run_scenario, prepare
from .graph import GraphFormatError, read_dimacs, write_dimacs
from .mis import SolverConfig, exact_bnb, greedy_seed, redumis_solve, two_improvement, write_certificate
from .scenario import SolverSpec, load_scenario, load_suite
from .tasking import InvalidInputError

EXIT_OK, EXIT_INVALID, EXIT_INPUT = 0, 1, 2

log = logging.getLogger("constel_sched")


def _cmd_run(args) -> int:
    sc = load_scenario(args.scenario).with_overrides(args.solver, args.seed, args.workers)
    keep: dict = {}
    res = run_scenario(sc, keep)
    header, rows = results_table([res])
    print(format_text_table(header, rows), end="")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "result.json").write_text(json.dumps(res.to_dict(), indent=2) + "\n")
        data = keep["data"]
        for label, sched in data.schedules.items():
            if res.row(label).valid:
                write_schedule_json(sched, data.collects, out / f"schedule_{label.replace(':', '_')}.json")
    return EXIT_OK if res.valid else EXIT_INVALID


def _cmd_bench(args) -> int:
    results = run_benchmark_suite(load_suite(args.suite), args.out)
    print((Path(args.out) / "results.txt").read_text(), end="")
    return EXIT_OK if all(r.valid for r in results) else EXIT_INVALID


def _cmd_graph(args) -> int:
    sc = load_scenario(args.scenario).with_overrides(seed=args.seed, workers=args.workers)
    data = prepare(sc)
    g = data.gf if args.kind == "feasibility" else data.gi
    write_dimacs(g, args.export)
    if args.lp:
        export_ilp(data.gi, args.lp)
    print(f"{g.kind} graph: {g.n} vertices, {g.num_edges} edges -> {args.export}")
    return EXIT_OK


def _cmd_solve_graph(args) -> int:
    g = read_dimacs(args.graph)
    spec = SolverSpec.parse(args.solver)
    if spec.kind == "traversal":
        raise InvalidInputError("traversal needs collects; use 'run' instead")
    if spec.kind == "mis":
        cfg = SolverConfig(time_limit=spec.time_limit, seed=args.seed, upper_bound=args.bound)
        sol = redumis_solve(g, cfg)
    elif spec.kind == "greedy":
        sol = two_improvement(g, greedy_seed(g))
    else:
        sol = exact_bnb(g, spec.time_limit)
    out = Path(args.out) if args.out else Path(args.graph).with_suffix(".sol")
    write_certificate(sol.vertices, out)
    print(f"{spec.label}: |I| = {sol.objective}  t = {sol.wall_time:.3f} s  ({sol.termination}) -> {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="constel-sched", description="Constellation task scheduling via independent sets.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario end to end")
    run.add_argument("--scenario", required=True)
    run.add_argument("--solver", action="append", help="mis, mis:<seconds>, greedy, traversal, exact[:<seconds>]; repeatable")
    run.add_argument("--seed", type=int)
    run.add_argument("--workers", type=int)
    run.add_argument("--out")
    run.set_defaults(func=_cmd_run)

    bench = sub.add_parser("bench", help="run a suite of scenarios and write tables")
    bench.add_argument("--suite", required=True)
    bench.add_argument("--out", required=True)
    bench.set_defaults(func=_cmd_bench)

    graph = sub.add_parser("graph", help="export a scenario's graph in DIMACS format")
    graph.add_argument("--scenario", required=True)
    graph.add_argument("--export", required=True)
    graph.add_argument("--kind", choices=["infeasibility", "feasibility"], default="infeasibility")
    graph.add_argument("--lp", help="also write the ILP model in LP format")
    graph.add_argument("--seed", type=int)
    graph.add_argument("--workers", type=int)
    graph.set_defaults(func=_cmd_graph)

    solve = sub.add_parser("solve-graph", help="solve a DIMACS graph and write a certificate")
    solve.add_argument("graph")
    solve.add_argument("--solver", default="mis:10")
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--bound", type=int, help="stop early once a set this large is found")
    solve.add_argument("--out")
    solve.set_defaults(func=_cmd_solve_graph)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InvalidInputError, GraphFormatError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except StageError as err:
        print(f"error: {err}", file=sys.stderr)
        if err.stage == "requests" and isinstance(err.cause, (InvalidInputError, OSError)):
            return EXIT_INPUT
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
