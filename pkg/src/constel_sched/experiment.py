"""End-to-end scenario runs and benchmark tables."""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

from .access import collect_search_all
from .astro import GeodeticPoint, Horizon
from .baselines import (
    Schedule,
    graph_traversal_schedule,
    solution_to_schedule,
    validate_schedule,
    write_schedule_json,
)
from .cities import cities_to_requests, load_cities, synthetic_cities, top_cities
from .graph import ScheduleGraph
from .mis import SolverConfig, exact_bnb, greedy_seed, redumis_solve, two_improvement
from .scenario import Scenario, SolverSpec
from .schedcore import build_feasibility_graph, build_infeasibility_graph
from .tasking import Collect, Request, filter_requests, tessellate_all, validate_requests

log = logging.getLogger(__name__)


class StageError(RuntimeError):
    def __init__(self, stage: str, err: Exception):
        super().__init__(f"[{stage}] {err}")
        self.stage = stage
        self.cause = err


@dataclass
class SolverRow:
    solver: str
    objective: int
    t_solve: float
    termination: str
    valid: bool
    violations: int = 0


@dataclass
class ExperimentResult:
    name: str
    n_sats: int
    n_requests: int
    n_collects: int
    rows: list[SolverRow] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    error: str | None = None

    @property
    def valid(self) -> bool:
        return self.error is None and all(r.valid for r in self.rows)

    def row(self, solver: str) -> SolverRow:
        for r in self.rows:
            if r.solver == solver:
                return r
        raise KeyError(solver)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["valid"] = self.valid
        return d


@dataclass
class ScenarioData:
    """Intermediate products of a run, kept for graph export and tests."""

    requests: list[Request]
    collects: list[Collect]
    gi: ScheduleGraph
    gf: ScheduleGraph
    schedules: dict[str, Schedule] = field(default_factory=dict)


def _stage(name):
    def wrap(fn):
        def inner(*a, **k):
            try:
                return fn(*a, **k)
            except StageError:
                raise
            except Exception as err:
                raise StageError(name, err) from err

        return inner

    return wrap


@_stage("requests")
def build_requests(sc: Scenario) -> list[Request]:
    cons = sc.constraints()
    if sc.inline_requests:
        reqs = [
            Request(i, GeodeticPoint(float(r["lat"]), float(r["lon"])), constraints=cons, name=str(r.get("name", "")))
            for i, r in enumerate(sc.inline_requests)
        ]
    elif sc.cities_path is not None:
        reqs = load_cities(sc.cities_path, sc.request_count, cons)
    else:
        pool = synthetic_cities(sc.request_count, seed=sc.seed)
        reqs = cities_to_requests(top_cities(pool, sc.request_count), cons)
    horizon = Horizon(sc.horizon_s, sc.anchor)
    accepted, rejected = validate_requests(reqs, horizon)
    for err in rejected:
        log.info("request rejected: %s", err)
    return filter_requests(accepted, sc.orbits())


@_stage("access")
def build_collects(sc: Scenario, requests: Sequence[Request]) -> list[Collect]:
    tiles = tessellate_all(requests)
    return collect_search_all(sc.orbits(), tiles, requests, Horizon(sc.horizon_s, sc.anchor), sc.search, sc.workers)


@_stage("graphs")
def build_graphs(sc: Scenario, collects: Sequence[Collect]) -> tuple[ScheduleGraph, ScheduleGraph]:
    return build_infeasibility_graph(collects, sc.agility), build_feasibility_graph(collects, sc.agility)


def prepare(sc: Scenario) -> ScenarioData:
    requests = build_requests(sc)
    collects = build_collects(sc, requests)
    gi, gf = build_graphs(sc, collects)
    return ScenarioData(requests, collects, gi, gf)


def solver_config(sc: Scenario, spec: SolverSpec, bound: int | None) -> SolverConfig:
    return SolverConfig(
        time_limit=spec.time_limit,
        seed=sc.seed,
        population_size=sc.population_size,
        max_unsuccessful=sc.max_unsuccessful,
        upper_bound=bound,
    )


def run_solver(sc: Scenario, spec: SolverSpec, data: ScenarioData, bound: int | None) -> Schedule:
    """Run one solver; the clock covers the solver call only."""
    t0 = time.monotonic()
    if spec.kind == "traversal":
        sched = graph_traversal_schedule(data.gf, data.collects)
        sched.wall_time = time.monotonic() - t0
        sched.config["termination"] = "converged"
    else:
        if spec.kind == "mis":
            sol = redumis_solve(data.gi, solver_config(sc, spec, bound))
        elif spec.kind == "greedy":
            sol = two_improvement(data.gi, greedy_seed(data.gi))
            sol.termination = "converged"
        else:
            sol = exact_bnb(data.gi, spec.time_limit)
        wall = time.monotonic() - t0
        sched = solution_to_schedule(sol, data.collects)
        sched.wall_time = wall
    sched.solver = spec.label
    return sched


def run_scenario(sc: Scenario, keep: dict | None = None) -> ExperimentResult:
    """Full pipeline; pass a dict as ``keep`` to receive the intermediate :class:`ScenarioData`."""
    data = prepare(sc)
    if keep is not None:
        keep["data"] = data
    n_req = len(data.requests)
    tiles_seen = len({x.tile for x in data.collects})
    # no schedule can image more distinct tiles than have collects
    bound = min(n_req, tiles_seen)
    result = ExperimentResult(sc.name, len(sc.orbits()), n_req, len(data.collects), metadata=sc.metadata())
    for spec in sc.solvers:
        try:
            sched = run_solver(sc, spec, data, bound)
        except Exception as err:
            raise StageError(f"solve:{spec.label}", err) from err
        report = validate_schedule(sched, data.collects, sc.agility, sc.horizon_s)
        obj = len(sched)
        if obj > min(n_req, len(data.collects)):
            raise AssertionError(f"{spec.label}: objective {obj} exceeds min(|R|, |X|)")
        for v in report.violations:
            log.error("%s: %s %s %s", spec.label, v.kind, v.ids, v.detail)
        data.schedules[spec.label] = sched
        result.rows.append(
            SolverRow(spec.label, obj, sched.wall_time, sched.config.get("termination", ""), report.ok, len(report.violations))
        )
    return result


# ---------------------------------------------------------------------------
# Tables


def _best(result: ExperimentResult) -> list[str]:
    if not result.rows:
        return []
    top = max(r.objective for r in result.rows)
    return [r.solver for r in result.rows if r.objective == top]


def results_table(results: Sequence[ExperimentResult]) -> tuple[list[str], list[list]]:
    solvers: list[str] = []
    for res in results:
        for r in res.rows:
            if r.solver not in solvers:
                solvers.append(r.solver)
    header = ["scenario", "|S|", "|R|", "|X|"]
    for s in solvers:
        header += [f"{s} |X^S|", f"{s} t_solve"]
    header += ["best", "valid", "error"]
    rows = []
    for res in results:
        row: list = [res.name, res.n_sats, res.n_requests, res.n_collects]
        by = {r.solver: r for r in res.rows}
        for s in solvers:
            r = by.get(s)
            row += [r.objective, round(r.t_solve, 3)] if r else ["", ""]
        row += [" ".join(_best(res)), res.valid, res.error or ""]
        rows.append(row)
    return header, rows


def format_text_table(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    cells = [list(map(str, header))] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def run_benchmark_suite(scenarios: Sequence[Scenario], out_dir) -> list[ExperimentResult]:
    """Run every scenario, writing results.csv, results.txt and results.json to ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = []
    for sc in scenarios:
        keep: dict = {}
        try:
            res = run_scenario(sc, keep)
            data = keep["data"]
            sched_dir = out / "schedules" / sc.name
            sched_dir.mkdir(parents=True, exist_ok=True)
            for label, sched in data.schedules.items():
                if res.row(label).valid:
                    write_schedule_json(sched, data.collects, sched_dir / f"{label.replace(':', '_')}.json")
        except Exception as err:
            log.error("scenario %s failed: %s", sc.name, err)
            res = ExperimentResult(sc.name, len(sc.orbits()), 0, 0, metadata=sc.metadata(), error=str(err))
        results.append(res)

    header, rows = results_table(results)
    with open(out / "results.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    (out / "results.txt").write_text(format_text_table(header, rows))
    payload = [dict(r.to_dict(), best=_best(r)) for r in results]
    (out / "results.json").write_text(json.dumps(payload, indent=2) + "\n")
    return results
