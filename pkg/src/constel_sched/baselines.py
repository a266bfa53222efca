"""Comparison schedulers, ILP export and the independent schedule validator."""

from __future__ import annotations

import json
import time
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .astro import attitude_angle
from .graph import FEASIBILITY, ScheduleGraph
from .mis.solution import IndependentSetSolution
from .schedcore import AgilityModel
from .tasking import Collect, InvalidInputError


def _time_key(x: Collect):
    return (x.t_start, x.t_end, x.id)


@dataclass
class Schedule:
    """Selected collects, grouped per satellite in time order."""

    collect_ids: tuple[int, ...]
    sequences: dict[int, list[int]]
    objective: float
    solver: str = ""
    wall_time: float = 0.0
    config: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.collect_ids)


def _by_id(collects: Sequence[Collect]) -> dict[int, Collect]:
    return {x.id: x for x in collects}


def make_schedule(ids: Iterable[int], collects: Sequence[Collect], solver: str = "", wall_time: float = 0.0, config=None) -> Schedule:
    table = _by_id(collects)
    ids = sorted(set(int(i) for i in ids))
    missing = [i for i in ids if i not in table]
    if missing:
        raise InvalidInputError(f"unknown collect ids: {missing[:10]}")
    seqs: dict[int, list[int]] = defaultdict(list)
    for x in sorted((table[i] for i in ids), key=_time_key):
        seqs[x.sat].append(x.id)
    return Schedule(tuple(ids), dict(sorted(seqs.items())), float(len(ids)), solver, wall_time, dict(config or {}))


def solution_to_schedule(sol: IndependentSetSolution, collects: Sequence[Collect]) -> Schedule:
    """Unit-weight objective: the number of scheduled collects."""
    return make_schedule(sol.vertices, collects, sol.solver, sol.wall_time, {"termination": sol.termination})


# ---------------------------------------------------------------------------
# Greedy graph traversal baseline


def _longest_chain(verts: list[int], preds: list[list[int]], ts: np.ndarray, te: np.ndarray) -> list[int]:
    """Longest path (vertex count) through the DAG restricted to ``verts``."""
    order = sorted(verts, key=lambda v: (ts[v], te[v], v))
    allowed = set(verts)
    score: dict[int, int] = {}
    back: dict[int, int | None] = {}
    for v in order:
        best, arg = 0, None
        for u in preds[v]:
            if u in allowed:
                s = score[u]
                # ties go to the earlier-starting predecessor
                if s > best or (s == best and arg is not None and (ts[u], u) < (ts[arg], arg)):
                    best, arg = s, u
        score[v] = best + 1
        back[v] = arg
    if not order:
        return []
    end = max(order, key=lambda v: (score[v], -ts[v], -v))
    path = []
    v: int | None = end
    while v is not None:
        path.append(v)
        v = back[v]
    return path[::-1]


def graph_traversal_schedule(
    gf: ScheduleGraph, collects: Sequence[Collect], order: Sequence[int] | None = None
) -> Schedule:
    """Serial per-satellite longest paths through the feasibility DAG.

    Each satellite in ``order`` takes the longest chain over collects whose
    tiles earlier satellites have not claimed. A chain may revisit a tile
    through non-consecutive collects; such repeats, and any collect no longer
    joined to its kept predecessor by an edge, are dropped greedily.
    """
    if gf.kind != FEASIBILITY:
        raise InvalidInputError(f"expected a feasibility graph, got {gf.kind}")
    if gf.n != len(collects):
        raise InvalidInputError(f"graph has {gf.n} vertices but there are {len(collects)} collects")
    t0 = time.monotonic()
    table = _by_id(collects)
    if sorted(table) != list(range(gf.n)):
        raise InvalidInputError("collect ids must be dense 0..n-1")
    sat = np.array([table[i].sat for i in range(gf.n)], dtype=np.int64)
    tile = np.array([table[i].tile for i in range(gf.n)], dtype=np.int64)
    ts = np.array([table[i].t_start for i in range(gf.n)])
    te = np.array([table[i].t_end for i in range(gf.n)])

    preds: list[list[int]] = [[] for _ in range(gf.n)]
    for a, b in gf.edges.tolist():
        preds[b].append(a)
    sats = sorted(set(sat.tolist())) if order is None else list(order)

    claimed: set[int] = set()
    chosen: list[int] = []
    for s in sats:
        verts = [v for v in np.flatnonzero(sat == s).tolist() if tile[v] not in claimed]
        path = _longest_chain(verts, preds, ts, te)
        last = None
        for v in path:
            if tile[v] in claimed:
                continue
            if last is not None and not gf.has_edge(last, v):
                continue
            chosen.append(v)
            claimed.add(int(tile[v]))
            last = v
    return make_schedule(chosen, collects, "graph_traversal", time.monotonic() - t0, {"order": sats})


# ---------------------------------------------------------------------------
# LP export


def export_ilp(gi: ScheduleGraph, path) -> None:
    """Write the independent-set integer program in CPLEX LP format."""
    if gi.directed:
        raise InvalidInputError("ILP export needs the undirected infeasibility graph")
    names = [f"x{v}" for v in range(gi.n)]
    out = ["\\ maximum independent set", "Maximize"]
    if names:
        chunks = [" + ".join(names[i : i + 10]) for i in range(0, len(names), 10)]
        out.append(" obj: " + chunks[0])
        out.extend(" + " + c for c in chunks[1:])
    else:
        out.append(" obj: 0 x0")
    out.append("Subject To")
    e = np.sort(gi.edges, axis=1) if len(gi.edges) else gi.edges
    for k, (u, v) in enumerate(e.tolist()):
        out.append(f" c{k}: x{u} + x{v} <= 1")
    out.append("Binary")
    for i in range(0, len(names), 10):
        out.append(" " + " ".join(names[i : i + 10]))
    out.append("End")
    Path(path).write_text("\n".join(out) + "\n")


# ---------------------------------------------------------------------------
# Validation


AGILITY = "agility"
REPETITION = "repetition"
HORIZON = "horizon"
UNKNOWN = "unknown_collect"


@dataclass(frozen=True)
class Violation:
    kind: str
    ids: tuple[int, ...]
    detail: str = ""


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def of_kind(self, kind: str) -> list[Violation]:
        return [v for v in self.violations if v.kind == kind]


def validate_schedule(
    sched: Schedule | Iterable[int],
    collects: Sequence[Collect],
    m: AgilityModel = AgilityModel(),
    horizon: float | None = None,
) -> ValidationReport:
    """Re-check a schedule from the raw collects, independent of any graph.

    Consecutive same-satellite collects must leave room for the slew, no
    tile may be imaged twice, and every window must sit inside the horizon.
    """
    ids = sched.collect_ids if isinstance(sched, Schedule) else tuple(sched)
    table = _by_id(collects)
    report = ValidationReport()
    picked = []
    for i in ids:
        if i in table:
            picked.append(table[i])
        else:
            report.violations.append(Violation(UNKNOWN, (i,), "no such collect"))

    per_sat: dict[int, list[Collect]] = defaultdict(list)
    for x in picked:
        per_sat[x.sat].append(x)
    for s, xs in sorted(per_sat.items()):
        xs.sort(key=_time_key)
        for a, b in zip(xs, xs[1:]):
            gap = b.t_start - a.t_end
            need = attitude_angle(a.q_end, b.q_start) / m.slew_rate + m.settle_time
            if gap < 0 or need > gap:
                report.violations.append(
                    Violation(AGILITY, (a.id, b.id), f"sat {s}: gap {gap:.3f} s, slew needs {need:.3f} s")
                )

    by_tile: dict[int, list[int]] = defaultdict(list)
    for x in picked:
        by_tile[x.tile].append(x.id)
    for t, members in sorted(by_tile.items()):
        if len(members) > 1:
            report.violations.append(Violation(REPETITION, tuple(sorted(members)), f"tile {t} imaged {len(members)} times"))

    for x in picked:
        if not x.t_start < x.t_end or x.t_start < 0 or (horizon is not None and x.t_end > horizon):
            report.violations.append(Violation(HORIZON, (x.id,), f"window [{x.t_start}, {x.t_end}]"))
    return report


def schedule_to_json(sched: Schedule, collects: Sequence[Collect]) -> dict:
    table = _by_id(collects)
    rows = []
    for i in sched.collect_ids:
        x = table[i]
        rows.append(
            {"id": x.id, "sat": x.sat, "tile": x.tile, "request": x.request, "t_s": round(x.t_start, 3), "t_e": round(x.t_end, 3)}
        )
    return {"solver": sched.solver, "objective": sched.objective, "wall_time_s": sched.wall_time, "collects": rows}


def write_schedule_json(sched: Schedule, collects: Sequence[Collect], path) -> None:
    Path(path).write_text(json.dumps(schedule_to_json(sched, collects), indent=2) + "\n")
