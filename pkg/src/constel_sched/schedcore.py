"""Pairwise scheduling constraints and the feasibility / infeasibility graphs."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from functools import partial
from typing import Sequence

import numpy as np

from .astro import Attitude, attitude_angle, quaternion_angles
from .graph import FEASIBILITY, INFEASIBILITY, ScheduleGraph
from .tasking import Collect, InvalidInputError


@dataclass(frozen=True)
class AgilityModel:
    slew_rate: float = 1.0  # deg/s
    settle_time: float = 15.0  # s

    def __post_init__(self):
        if not (self.slew_rate > 0 and np.isfinite(self.slew_rate)):
            raise ValueError(f"slew rate must be finite and positive, got {self.slew_rate}")
        if not self.settle_time >= 0:
            raise ValueError(f"settle time must be >= 0, got {self.settle_time}")

    @property
    def max_slew_time(self) -> float:
        """Worst case: a 180 deg reorientation."""
        return 180.0 / self.slew_rate + self.settle_time


def slew_time(q1: Attitude, q2: Attitude, m: AgilityModel) -> float:
    return attitude_angle(q1, q2) / m.slew_rate + m.settle_time


def _time_key(x: Collect):
    return (x.t_start, x.t_end, x.id)


def k_agility(xi: Collect, xj: Collect, m: AgilityModel) -> bool:
    """True if one spacecraft can take both collects, in start-time order."""
    a, b = (xi, xj) if _time_key(xi) <= _time_key(xj) else (xj, xi)
    gap = b.t_start - a.t_end
    if gap < 0:
        return False
    return slew_time(a.q_end, b.q_start, m) <= gap


def k_repetition(xi: Collect, xj: Collect) -> bool:
    return xi.tile != xj.tile


def _compatible(xi: Collect, xj: Collect, m: AgilityModel) -> bool:
    return xi.sat != xj.sat or k_agility(xi, xj, m)


def scheduling_constraints(m: AgilityModel) -> list:
    """K_s as pair predicates valid for any two collects (cross-satellite agility is vacuous)."""
    return [partial(_compatible, m=m), k_repetition]


# ---------------------------------------------------------------------------
# Graph construction


class _Columns:
    def __init__(self, collects: Sequence[Collect]):
        ids = [x.id for x in collects]
        n = len(ids)
        if sorted(ids) != list(range(n)):
            dup = len(set(ids)) != n
            raise InvalidInputError("duplicate collect ids" if dup else "collect ids must be dense 0..n-1")
        order = np.argsort(ids)
        xs = [collects[i] for i in order]
        self.collects = xs
        self.n = n
        self.sat = np.array([x.sat for x in xs], dtype=np.int64)
        self.tile = np.array([x.tile for x in xs], dtype=np.int64)
        self.request = np.array([x.request for x in xs], dtype=np.int64)
        self.ts = np.array([x.t_start for x in xs], dtype=float)
        self.te = np.array([x.t_end for x in xs], dtype=float)
        self.weight = np.array([x.weight for x in xs], dtype=float)
        self.qs = np.array([x.q_start.q for x in xs], dtype=float).reshape(n, 4)
        self.qe = np.array([x.q_end.q for x in xs], dtype=float).reshape(n, 4)

    def payload(self) -> dict:
        return {
            "collect_id": np.arange(self.n),
            "sat": self.sat,
            "tile": self.tile,
            "request": self.request,
            "t_start": self.ts,
            "weight": self.weight,
        }

    def by_satellite(self):
        """Vertex ids of each satellite, in the same order k_agility uses."""
        for s in np.unique(self.sat):
            idx = np.flatnonzero(self.sat == s)
            order = np.lexsort((idx, self.te[idx], self.ts[idx]))
            yield int(s), idx[order]

    def agility_ok(self, a: np.ndarray, b: np.ndarray, m: AgilityModel) -> np.ndarray:
        """k_agility for pairs where ``a`` precedes ``b`` in time order."""
        gap = self.ts[b] - self.te[a]
        slew = quaternion_angles(self.qe[a], self.qs[b]) / m.slew_rate + m.settle_time
        return (gap >= 0) & (slew <= gap)


def _empty_edges():
    return np.zeros((0, 2), dtype=np.int64)


def _repetition_pairs(cols: _Columns) -> np.ndarray:
    return _repetition_pairs_from(cols.tile)


def build_infeasibility_graph(collects: Sequence[Collect], m: AgilityModel = AgilityModel()) -> ScheduleGraph:
    """Undirected edges between mutually exclusive collects.

    Same-satellite pairs are checked only while their gap is below the
    worst-case slew time; beyond it agility always holds. Repetition edges
    come from grouping by tile.
    """
    cols = _Columns(collects)
    chunks = [_repetition_pairs(cols)]
    horizon = m.max_slew_time
    for _, idx in cols.by_satellite():
        ts = cols.ts[idx]
        te = cols.te[idx]
        # positions b > a with ts[b] < te[a] + horizon need an explicit check
        cutoff = np.searchsorted(ts, te + horizon, side="left")
        # ts is sorted, but te + horizon is not; every b in (a, cutoff) qualifies
        counts = np.maximum(cutoff - np.arange(len(idx)) - 1, 0)
        if counts.sum() == 0:
            continue
        a_pos = np.repeat(np.arange(len(idx)), counts)
        offsets = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
        b_pos = a_pos + 1 + offsets
        a, b = idx[a_pos], idx[b_pos]
        bad = ~cols.agility_ok(a, b, m)
        chunks.append(np.stack([a[bad], b[bad]], axis=1))
    edges = np.concatenate(chunks) if chunks else _empty_edges()
    return ScheduleGraph.from_edges(cols.n, edges, INFEASIBILITY, cols.payload())


def build_feasibility_graph(collects: Sequence[Collect], m: AgilityModel = AgilityModel()) -> ScheduleGraph:
    """Directed edges earlier -> later between compatible same-satellite collects."""
    cols = _Columns(collects)
    chunks = []
    for _, idx in cols.by_satellite():
        for pos in range(len(idx) - 1):
            a = idx[pos]
            b = idx[pos + 1 :]
            ok = cols.agility_ok(np.full(len(b), a), b, m) & (cols.tile[b] != cols.tile[a])
            if ok.any():
                chunks.append(np.stack([np.full(int(ok.sum()), a), b[ok]], axis=1))
    edges = np.concatenate(chunks) if chunks else _empty_edges()
    return ScheduleGraph.from_edges(cols.n, edges, FEASIBILITY, cols.payload())


# ---------------------------------------------------------------------------
# Complementarity and statistics


@dataclass
class ComplementarityReport:
    passed: bool
    counterexample: tuple[int, int] | None = None
    message: str = ""
    counts: dict = field(default_factory=dict)

    def __bool__(self):
        return self.passed


def verify_complementarity(gf: ScheduleGraph, gi: ScheduleGraph) -> ComplementarityReport:
    """Check that feasible, infeasible and cross-satellite compatible pairs partition all pairs.

    Same-satellite pairs must be in exactly one of the two graphs; cross-satellite
    pairs must never be feasibility edges and are infeasibility edges exactly
    when they share a tile.
    """
    if gf.n != gi.n:
        raise ValueError(f"vertex sets differ: {gf.n} vs {gi.n}")
    for key in ("sat", "tile"):
        if key not in gf.payload or key not in gi.payload:
            raise ValueError(f"graphs need a '{key}' payload")
        if not np.array_equal(gf.payload[key], gi.payload[key]):
            raise ValueError(f"graphs disagree on vertex '{key}' payload")
    sat = np.asarray(gi.payload["sat"])
    tile = np.asarray(gi.payload["tile"])
    feas = gf.edge_set()
    infeas = gi.edge_set()
    n = gi.n
    sat_sizes = np.bincount(np.unique(sat, return_inverse=True)[1]) if n else np.array([], dtype=int)
    same_sat_pairs = int(sum(k * (k - 1) // 2 for k in sat_sizes.tolist()))
    counts = {
        "vertices": n,
        "feasible": len(feas),
        "infeasible": len(infeas),
        "same_satellite_pairs": same_sat_pairs,
        "all_pairs": n * (n - 1) // 2,
    }

    both = feas & infeas
    if both:
        pair = min(both)
        return ComplementarityReport(False, pair, f"pair {pair} is both feasible and infeasible", counts)
    for i, j in sorted(feas):
        if sat[i] != sat[j]:
            return ComplementarityReport(False, (i, j), f"feasibility edge {(i, j)} crosses satellites", counts)

    infeas_same = {(i, j) for i, j in infeas if sat[i] == sat[j]}
    infeas_cross = infeas - infeas_same
    counts["infeasible_same_satellite"] = len(infeas_same)
    counts["infeasible_cross_satellite"] = len(infeas_cross)
    if len(feas) + len(infeas_same) != same_sat_pairs:
        pair = _first_uncovered_pair(sat, feas, infeas_same)
        return ComplementarityReport(
            False, pair, f"same-satellite pair {pair} is neither feasible nor infeasible", counts
        )

    expected_cross = {
        (int(i), int(j)) for i, j in _repetition_pairs_from(tile).tolist() if sat[i] != sat[j]
    }
    diff = expected_cross ^ infeas_cross
    if diff:
        pair = min(diff)
        why = "missing repetition edge" if pair in expected_cross else "cross-satellite edge without shared tile"
        return ComplementarityReport(False, pair, f"{why} at {pair}", counts)
    return ComplementarityReport(True, None, "ok", counts)


def _repetition_pairs_from(tile: np.ndarray) -> np.ndarray:
    groups = defaultdict(list)
    for v, t in enumerate(tile.tolist()):
        groups[t].append(v)
    chunks = []
    for members in groups.values():
        if len(members) > 1:
            mem = np.array(members)
            i, j = np.triu_indices(len(mem), 1)
            chunks.append(np.stack([mem[i], mem[j]], axis=1))
    return np.concatenate(chunks) if chunks else _empty_edges()


def _first_uncovered_pair(sat: np.ndarray, feas: set, infeas: set) -> tuple[int, int] | None:
    for s in np.unique(sat):
        idx = np.flatnonzero(sat == s).tolist()
        for a in range(len(idx)):
            for b in range(a + 1, len(idx)):
                pair = (idx[a], idx[b])
                if pair not in feas and pair not in infeas:
                    return pair
    return None


def graph_stats(g: ScheduleGraph) -> dict:
    """Vertex/edge counts, density over unordered pairs, max degree and degree histogram."""
    n = g.n
    m = g.num_edges
    pairs = n * (n - 1) // 2
    if m:
        deg = np.bincount(g.edges.ravel(), minlength=n)
    else:
        deg = np.zeros(n, dtype=np.int64)
    return {
        "vertices": n,
        "edges": m,
        "density": m / pairs if pairs else 0.0,
        "max_degree": int(deg.max()) if n else 0,
        "degree_histogram": np.bincount(deg).tolist() if n else [],
    }
