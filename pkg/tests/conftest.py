"""Shared fixtures and independent oracles.

Oracles here deliberately avoid the package's own algorithms: brute-force
enumeration for independent sets and schedules, and a law-of-cosines look
angle for the dense access sweep.
"""

from __future__ import annotations

import math
import random
from itertools import combinations

import numpy as np
import pytest

from constel_sched.astro import EARTH_RADIUS_KM, GeodeticPoint, Horizon, KeplerPropagator, walker_constellation
from constel_sched.graph import ScheduleGraph
from constel_sched.tasking import LookAngleRange, Request


# ---------------------------------------------------------------------------
# Acceptance report

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


# ---------------------------------------------------------------------------
# Graph oracles


def random_graph(n: int, p: float, seed: int) -> ScheduleGraph:
    rng = random.Random(seed)
    edges = [(i, j) for i, j in combinations(range(n), 2) if rng.random() < p]
    return ScheduleGraph.from_edges(n, np.array(edges, dtype=np.int64).reshape(-1, 2))


def brute_force_alpha(g: ScheduleGraph) -> int:
    """Independence number by enumerating vertex subsets, largest first."""
    n = g.n
    nbr = [0] * n
    for u, v in g.edges.tolist():
        nbr[u] |= 1 << v
        nbr[v] |= 1 << u
    best = 0

    def grow(cand: int, size: int):
        nonlocal best
        if cand == 0:
            best = max(best, size)
            return
        if size + bin(cand).count("1") <= best:
            return
        v = cand.bit_length() - 1
        grow(cand & ~(1 << v) & ~nbr[v], size + 1)
        grow(cand & ~(1 << v), size)

    grow((1 << n) - 1, 0)
    return best


def edge_scan_independent(g: ScheduleGraph, vertices) -> bool:
    s = set(vertices)
    return not any(u in s and v in s for u, v in g.edges.tolist())


def has_free_vertex(g: ScheduleGraph, vertices) -> bool:
    s = set(vertices)
    adj = g.adjacency_sets()
    return any(v not in s and not (adj[v] & s) for v in range(g.n))


def has_two_improvement(g: ScheduleGraph, vertices) -> bool:
    """Exhaustive check: remove one solution vertex, add two non-adjacent others."""
    s = set(vertices)
    adj = g.adjacency_sets()
    for x in s:
        rest = s - {x}
        free = [v for v in range(g.n) if v not in rest and v != x and not (adj[v] & rest)]
        for a, b in combinations(free, 2):
            if b not in adj[a]:
                return True
    return False


# ---------------------------------------------------------------------------
# Geometry and scenario helpers


def law_of_cosines_look_angle(sat_radius: float, central_angle_deg: float) -> float:
    """Off-nadir angle to a ground point at a given Earth central angle."""
    g = math.radians(central_angle_deg)
    rho = math.sqrt(sat_radius**2 + EARTH_RADIUS_KM**2 - 2 * sat_radius * EARTH_RADIUS_KM * math.cos(g))
    # sine rule in the Earth-centre / satellite / target triangle; the angle at
    # the satellite never exceeds asin(Re / r) < 90 deg, so asin is unambiguous
    return math.degrees(math.asin(min(1.0, EARTH_RADIUS_KM * math.sin(g) / rho)))


def dense_grid(horizon: Horizon, step: float = 0.1) -> np.ndarray:
    return np.arange(horizon.start, horizon.end + step / 2, step)


def oracle_access_windows(
    orbit, location: GeodeticPoint, look: tuple[float, float], horizon: Horizon, step: float = 0.1, pos=None
):
    """Maximal runs of access on a dense grid, via an independent look-angle formula.

    Returns (first, last) grid instants of each run with access. ``pos`` may
    carry precomputed ECEF positions on ``dense_grid(horizon, step)``.
    """
    t = dense_grid(horizon, step)
    if pos is None:
        pos, _ = KeplerPropagator().states(orbit, t, horizon.anchor)
    tgt = location.to_ecef()
    r = np.linalg.norm(pos, axis=1)
    cos_g = pos @ tgt / (r * np.linalg.norm(tgt))
    g = np.arccos(np.clip(cos_g, -1, 1))
    rho = np.sqrt(r**2 + EARTH_RADIUS_KM**2 - 2 * r * EARTH_RADIUS_KM * np.cos(g))
    # angle at the satellite by the law of cosines
    cos_eta = (r**2 + rho**2 - EARTH_RADIUS_KM**2) / (2 * r * rho)
    eta = np.degrees(np.arccos(np.clip(cos_eta, -1, 1)))
    visible = r * np.cos(g) > EARTH_RADIUS_KM  # target above the local horizon
    ok = visible & (eta >= look[0]) & (eta <= look[1])
    edges = np.diff(ok.astype(np.int8), prepend=0, append=0)
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1) - 1
    return [(float(t[a]), float(t[b])) for a, b in zip(starts, ends)]


def random_requests(n: int, seed: int, lat_max: float = 60.0, look=(0.0, 50.0), first_id: int = 0):
    rng = np.random.default_rng(seed)
    return [
        Request(
            first_id + i,
            GeodeticPoint(float(rng.uniform(-lat_max, lat_max)), float(rng.uniform(-180, 180))),
            constraints=(LookAngleRange(*look),),
        )
        for i in range(n)
    ]


def desk_orbits(n_sats: int, altitude: float = 500.0, inclination: float = 97.4):
    return walker_constellation(n_sats, n_sats, min(1, n_sats - 1), altitude, inclination)


@pytest.fixture
def petersen() -> ScheduleGraph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return ScheduleGraph.from_edges(10, outer + spokes + inner)


def best_schedule_by_enumeration(collects, slew_rate: float, settle: float) -> int:
    """Largest valid schedule over all subsets of ``collects``.

    Valid means: no tile twice, and each satellite's consecutive collects
    (by start time) leave at least angle/rate + settle between them. The
    slew angle is recomputed here as 2*acos(|<q1, q2>|).
    """
    xs = sorted(collects, key=lambda x: (x.t_start, x.t_end, x.id))
    n = len(xs)
    best = 0

    def slew(a, b) -> float:
        d = abs(float(np.dot(np.asarray(a.q_end.q), np.asarray(b.q_start.q))))
        return math.degrees(2 * math.acos(min(1.0, d))) / slew_rate + settle

    def go(i: int, last: dict, tiles: frozenset, size: int):
        nonlocal best
        best = max(best, size)
        if i == n or size + (n - i) <= best:
            return
        x = xs[i]
        prev = last.get(x.sat)
        if x.tile not in tiles and (prev is None or x.t_start - prev.t_end >= slew(prev, x)):
            go(i + 1, {**last, x.sat: x}, tiles | {x.tile}, size + 1)
        go(i + 1, last, tiles, size)

    go(0, {}, frozenset(), 0)
    return best


def random_collects(n: int, seed: int, n_sats: int = 2, n_tiles: int | None = None, span: float = 3000.0):
    """Synthetic collects with random attitudes, windows of 5-30 s and dense ids."""
    from constel_sched.astro import Attitude
    from constel_sched.tasking import Collect

    rng = np.random.default_rng(seed)
    n_tiles = n_tiles or max(1, n // 2)
    out = []
    for i in range(n):
        ts = float(rng.uniform(0, span))
        q1, q2 = rng.normal(size=4), rng.normal(size=4)
        tile = int(rng.integers(n_tiles))
        out.append(Collect(i, int(rng.integers(n_sats)), tile, tile, ts, ts + float(rng.uniform(5, 30)), Attitude(q1), Attitude(q2)))
    return out


def pair_conflicts(a, b, slew_rate: float, settle: float) -> bool:
    """Direct re-check of the exclusion rule for one pair from raw quaternions."""
    if a.tile == b.tile:
        return True
    if a.sat != b.sat:
        return False
    first, second = sorted((a, b), key=lambda x: (x.t_start, x.t_end, x.id))
    d = abs(float(np.dot(np.asarray(first.q_end.q), np.asarray(second.q_start.q))))
    need = math.degrees(2 * math.acos(min(1.0, d))) / slew_rate + settle
    return second.t_start - first.t_end < need - 1e-9
