"""Access search: every constraint-satisfying collect for every (satellite, tile) pair.

A coarse scan at ``t_micro`` finds instants where all request constraints
hold; window edges are then refined by a reversing, halving march until the
step falls below ``tol``. Every collect also needs a clear line of sight.

The refinement assumes one crossing per ``t_micro`` step, and the scan
resumes ``t_macro`` after each window. With a look-angle lower bound above
zero, an overhead pass splits into two windows. A gap shorter than
``t_micro`` is merged into a single collect. A second window that ends
within ``t_macro`` of the first is skipped.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .astro import Attitude, Horizon, KeplerPropagator, OrbitElements, compute_attitude, is_visible, is_visible_xyz
from .tasking import Collect, Request, Tile, access_mask, check_access_constraints


@dataclass(frozen=True)
class SearchParams:
    t_micro: float = 10.0
    t_macro: float = 60.0
    tol: float = 0.5
    min_collect_duration: float = 1.0

    def __post_init__(self):
        if not 0 < self.tol < self.t_micro <= self.t_macro:
            raise ValueError("need 0 < tol < t_micro <= t_macro")
        if self.min_collect_duration < self.tol:
            raise ValueError("min_collect_duration must be >= tol")


def find_collect_boundary(
    access: Callable[[float], bool],
    t: float,
    dt: float,
    tol: float,
    t_min: float = -math.inf,
    t_max: float = math.inf,
) -> float:
    """Locate the edge of the access interval containing ``t``.

    March from ``t`` in steps of ``dt`` until the access value flips, then
    reverse and halve the step, repeating until a flip is bracketed by a
    step shorter than ``tol``. The bracket end on the same side as ``t`` is
    returned, so the result is within ``tol`` of the crossing. Marching past
    ``[t_min, t_max]`` clamps to that edge.
    """
    if abs(dt) < tol:
        return t
    inside = access(t)
    step = dt
    value = inside
    while True:
        while True:
            nxt = min(max(t + step, t_min), t_max)
            if nxt == t:
                return t
            prev, t = t, nxt
            if access(t) != value:
                break
        if abs(step) < tol:
            return prev if value == inside else t
        value = not value
        step = -step / 2.0


class _AccessOracle:
    """Scalar access predicate for one (orbit, tile, request).

    Grid instants are answered from the coarse-scan mask; other instants are
    evaluated and cached. Access always requires line of sight.
    """

    def __init__(self, orbit, tile, request, horizon, propagator, seconds: np.ndarray, mask: np.ndarray, step: float):
        self.orbit = orbit
        self.tile = tile
        self.request = request
        self.horizon = horizon
        self.propagator = propagator
        self.t0 = float(seconds[0]) if len(seconds) else 0.0
        self.step = step
        self.mask = mask
        self.cache: dict[float, bool] = {}

    def state(self, t: float):
        return self.propagator.state(self.orbit, self.horizon.epoch(t))

    def __call__(self, t: float) -> bool:
        k = (t - self.t0) / self.step
        kr = round(k)
        if abs(k - kr) < 1e-9 and 0 <= kr < len(self.mask):
            return bool(self.mask[kr])
        key = round(t, 6)
        hit = self.cache.get(key)
        if hit is None:
            p = self.state(t)
            hit = is_visible_xyz(p.position, self.tile.ecef) and check_access_constraints(
                self.horizon.epoch(t), p, self.tile, self.request
            )
            self.cache[key] = hit
        return hit


def _search_interval(request: Request, horizon: Horizon) -> tuple[float, float]:
    lo = max(horizon.start, request.window[0])
    hi = min(horizon.end, request.window[1])
    return lo, hi


def coarse_grid(horizon: Horizon, params: SearchParams, start: float | None = None) -> np.ndarray:
    start = horizon.start if start is None else start
    n = int(math.ceil((horizon.end - start) / params.t_micro))
    return start + params.t_micro * np.arange(n)


def tile_collect_search(
    orbit: OrbitElements,
    tile: Tile,
    request: Request,
    horizon: Horizon,
    params: SearchParams = SearchParams(),
    propagator=None,
    grid_states: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None,
    visible: np.ndarray | None = None,
) -> list[Collect]:
    """All collects of ``tile`` by one satellite, sorted by start time.

    ``grid_states`` optionally supplies precomputed (seconds, pos, vel) on the
    horizon's coarse grid so several tiles can share one propagation;
    ``visible`` is then the matching line-of-sight mask for this tile.
    """
    propagator = propagator or KeplerPropagator()
    lo, hi = _search_interval(request, horizon)
    if not lo < hi:
        return []
    if grid_states is not None and lo == horizon.start:
        seconds, pos, vel = grid_states
    else:
        seconds = coarse_grid(horizon, params, start=lo)
        pos, vel = propagator.states(orbit, seconds, horizon.anchor)
    keep = seconds < hi
    seconds, pos, vel = seconds[keep], pos[keep], vel[keep]
    if visible is None:
        visible = is_visible(pos, tile.ecef)
    else:
        visible = visible[keep]
    cand = np.flatnonzero(visible)
    mask = np.zeros(len(seconds), dtype=bool)
    if len(cand):
        mask[cand] = access_mask(seconds[cand], pos[cand], vel[cand], tile, request, horizon.anchor)
    if not mask.any():
        return []

    oracle = _AccessOracle(orbit, tile, request, horizon, propagator, seconds, mask, params.t_micro)
    hits = np.flatnonzero(mask)
    out: list[Collect] = []
    k = 0
    while k < len(hits):
        t = float(seconds[hits[k]])
        t_s = find_collect_boundary(oracle, t, -params.t_micro, params.tol, lo, hi)
        t_e = find_collect_boundary(oracle, t, params.t_micro, params.tol, lo, hi)
        if t_e - t_s >= params.min_collect_duration:
            out.append(
                Collect(
                    id=len(out),
                    sat=orbit.sat_id,
                    tile=tile.id,
                    request=request.id,
                    t_start=t_s,
                    t_end=t_e,
                    q_start=compute_attitude(oracle.state(t_s), tile.location),
                    q_end=compute_attitude(oracle.state(t_e), tile.location),
                    weight=request.weight,
                )
            )
        # resume on the coarse grid one macro step past the window end
        resume = max(t_e, t) + params.t_macro
        k = int(np.searchsorted(hits, np.searchsorted(seconds, resume - 1e-9), side="left"))
    return out


def _search_satellite(args) -> list[Collect]:
    orbit, tiles, requests_by_id, horizon, params, propagator = args
    seconds = coarse_grid(horizon, params)
    pos, vel = propagator.states(orbit, seconds, horizon.anchor)
    out = []
    # line of sight for every (instant, tile) at once: p.t > |t|^2
    for lo in range(0, len(tiles), 256):
        chunk = tiles[lo : lo + 256]
        tgt = np.array([t.ecef for t in chunk]).reshape(-1, 3)
        vis = pos @ tgt.T > np.einsum("ij,ij->i", tgt, tgt)
        for j, tile in enumerate(chunk):
            req = requests_by_id[tile.request_id]
            out.extend(
                tile_collect_search(orbit, tile, req, horizon, params, propagator, (seconds, pos, vel), vis[:, j])
            )
    return out


def collect_search_all(
    orbits: Sequence[OrbitElements],
    tiles: Sequence[Tile],
    requests: Sequence[Request],
    horizon: Horizon,
    params: SearchParams = SearchParams(),
    workers: int = 1,
    propagator=None,
) -> list[Collect]:
    """The action space X, sorted by (satellite, tile, start) with dense ids."""
    propagator = propagator or KeplerPropagator()
    requests_by_id = {r.id: r for r in requests}
    missing = {t.request_id for t in tiles} - requests_by_id.keys()
    if missing:
        raise ValueError(f"tiles reference unknown requests: {sorted(missing)}")
    jobs = [(o, list(tiles), requests_by_id, horizon, params, propagator) for o in orbits]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_search_satellite, jobs))
    else:
        chunks = [_search_satellite(job) for job in jobs]
    found = [x for chunk in chunks for x in chunk]
    return reindex(found)


def reindex(collects: Iterable[Collect]) -> list[Collect]:
    """Sort by (satellite, tile, start) and assign dense ids."""
    ordered = sorted(collects, key=lambda x: (x.sat, x.tile, x.t_start, x.t_end))
    return [replace(x, id=i) for i, x in enumerate(ordered)]


def write_collects_jsonl(collects: Iterable[Collect], path) -> None:
    with open(path, "w") as fh:
        for x in collects:
            row = {
                "id": x.id,
                "sat": x.sat,
                "tile": x.tile,
                "request": x.request,
                "t_s": round(x.t_start, 3),
                "t_e": round(x.t_end, 3),
                "q_s": list(x.q_start.q),
                "q_e": list(x.q_end.q),
            }
            fh.write(json.dumps(row) + "\n")


def read_collects_jsonl(path) -> list[Collect]:
    out = []
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            row = json.loads(line)
            out.append(
                Collect(
                    id=row["id"],
                    sat=row["sat"],
                    tile=row["tile"],
                    request=row["request"],
                    t_start=row["t_s"],
                    t_end=row["t_e"],
                    q_start=Attitude(tuple(row["q_s"])),
                    q_end=Attitude(tuple(row["q_e"])),
                )
            )
    return out
