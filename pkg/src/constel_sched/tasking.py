"""Tasking requests, request-level access constraints, tiles and collects."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from datetime import datetime
from functools import cached_property
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .astro import (
    EARTH_RADIUS_KM,
    DEFAULT_ANCHOR,
    Attitude,
    EcefState,
    Epoch,
    GeodeticPoint,
    Horizon,
    OrbitElements,
    local_solar_time,
    is_visible,
    is_visible_xyz,
    look_angle_xyz,
    local_solar_times,
    look_angles,
)


class RequestRejected(ValueError):
    """Raised by :func:`validate_request`; ``reason`` is a machine-readable code."""

    GEOMETRY = "geometry"
    CONTRADICTION = "contradiction"
    OUT_OF_HORIZON = "out-of-horizon"

    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason
        self.detail = detail


class InfeasibleForceInError(ValueError):
    pass


class InvalidInputError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Constraints. Each is a pure predicate k(t, p, l, r) -> bool with a
# vectorised twin ``mask`` used by the coarse access scan.


@dataclass(frozen=True)
class LookAngleRange:
    """Off-nadir angle bounds in degrees.

    Every ground point, including ones on the far side of the Earth, has an
    off-nadir angle below ~70 deg from LEO, so the range also requires a
    clear line of sight.
    """

    min_deg: float
    max_deg: float

    def __call__(self, t: Epoch, p: EcefState, l: Tile, r: Request) -> bool:
        tgt = l.ecef
        if not is_visible_xyz(p.position, tgt):
            return False
        return self.min_deg <= look_angle_xyz(p.position, tgt) <= self.max_deg

    def mask(self, seconds, pos, vel, l: Tile, r: Request, anchor: datetime) -> np.ndarray:
        tgt = l.ecef
        theta = look_angles(pos, tgt)
        return (theta >= self.min_deg) & (theta <= self.max_deg) & is_visible(pos, tgt)


@dataclass(frozen=True)
class LocalTimeRange:
    """Mean local solar time window in hours; ``start > end`` wraps midnight."""

    start: float
    end: float

    def contains(self, hours):
        if self.start <= self.end:
            return (hours >= self.start) & (hours <= self.end)
        return (hours >= self.start) | (hours <= self.end)

    def intervals(self) -> list[tuple[float, float]]:
        if self.start <= self.end:
            return [(self.start, self.end)]
        return [(self.start, 24.0), (0.0, self.end)]

    def __call__(self, t: Epoch, p: EcefState, l: Tile, r: Request) -> bool:
        return bool(self.contains(local_solar_time(l.location, t)))

    def mask(self, seconds, pos, vel, l: Tile, r: Request, anchor: datetime) -> np.ndarray:
        return self.contains(local_solar_times(l.location.lon, seconds, anchor))


@dataclass(frozen=True)
class ValidityWindow:
    """Seconds from the horizon start."""

    start: float
    end: float

    def __call__(self, t: Epoch, p: EcefState, l: Tile, r: Request) -> bool:
        return self.start <= t.seconds <= self.end

    def mask(self, seconds, pos, vel, l: Tile, r: Request, anchor: datetime) -> np.ndarray:
        seconds = np.asarray(seconds)
        return (seconds >= self.start) & (seconds <= self.end)


RequestConstraint = Union[LookAngleRange, LocalTimeRange, ValidityWindow]


@dataclass(frozen=True)
class Request:
    """A point imaging request.

    ``location`` may also be a sequence of points (a polygon); such requests
    are rejected by :func:`validate_request`.
    """

    id: int
    location: GeodeticPoint | Sequence[GeodeticPoint]
    window: tuple[float, float] = (0.0, math.inf)
    constraints: tuple = ()
    weight: float = 1.0
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if not self.weight > 0:
            raise ValueError(f"request weight must be positive, got {self.weight}")


@dataclass(frozen=True)
class Tile:
    id: int
    request_id: int
    location: GeodeticPoint

    @cached_property
    def ecef(self) -> np.ndarray:
        return self.location.to_ecef()


@dataclass(frozen=True, slots=True)
class Collect:
    """One imaging opportunity; ``id`` doubles as the graph vertex index."""

    id: int
    sat: int
    tile: int
    request: int
    t_start: float
    t_end: float
    q_start: Attitude
    q_end: Attitude
    weight: float = 1.0
    forced: bool = False

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start


# ---------------------------------------------------------------------------
# Request processing


def _intersect(a: list[tuple[float, float]], b: list[tuple[float, float]]) -> list[tuple[float, float]]:
    out = []
    for lo1, hi1 in a:
        for lo2, hi2 in b:
            lo, hi = max(lo1, lo2), min(hi1, hi2)
            if lo <= hi:
                out.append((lo, hi))
    return out


def validate_request(r: Request, horizon: Horizon | None = None) -> Request:
    """Return ``r`` if it can yield collects, else raise :class:`RequestRejected`."""
    if not isinstance(r.location, GeodeticPoint):
        raise RequestRejected(RequestRejected.GEOMETRY, f"request {r.id}: only point geometries are supported")

    looks = [c for c in r.constraints if isinstance(c, LookAngleRange)]
    if looks:
        lo = max(c.min_deg for c in looks)
        hi = min(c.max_deg for c in looks)
        if lo < 0 or hi > 90 or not lo < hi:
            raise RequestRejected(RequestRejected.CONTRADICTION, f"request {r.id}: empty look-angle range [{lo}, {hi}]")

    times = [c for c in r.constraints if isinstance(c, LocalTimeRange)]
    if times:
        allowed = [(0.0, 24.0)]
        for c in times:
            allowed = _intersect(allowed, c.intervals())
        if not any(hi > lo for lo, hi in allowed):
            raise RequestRejected(RequestRejected.CONTRADICTION, f"request {r.id}: empty local-time window")

    lo, hi = r.window
    if not lo < hi:
        raise RequestRejected(RequestRejected.CONTRADICTION, f"request {r.id}: validity start {lo} >= end {hi}")
    windows = [c for c in r.constraints if isinstance(c, ValidityWindow)]
    for c in windows:
        lo, hi = max(lo, c.start), min(hi, c.end)
    if not lo < hi:
        raise RequestRejected(RequestRejected.CONTRADICTION, f"request {r.id}: validity windows do not overlap")
    if horizon is not None and (hi <= horizon.start or lo >= horizon.end):
        raise RequestRejected(RequestRejected.OUT_OF_HORIZON, f"request {r.id}: validity window misses the horizon")
    return r


def validate_requests(requests: Iterable[Request], horizon: Horizon | None = None) -> tuple[list[Request], list[RequestRejected]]:
    accepted, rejected = [], []
    for r in requests:
        try:
            accepted.append(validate_request(r, horizon))
        except RequestRejected as err:
            rejected.append(err)
    return accepted, rejected


def visibility_margin(altitude: float) -> float:
    """Earth central angle (deg) from the sub-satellite point to the horizon."""
    return math.degrees(math.acos(EARTH_RADIUS_KM / (EARTH_RADIUS_KM + altitude)))


def max_visible_latitude(orbits: Sequence[OrbitElements]) -> float:
    best = -math.inf
    for o in orbits:
        inc = o.inclination % 180.0
        reach = min(inc, 180.0 - inc)
        apogee_alt = o.semi_major_axis * (1 + o.eccentricity) - EARTH_RADIUS_KM
        best = max(best, reach + visibility_margin(apogee_alt))
    return best


def filter_requests(requests: Sequence[Request], orbits: Sequence[OrbitElements]) -> list[Request]:
    """Drop requests poleward of anything the constellation can ever see."""
    if not orbits:
        return []
    limit = max_visible_latitude(orbits)
    return [r for r in requests if abs(r.location.lat) <= limit]


def tessellate(r: Request, first_id: int = 0) -> list[Tile]:
    """Point requests map to exactly one tile."""
    if not isinstance(r.location, GeodeticPoint):
        raise RequestRejected(RequestRejected.GEOMETRY, f"request {r.id}: cannot tessellate non-point geometry")
    return [Tile(first_id, r.id, r.location)]


def tessellate_all(requests: Sequence[Request]) -> list[Tile]:
    tiles: list[Tile] = []
    for r in requests:
        tiles.extend(tessellate(r, first_id=len(tiles)))
    return tiles


def check_access_constraints(t: Epoch, p: EcefState, l: Tile, r: Request) -> bool:
    for k in r.constraints:
        if not k(t, p, l, r):
            return False
    return True


def access_mask(seconds, pos, vel, l: Tile, r: Request, anchor: datetime = DEFAULT_ANCHOR) -> np.ndarray:
    """Vectorised :func:`check_access_constraints` over a batch of states."""
    out = np.ones(len(seconds), dtype=bool)
    for k in r.constraints:
        out &= k.mask(seconds, pos, vel, l, r, anchor)
        if not out.any():
            break
    return out


# ---------------------------------------------------------------------------
# Force-in / force-out

PairConstraint = Callable[[Collect, Collect], bool]


def apply_force_constraints(
    collects: Sequence[Collect],
    force_in: Iterable[int] = (),
    force_out: Iterable[int] = (),
    constraints: Sequence[PairConstraint] = (),
) -> list[Collect]:
    """Filter the action space so forced-in collects can always be scheduled.

    Returned forced-in collects carry ``forced=True``. Ids are left untouched;
    reindex before building a graph.
    """
    force_in, force_out = set(force_in), set(force_out)
    if force_in & force_out:
        raise InvalidInputError(f"collects both forced in and out: {sorted(force_in & force_out)}")
    by_id = {x.id: x for x in collects}
    missing = (force_in | force_out) - by_id.keys()
    if missing:
        raise InvalidInputError(f"unknown collect ids: {sorted(missing)}")

    pinned = [by_id[i] for i in sorted(force_in)]
    for a_idx, a in enumerate(pinned):
        for b in pinned[a_idx + 1 :]:
            if not all(k(a, b) for k in constraints):
                raise InfeasibleForceInError(f"forced-in collects {a.id} and {b.id} conflict")

    out = []
    for x in collects:
        if x.id in force_out:
            continue
        if x.id in force_in:
            out.append(replace(x, forced=True))
        elif all(k(x, f) for f in pinned for k in constraints):
            out.append(x)
    return out
