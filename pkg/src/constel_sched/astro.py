"""Orbit generation, propagation to Earth-fixed coordinates and pointing geometry.

Two-body Keplerian motion with optional J2 secular drift stands in for a full
SGP4 propagator. Earth is a sphere of equatorial radius for all visibility and
look-angle geometry. Times are seconds from the start of the planning horizon;
an :class:`Epoch` additionally carries the UTC anchor of that start.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Protocol

import numpy as np

EARTH_RADIUS_KM = 6378.137
EARTH_MU = 398600.4418  # km^3/s^2
EARTH_J2 = 1.08262668e-3
EARTH_ROTATION_RATE = 7.2921159e-5  # rad/s

DEFAULT_ANCHOR = datetime(2021, 7, 1, tzinfo=timezone.utc)


class InvalidConstellationError(ValueError):
    pass


class OccludedTargetError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Epoch:
    """Seconds since the horizon start, plus the UTC instant of that start."""

    seconds: float
    anchor: datetime = field(default=DEFAULT_ANCHOR, compare=False)

    @property
    def utc(self) -> datetime:
        return self.anchor + timedelta(seconds=self.seconds)

    def __add__(self, dt: float) -> Epoch:
        return Epoch(self.seconds + dt, self.anchor)

    def __sub__(self, other):
        if isinstance(other, Epoch):
            return self.seconds - other.seconds
        return Epoch(self.seconds - other, self.anchor)


@dataclass(frozen=True)
class Horizon:
    """Planning interval [0, duration] seconds, anchored at a UTC instant."""

    duration: float = 86400.0
    anchor: datetime = DEFAULT_ANCHOR

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError(f"horizon duration must be positive, got {self.duration}")

    @property
    def start(self) -> float:
        return 0.0

    @property
    def end(self) -> float:
        return self.duration

    def epoch(self, seconds: float) -> Epoch:
        return Epoch(seconds, self.anchor)


@dataclass(frozen=True)
class OrbitElements:
    """Mean elements at the horizon start.

    Angles are degrees. ``arg_latitude`` is the argument of latitude at t0;
    for eccentric orbits perigee is placed at the ascending node, so it is
    also the true anomaly at t0.
    """

    semi_major_axis: float
    eccentricity: float = 0.0
    inclination: float = 90.0
    raan: float = 0.0
    arg_latitude: float = 0.0
    sat_id: int = 0

    def __post_init__(self):
        if not self.semi_major_axis > EARTH_RADIUS_KM:
            raise ValueError(f"semi-major axis {self.semi_major_axis} km is inside the Earth")
        if not 0.0 <= self.eccentricity < 1.0:
            raise ValueError(f"eccentricity must lie in [0, 1), got {self.eccentricity}")
        if self.semi_major_axis * (1 - self.eccentricity) <= EARTH_RADIUS_KM:
            raise ValueError("perigee is inside the Earth")
        object.__setattr__(self, "raan", self.raan % 360.0)
        object.__setattr__(self, "arg_latitude", self.arg_latitude % 360.0)

    @property
    def altitude(self) -> float:
        return self.semi_major_axis - EARTH_RADIUS_KM

    @property
    def mean_motion(self) -> float:
        """rad/s"""
        return math.sqrt(EARTH_MU / self.semi_major_axis**3)

    @property
    def period(self) -> float:
        return 2 * math.pi / self.mean_motion


@dataclass(frozen=True)
class GeodeticPoint:
    lat: float
    lon: float
    alt: float = 0.0

    def __post_init__(self):
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude out of range: {self.lat}")
        lon = (self.lon + 180.0) % 360.0 - 180.0
        object.__setattr__(self, "lon", lon)

    def to_ecef(self) -> np.ndarray:
        return geodetic_to_ecef(self.lat, self.lon, self.alt)

    @classmethod
    def from_ecef(cls, r) -> GeodeticPoint:
        x, y, z = (float(c) for c in r)
        rho = math.hypot(x, y)
        norm = math.hypot(rho, z)
        return cls(math.degrees(math.atan2(z, rho)), math.degrees(math.atan2(y, x)), norm - EARTH_RADIUS_KM)


def geodetic_to_ecef(lat, lon, alt=0.0):
    """Spherical-Earth conversion; works on scalars or arrays (last axis is xyz)."""
    lat = np.radians(lat)
    lon = np.radians(lon)
    r = EARTH_RADIUS_KM + np.asarray(alt, dtype=float)
    clat = np.cos(lat)
    return np.stack([r * clat * np.cos(lon), r * clat * np.sin(lon), r * np.sin(lat)], axis=-1)


@dataclass(frozen=True)
class EcefState:
    position: np.ndarray
    velocity: np.ndarray
    epoch: Epoch

    @property
    def radius(self) -> float:
        return float(np.linalg.norm(self.position))


class Propagator(Protocol):
    """Anything that yields Earth-fixed states; the default is :class:`KeplerPropagator`."""

    def state(self, orbit: OrbitElements, t: Epoch) -> EcefState: ...

    def states(self, orbit: OrbitElements, seconds: np.ndarray, anchor: datetime) -> tuple[np.ndarray, np.ndarray]: ...


# ---------------------------------------------------------------------------
# Time and frames


def _julian_date(dt: datetime) -> float:
    if dt.tzinfo is not None:
        dt = dt.astimezone(timezone.utc).replace(tzinfo=None)
    j2000 = datetime(2000, 1, 1, 12)
    return 2451545.0 + (dt - j2000).total_seconds() / 86400.0


@functools.lru_cache(maxsize=64)
def gmst_at(anchor: datetime) -> float:
    """Greenwich mean sidereal angle (rad) at a UTC instant, UT1 ~ UTC."""
    d = _julian_date(anchor) - 2451545.0
    deg = 280.46061837 + 360.98564736629 * d
    return math.radians(deg % 360.0)


def earth_rotation_angle(seconds, anchor: datetime):
    return gmst_at(anchor) + EARTH_ROTATION_RATE * np.asarray(seconds, dtype=float)


def eci_to_ecef(r_eci: np.ndarray, v_eci: np.ndarray, theta) -> tuple[np.ndarray, np.ndarray]:
    c, s = np.cos(theta), np.sin(theta)
    x, y, z = r_eci[..., 0], r_eci[..., 1], r_eci[..., 2]
    xe = c * x + s * y
    ye = -s * x + c * y
    vx, vy, vz = v_eci[..., 0], v_eci[..., 1], v_eci[..., 2]
    vxe = c * vx + s * vy + EARTH_ROTATION_RATE * ye
    vye = -s * vx + c * vy - EARTH_ROTATION_RATE * xe
    return np.stack([xe, ye, z], axis=-1), np.stack([vxe, vye, vz], axis=-1)


def ecef_to_eci(r: np.ndarray, v: np.ndarray, theta) -> tuple[np.ndarray, np.ndarray]:
    c, s = np.cos(theta), np.sin(theta)
    vx = v[..., 0] - EARTH_ROTATION_RATE * r[..., 1]
    vy = v[..., 1] + EARTH_ROTATION_RATE * r[..., 0]
    ri = np.stack([c * r[..., 0] - s * r[..., 1], s * r[..., 0] + c * r[..., 1], r[..., 2]], axis=-1)
    vi = np.stack([c * vx - s * vy, s * vx + c * vy, v[..., 2]], axis=-1)
    return ri, vi


# ---------------------------------------------------------------------------
# Constellations and propagation


def walker_constellation(total: int, planes: int, phasing: int, altitude: float, inclination: float) -> list[OrbitElements]:
    """Walker-delta t/p/f constellation of circular orbits."""
    if total <= 0 or planes <= 0 or total % planes:
        raise InvalidConstellationError(f"{planes} planes do not divide {total} satellites")
    if not 0 <= phasing < planes:
        raise InvalidConstellationError(f"phasing must lie in [0, {planes}), got {phasing}")
    per_plane = total // planes
    a = EARTH_RADIUS_KM + altitude
    sats = []
    for p in range(planes):
        for k in range(per_plane):
            sats.append(
                OrbitElements(
                    semi_major_axis=a,
                    inclination=inclination,
                    raan=p * 360.0 / planes,
                    arg_latitude=k * 360.0 / per_plane + p * phasing * 360.0 / total,
                    sat_id=len(sats),
                )
            )
    return sats


def _secular_rates(orbit: OrbitElements, j2: bool) -> tuple[float, float, float]:
    """(raan rate, perigee rate, mean-anomaly rate) in rad/s."""
    n = orbit.mean_motion
    if not j2:
        return 0.0, 0.0, n
    e = orbit.eccentricity
    p = orbit.semi_major_axis * (1 - e * e)
    k = 1.5 * n * EARTH_J2 * (EARTH_RADIUS_KM / p) ** 2
    ci = math.cos(math.radians(orbit.inclination))
    raan_dot = -k * ci
    argp_dot = 0.5 * k * (5 * ci * ci - 1)
    m_dot = n + 0.5 * k * math.sqrt(1 - e * e) * (3 * ci * ci - 1)
    return raan_dot, argp_dot, m_dot


def _kepler_true_anomaly(mean_anomaly: np.ndarray, e: float) -> np.ndarray:
    ecc = np.array(mean_anomaly, dtype=float)
    for _ in range(30):
        delta = (ecc - e * np.sin(ecc) - mean_anomaly) / (1 - e * np.cos(ecc))
        ecc = ecc - delta
        if np.all(np.abs(delta) < 1e-14):
            break
    return 2 * np.arctan2(np.sqrt(1 + e) * np.sin(ecc / 2), np.sqrt(1 - e) * np.cos(ecc / 2))


def _true_to_mean(nu: float, e: float) -> float:
    ecc = 2 * math.atan2(math.sqrt(1 - e) * math.sin(nu / 2), math.sqrt(1 + e) * math.cos(nu / 2))
    return ecc - e * math.sin(ecc)


class KeplerPropagator:
    """Two-body propagation with optional J2 secular drift of node and perigee."""

    def __init__(self, j2: bool = True):
        self.j2 = j2

    def eci_states(self, orbit: OrbitElements, seconds) -> tuple[np.ndarray, np.ndarray]:
        t = np.asarray(seconds, dtype=float)
        raan_dot, argp_dot, m_dot = _secular_rates(orbit, self.j2)
        inc = math.radians(orbit.inclination)
        raan = math.radians(orbit.raan) + raan_dot * t
        e = orbit.eccentricity
        a = orbit.semi_major_axis
        u0 = math.radians(orbit.arg_latitude)
        if e == 0.0:
            u = u0 + (argp_dot + m_dot) * t
            radius = np.full_like(u, a)
            r_dot = np.zeros_like(u)
            u_dot = argp_dot + m_dot
        else:
            argp = argp_dot * t
            m = _true_to_mean(u0, e) + m_dot * t
            nu = _kepler_true_anomaly(m, e)
            u = argp + nu
            p = a * (1 - e * e)
            radius = p / (1 + e * np.cos(nu))
            h = math.sqrt(EARTH_MU * p)
            r_dot = EARTH_MU / h * e * np.sin(nu)
            u_dot = h / radius**2 + argp_dot
        cu, su = np.cos(u), np.sin(u)
        co, so = np.cos(raan), np.sin(raan)
        ci, si = math.cos(inc), math.sin(inc)
        rhat = np.stack([co * cu - so * su * ci, so * cu + co * su * ci, su * si], axis=-1)
        that = np.stack([-co * su - so * cu * ci, -so * su + co * cu * ci, cu * si], axis=-1)
        r = radius[..., None] * rhat
        v = (r_dot[..., None] * rhat) + (radius * u_dot)[..., None] * that
        # node drift carries the whole frame around the polar axis
        v = v + raan_dot * np.stack([-r[..., 1], r[..., 0], np.zeros_like(radius)], axis=-1)
        return r, v

    def states(self, orbit: OrbitElements, seconds, anchor: datetime = DEFAULT_ANCHOR) -> tuple[np.ndarray, np.ndarray]:
        r, v = self.eci_states(orbit, seconds)
        return eci_to_ecef(r, v, earth_rotation_angle(seconds, anchor))

    def state(self, orbit: OrbitElements, t: Epoch) -> EcefState:
        if orbit.eccentricity == 0.0:
            r, v = self._circular_state(orbit, t.seconds, t.anchor)
            return EcefState(np.array(r), np.array(v), t)
        r, v = self.states(orbit, np.array([t.seconds]), t.anchor)
        return EcefState(r[0], v[0], t)

    def _circular_state(self, orbit: OrbitElements, t: float, anchor: datetime):
        """Scalar twin of :meth:`states` for circular orbits; avoids array overhead."""
        raan_dot, argp_dot, m_dot = _secular_rates(orbit, self.j2)
        a = orbit.semi_major_axis
        u = math.radians(orbit.arg_latitude) + (argp_dot + m_dot) * t
        raan = math.radians(orbit.raan) + raan_dot * t
        inc = math.radians(orbit.inclination)
        cu, su = math.cos(u), math.sin(u)
        co, so = math.cos(raan), math.sin(raan)
        ci, si = math.cos(inc), math.sin(inc)
        rx, ry, rz = a * (co * cu - so * su * ci), a * (so * cu + co * su * ci), a * su * si
        w = a * (argp_dot + m_dot)
        vx = w * (-co * su - so * cu * ci) - raan_dot * ry
        vy = w * (-so * su + co * cu * ci) + raan_dot * rx
        vz = w * cu * si
        th = gmst_at(anchor) + EARTH_ROTATION_RATE * t
        c, s = math.cos(th), math.sin(th)
        xe, ye = c * rx + s * ry, -s * rx + c * ry
        vxe = c * vx + s * vy + EARTH_ROTATION_RATE * ye
        vye = -s * vx + c * vy - EARTH_ROTATION_RATE * xe
        return (xe, ye, rz), (vxe, vye, vz)


_DEFAULT_PROPAGATOR = KeplerPropagator()


def propagate_ecef(orbit: OrbitElements, t: Epoch, j2: bool = True) -> EcefState:
    prop = _DEFAULT_PROPAGATOR if j2 else KeplerPropagator(j2=False)
    return prop.state(orbit, t)


# ---------------------------------------------------------------------------
# Pointing geometry


def look_angle(state: EcefState, target: GeodeticPoint) -> float:
    """Off-nadir angle (deg) of the line of sight from the satellite to ``target``."""
    return float(look_angles(state.position, target.to_ecef()))


def look_angles(position: np.ndarray, target_ecef: np.ndarray) -> np.ndarray:
    nadir = -position
    los = target_ecef - position
    cross = np.linalg.norm(np.cross(nadir, los), axis=-1)
    dot = np.einsum("...i,...i->...", nadir, los)
    return np.degrees(np.arctan2(cross, dot))


def look_angle_xyz(position, target_ecef) -> float:
    """Scalar :func:`look_angles` on 3-sequences, without numpy overhead."""
    px, py, pz = (float(c) for c in position)
    tx, ty, tz = (float(c) for c in target_ecef)
    nx, ny, nz = -px, -py, -pz
    lx, ly, lz = tx - px, ty - py, tz - pz
    cx, cy, cz = ny * lz - nz * ly, nz * lx - nx * lz, nx * ly - ny * lx
    return math.degrees(math.atan2(math.sqrt(cx * cx + cy * cy + cz * cz), nx * lx + ny * ly + nz * lz))


def is_visible_xyz(position, target_ecef) -> bool:
    px, py, pz = (float(c) for c in position)
    tx, ty, tz = (float(c) for c in target_ecef)
    return (px - tx) * tx + (py - ty) * ty + (pz - tz) * tz > 0.0


def is_visible(position: np.ndarray, target_ecef: np.ndarray) -> np.ndarray:
    """Line of sight clears the spherical Earth (target above local horizon)."""
    return np.einsum("...i,...i->...", position - target_ecef, target_ecef) > 0.0


def local_solar_time(target: GeodeticPoint, t: Epoch) -> float:
    """Mean local solar time in hours, [0, 24)."""
    utc = t.utc
    midnight = utc.replace(hour=0, minute=0, second=0, microsecond=0)
    hours = (utc - midnight).total_seconds() / 3600.0
    return (hours + target.lon / 15.0) % 24.0


def local_solar_times(lon: float, seconds: np.ndarray, anchor: datetime) -> np.ndarray:
    midnight = anchor.replace(hour=0, minute=0, second=0, microsecond=0)
    offset = (anchor - midnight).total_seconds()
    return ((np.asarray(seconds, dtype=float) + offset) / 3600.0 + lon / 15.0) % 24.0


@dataclass(frozen=True)
class Attitude:
    """Unit quaternion (w, x, y, z) mapping body axes into the inertial frame.

    Stored canonically: unit norm and non-negative scalar part, so q and -q
    construct the same object.
    """

    q: tuple[float, float, float, float]

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        norm = float(np.linalg.norm(q))
        if not norm > 0 or not math.isfinite(norm):
            raise ValueError(f"invalid quaternion {self.q}")
        q = q / norm
        for c in q:
            if c != 0.0:
                if c < 0:
                    q = -q
                break
        object.__setattr__(self, "q", tuple(float(c) for c in q))

    def as_array(self) -> np.ndarray:
        return np.array(self.q)

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> Attitude:
        """Quaternion of a rotation matrix whose columns are body axes in the reference frame."""
        tr = m[0, 0] + m[1, 1] + m[2, 2]
        if tr > 0:
            s = 2.0 * math.sqrt(tr + 1.0)
            q = (0.25 * s, (m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s)
        elif m[0, 0] > m[1, 1] and m[0, 0] > m[2, 2]:
            s = 2.0 * math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2])
            q = ((m[2, 1] - m[1, 2]) / s, 0.25 * s, (m[0, 1] + m[1, 0]) / s, (m[0, 2] + m[2, 0]) / s)
        elif m[1, 1] > m[2, 2]:
            s = 2.0 * math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2])
            q = ((m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s, 0.25 * s, (m[1, 2] + m[2, 1]) / s)
        else:
            s = 2.0 * math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1])
            q = ((m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s, (m[1, 2] + m[2, 1]) / s, 0.25 * s)
        return cls(q)

    def to_matrix(self) -> np.ndarray:
        w, x, y, z = self.q
        return np.array(
            [
                [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
                [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
                [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
            ]
        )


def _pointing_frame(r_eci: np.ndarray, v_eci: np.ndarray, boresight: np.ndarray) -> Attitude:
    z = boresight / np.linalg.norm(boresight)
    x = v_eci - np.dot(v_eci, z) * z
    nx = np.linalg.norm(x)
    if nx < 1e-12:
        # boresight along velocity: fall back to orbit normal for the secondary axis
        x = np.cross(r_eci, v_eci)
        x = x - np.dot(x, z) * z
        nx = np.linalg.norm(x)
    x = x / nx
    y = np.cross(z, x)
    return Attitude.from_matrix(np.column_stack([x, y, z]))


def _inertial(state: EcefState) -> tuple[np.ndarray, np.ndarray, float]:
    theta = float(earth_rotation_angle(state.epoch.seconds, state.epoch.anchor))
    r, v = ecef_to_eci(np.asarray(state.position, float), np.asarray(state.velocity, float), theta)
    return r, v, theta


def nadir_attitude(state: EcefState) -> Attitude:
    """Reference frame with the boresight on nadir and +x along the projected velocity."""
    r, v, _ = _inertial(state)
    return _pointing_frame(r, v, -r)


def compute_attitude(state: EcefState, target: GeodeticPoint) -> Attitude:
    """Attitude pointing body +z at ``target``; +x nearest the inertial velocity."""
    tgt = target.to_ecef()
    if not is_visible(np.asarray(state.position), tgt):
        raise OccludedTargetError(f"target {target} is below the horizon at t={state.epoch.seconds:.3f}s")
    r, v, theta = _inertial(state)
    c, s = math.cos(theta), math.sin(theta)
    tgt_eci = np.array([c * tgt[0] - s * tgt[1], s * tgt[0] + c * tgt[1], tgt[2]])
    return _pointing_frame(r, v, tgt_eci - r)


def quaternion_angles(q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
    """Rotation angle (deg) of q1^-1 q2 for stacked (..., 4) scalar-first quaternions."""
    w1, v1 = q1[..., 0], q1[..., 1:]
    w2, v2 = q2[..., 0], q2[..., 1:]
    w = w1 * w2 + np.einsum("...i,...i->...", v1, v2)
    vec = w1[..., None] * v2 - w2[..., None] * v1 - np.cross(v1, v2)
    return np.degrees(2.0 * np.arctan2(np.linalg.norm(vec, axis=-1), np.abs(w)))


def attitude_angle(q1: Attitude, q2: Attitude) -> float:
    """Angle (deg, [0, 180]) of the rotation taking one attitude to the other."""
    w1, x1, y1, z1 = q1.q
    w2, x2, y2, z2 = q2.q
    w = w1 * w2 + x1 * x2 + y1 * y2 + z1 * z2
    vx = w1 * x2 - w2 * x1 - (y1 * z2 - z1 * y2)
    vy = w1 * y2 - w2 * y1 - (z1 * x2 - x1 * z2)
    vz = w1 * z2 - w2 * z1 - (x1 * y2 - y1 * x2)
    return math.degrees(2.0 * math.atan2(math.sqrt(vx * vx + vy * vy + vz * vz), abs(w)))
