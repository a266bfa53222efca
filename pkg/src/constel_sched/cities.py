"""City tables as tasking requests, plus a synthetic stand-in for real city data."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .astro import GeodeticPoint
from .tasking import InvalidInputError, LookAngleRange, Request

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class City:
    name: str
    lat: float
    lon: float
    population: float


def read_cities(path) -> tuple[list[City], int]:
    """Parse a CSV with columns city, lat, lng, population; returns (rows, skipped)."""
    p = Path(path)
    try:
        fh = p.open(newline="", encoding="utf-8")
    except OSError as err:
        raise InvalidInputError(f"cannot read cities file {p}: {err}") from err
    rows, skipped = [], 0
    with fh:
        reader = csv.DictReader(fh)
        need = {"city", "lat", "lng", "population"}
        if reader.fieldnames is None or not need <= set(reader.fieldnames):
            raise InvalidInputError(f"{p}: header must include {sorted(need)}")
        for lineno, row in enumerate(reader, 2):
            try:
                lat, lon, pop = float(row["lat"]), float(row["lng"]), float(row["population"])
                if not (-90 <= lat <= 90 and -180 <= lon <= 180) or not math.isfinite(pop) or pop < 0:
                    raise ValueError("out of range")
                name = (row["city"] or "").strip()
                if not name:
                    raise ValueError("empty name")
            except (TypeError, ValueError) as err:
                skipped += 1
                log.warning("%s:%d: skipping row (%s)", p, lineno, err)
                continue
            rows.append(City(name, lat, lon, pop))
    return rows, skipped


def cities_to_requests(cities: Sequence[City], constraints=(), first_id: int = 0) -> list[Request]:
    return [
        Request(first_id + i, GeodeticPoint(c.lat, c.lon), constraints=tuple(constraints), name=c.name)
        for i, c in enumerate(cities)
    ]


def top_cities(cities: Sequence[City], n: int) -> list[City]:
    """Largest ``n`` by population; ties by name."""
    if n < 1:
        raise InvalidInputError("need at least one request")
    if len(cities) < n:
        raise InvalidInputError(f"asked for {n} cities but only {len(cities)} valid rows are available")
    return sorted(cities, key=lambda c: (-c.population, c.name))[:n]


def load_cities(path, n: int, constraints=(LookAngleRange(0.0, 50.0),)) -> list[Request]:
    rows, skipped = read_cities(path)
    if skipped:
        log.warning("%s: skipped %d malformed rows", path, skipped)
    return cities_to_requests(top_cities(rows, n), constraints)


# Large metro areas used as cluster centres for synthetic data.
_METROS = [
    ("Tokyo", 35.69, 139.69), ("Delhi", 28.61, 77.21), ("Shanghai", 31.23, 121.47),
    ("Sao Paulo", -23.55, -46.63), ("Mexico City", 19.43, -99.13), ("Cairo", 30.04, 31.24),
    ("Mumbai", 19.08, 72.88), ("Beijing", 39.90, 116.41), ("Dhaka", 23.81, 90.41),
    ("Osaka", 34.69, 135.50), ("New York", 40.71, -74.01), ("Karachi", 24.86, 67.01),
    ("Buenos Aires", -34.60, -58.38), ("Istanbul", 41.01, 28.98), ("Kolkata", 22.57, 88.36),
    ("Manila", 14.60, 120.98), ("Lagos", 6.52, 3.38), ("Rio de Janeiro", -22.91, -43.17),
    ("Kinshasa", -4.44, 15.27), ("Los Angeles", 34.05, -118.24), ("Moscow", 55.76, 37.62),
    ("Lahore", 31.55, 74.34), ("Bangkok", 13.76, 100.50), ("Jakarta", -6.21, 106.85),
    ("Lima", -12.05, -77.04), ("London", 51.51, -0.13), ("Bogota", 4.71, -74.07),
    ("Tehran", 35.69, 51.39), ("Paris", 48.86, 2.35), ("Nairobi", -1.29, 36.82),
    ("Johannesburg", -26.20, 28.05), ("Chicago", 41.88, -87.63), ("Seoul", 37.57, 126.98),
    ("Riyadh", 24.71, 46.68), ("Madrid", 40.42, -3.70), ("Sydney", -33.87, 151.21),
    ("Toronto", 43.65, -79.38), ("Santiago", -33.45, -70.67), ("Ho Chi Minh City", 10.82, 106.63),
    ("Baghdad", 33.31, 44.37),
]


def synthetic_cities(n: int, seed: int = 0, spread_deg: float = 4.0) -> list[City]:
    """Clustered pseudo-cities: Gaussian scatter around real metros, Pareto populations."""
    rng = np.random.default_rng(seed)
    centre = rng.integers(len(_METROS), size=n)
    out = []
    for i, k in enumerate(centre.tolist()):
        name, lat0, lon0 = _METROS[k]
        lat = float(np.clip(lat0 + rng.normal(0, spread_deg), -85, 85))
        lon = float((lon0 + rng.normal(0, spread_deg) + 180) % 360 - 180)
        pop = float(round(5e4 * (1 + rng.pareto(1.2)), 0))
        out.append(City(f"{name} {i:05d}", round(lat, 4), round(lon, 4), pop))
    return out


def write_cities_csv(cities: Sequence[City], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["city", "lat", "lng", "population"])
        for c in cities:
            w.writerow([c.name, c.lat, c.lon, int(c.population)])
