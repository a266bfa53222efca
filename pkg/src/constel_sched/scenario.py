"""Scenario configuration, loaded from YAML.

Example::

    name: walker-4
    seed: 7
    constellation:
      walker: {total: 4, planes: 4, phasing: 1, altitude_km: 500, inclination_deg: 97.4}
    horizon: {duration_s: 86400, anchor: "2021-07-01T00:00:00+00:00"}
    requests:
      cities: data/worldcities.csv    # or `synthetic: true`, or `inline: [{lat, lon}]`
      count: 200
    constraints: {look_angle_deg: [0, 50], local_time_h: [9, 15]}
    agility: {slew_rate_deg_s: 1.0, settle_s: 15.0}
    search: {t_micro: 10, t_macro: 60, tol: 0.5, min_collect_duration: 1.0, workers: 1}
    solvers: ["mis:60", traversal]
    solver: {population_size: 8, max_unsuccessful: 100}
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any

import yaml

from .access import SearchParams
from .astro import DEFAULT_ANCHOR, OrbitElements, EARTH_RADIUS_KM, walker_constellation
from .schedcore import AgilityModel
from .tasking import InvalidInputError, LocalTimeRange, LookAngleRange

SOLVER_KINDS = ("mis", "greedy", "traversal", "exact")
DEFAULT_SOLVERS = ("mis:60", "traversal")


@dataclass(frozen=True)
class SolverSpec:
    kind: str
    time_limit: float | None = None

    @property
    def label(self) -> str:
        return self.kind if self.time_limit is None else f"{self.kind}:{self.time_limit:g}"

    @classmethod
    def parse(cls, text: str) -> SolverSpec:
        kind, _, limit = str(text).strip().partition(":")
        if kind not in SOLVER_KINDS:
            raise InvalidInputError(f"unknown solver {kind!r}; choose from {', '.join(SOLVER_KINDS)}")
        if not limit:
            return cls(kind)
        try:
            seconds = float(limit)
        except ValueError as err:
            raise InvalidInputError(f"bad time limit in solver {text!r}") from err
        if seconds <= 0:
            raise InvalidInputError(f"time limit must be positive in {text!r}")
        return cls(kind, seconds)


@dataclass(frozen=True)
class WalkerSpec:
    total: int
    planes: int
    phasing: int
    altitude_km: float = 500.0
    inclination_deg: float = 97.4

    def orbits(self) -> list[OrbitElements]:
        return walker_constellation(self.total, self.planes, self.phasing, self.altitude_km, self.inclination_deg)


@dataclass
class Scenario:
    name: str = "scenario"
    walker: WalkerSpec | None = None
    elements: list[OrbitElements] = field(default_factory=list)
    horizon_s: float = 86400.0
    anchor: datetime = DEFAULT_ANCHOR
    cities_path: Path | None = None
    synthetic: bool = False
    request_count: int = 100
    inline_requests: list[dict] = field(default_factory=list)
    look_angle: tuple[float, float] = (0.0, 50.0)
    local_time: tuple[float, float] | None = None
    agility: AgilityModel = field(default_factory=AgilityModel)
    search: SearchParams = field(default_factory=SearchParams)
    workers: int = 1
    solvers: tuple[SolverSpec, ...] = tuple(SolverSpec.parse(s) for s in DEFAULT_SOLVERS)
    population_size: int = 8
    max_unsuccessful: int = 100
    seed: int = 0

    def __post_init__(self):
        if not self.horizon_s > 0:
            raise InvalidInputError("horizon must be positive")
        if self.walker is None and not self.elements:
            raise InvalidInputError("scenario needs a constellation (walker or elements)")
        if not self.inline_requests and self.request_count < 1:
            raise InvalidInputError("request count must be >= 1")
        if not self.inline_requests and self.cities_path is None and not self.synthetic:
            raise InvalidInputError("scenario needs a request source (cities, synthetic or inline)")

    def orbits(self) -> list[OrbitElements]:
        return self.walker.orbits() if self.walker is not None else list(self.elements)

    def constraints(self) -> tuple:
        out = [LookAngleRange(*self.look_angle)]
        if self.local_time is not None:
            out.append(LocalTimeRange(*self.local_time))
        return tuple(out)

    def metadata(self) -> dict:
        return {
            "look_angle_deg": list(self.look_angle),
            "local_time_h": None if self.local_time is None else list(self.local_time),
            "slew_rate_deg_s": self.agility.slew_rate,
            "settle_s": self.agility.settle_time,
            "horizon_s": self.horizon_s,
            "anchor": self.anchor.isoformat(),
            "t_micro": self.search.t_micro,
            "t_macro": self.search.t_macro,
            "tol": self.search.tol,
            "seed": self.seed,
        }

    def with_overrides(self, solvers=None, seed=None, workers=None) -> Scenario:
        changes: dict[str, Any] = {}
        if solvers:
            changes["solvers"] = tuple(SolverSpec.parse(s) for s in solvers)
        if seed is not None:
            changes["seed"] = int(seed)
        if workers is not None:
            changes["workers"] = int(workers)
        return replace(self, **changes)


def _pair(value, what: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in value)
    except (TypeError, ValueError) as err:
        raise InvalidInputError(f"{what} must be a two-element list") from err
    return lo, hi


def _anchor(value) -> datetime:
    if isinstance(value, datetime):
        dt = value
    else:
        try:
            dt = datetime.fromisoformat(str(value).replace("Z", "+00:00"))
        except ValueError as err:
            raise InvalidInputError(f"bad anchor {value!r}") from err
    return dt if dt.tzinfo else dt.replace(tzinfo=timezone.utc)


def scenario_from_dict(d: dict, base_dir: Path | None = None) -> Scenario:
    if not isinstance(d, dict):
        raise InvalidInputError("scenario must be a mapping")
    try:
        kw: dict[str, Any] = {"name": str(d.get("name", "scenario")), "seed": int(d.get("seed", 0))}
        cons = d.get("constellation") or {}
        if "walker" in cons:
            kw["walker"] = WalkerSpec(**cons["walker"])
        elif "elements" in cons:
            els = []
            for i, e in enumerate(cons["elements"]):
                e = dict(e)
                if "altitude_km" in e:
                    e["semi_major_axis"] = EARTH_RADIUS_KM + float(e.pop("altitude_km"))
                e.setdefault("sat_id", i)
                els.append(OrbitElements(**e))
            kw["elements"] = els

        hz = d.get("horizon") or {}
        kw["horizon_s"] = float(hz.get("duration_s", 86400.0))
        if "anchor" in hz:
            kw["anchor"] = _anchor(hz["anchor"])

        req = d.get("requests") or {}
        if "cities" in req:
            p = Path(req["cities"])
            kw["cities_path"] = p if p.is_absolute() or base_dir is None else base_dir / p
        kw["synthetic"] = bool(req.get("synthetic", False))
        kw["request_count"] = int(req.get("count", 100))
        kw["inline_requests"] = list(req.get("inline", []))

        c = d.get("constraints") or {}
        if "look_angle_deg" in c:
            kw["look_angle"] = _pair(c["look_angle_deg"], "look_angle_deg")
        if c.get("local_time_h") is not None:
            kw["local_time"] = _pair(c["local_time_h"], "local_time_h")

        ag = d.get("agility") or {}
        kw["agility"] = AgilityModel(float(ag.get("slew_rate_deg_s", 1.0)), float(ag.get("settle_s", 15.0)))

        se = dict(d.get("search") or {})
        kw["workers"] = int(se.pop("workers", 1))
        kw["search"] = SearchParams(**{k: float(v) for k, v in se.items()})

        if "solvers" in d:
            kw["solvers"] = tuple(SolverSpec.parse(s) for s in d["solvers"])
        so = d.get("solver") or {}
        kw["population_size"] = int(so.get("population_size", 8))
        kw["max_unsuccessful"] = int(so.get("max_unsuccessful", 100))
    except InvalidInputError:
        raise
    except (TypeError, ValueError, KeyError) as err:
        raise InvalidInputError(f"bad scenario: {err}") from err
    return Scenario(**kw)


def load_yaml(path) -> Any:
    p = Path(path)
    try:
        return yaml.safe_load(p.read_text())
    except OSError as err:
        raise InvalidInputError(f"cannot read {p}: {err}") from err
    except yaml.YAMLError as err:
        raise InvalidInputError(f"{p}: invalid YAML: {err}") from err


def load_scenario(path) -> Scenario:
    return scenario_from_dict(load_yaml(path), Path(path).parent)


def load_suite(path) -> list[Scenario]:
    """A suite is ``{defaults: {...}, scenarios: [{...}, ...]}``; each scenario overlays the defaults."""
    d = load_yaml(path)
    if not isinstance(d, dict) or not isinstance(d.get("scenarios"), list):
        raise InvalidInputError("suite needs a 'scenarios' list")
    defaults = d.get("defaults") or {}
    base = Path(path).parent
    return [scenario_from_dict(_merge(defaults, s), base) for s in d["scenarios"]]


def _merge(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, v in (b or {}).items():
        out[k] = _merge(out[k], v) if isinstance(v, dict) and isinstance(out.get(k), dict) else v
    return out
