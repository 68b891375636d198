"""Synthetic networks, demand, and probe trips with known ground truth.

Everything here is deterministic given a seed.  Per-trip randomness comes
from `numpy.random.default_rng` seeded with (seed, od index, day, trip index)
tuples, so generation order never changes results and trips could be drawn
in parallel.  Canonical corpus order is (departure time, trip_id).

Three hand-built corridor scenarios reproduce the structure of the study
cases end to end (weigh-station avoidance, a two-gate travel-time corridor,
and a period-over-period comparison); grid fixtures support matcher and
performance testing at arbitrary scale.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from datetime import date, datetime, time, timedelta, timezone
from pathlib import Path
from zoneinfo import ZoneInfo

import numpy as np

from .geo import METERS_PER_DEG
from .ingest import (
    CMV_CLASSES,
    DEFAULT_TZ,
    CountRecord,
    DailyCountSeries,
    Trip,
    Waypoint,
    format_timestamp,
    parse_timestamp,
    write_counts,
    write_trips,
)
from .network import RoadNetwork, load_network, network_from_geojson

CMV_CLASS_CODE = 9  # emitted class code for generated trucks

DETOUR_MODELS = ("none", "enforcement_hours", "ramp_control", "closure")


class SynthError(Exception):
    """Invalid scenario specification or unreachable demand."""


class UnknownScenarioError(SynthError):
    """Scenario name not in the bundled registry."""


# -- coordinate frame and network builders ----------------------------------


class _Frame:
    """Local meter offsets -> WGS84, anchored at an origin latitude."""

    def __init__(self, origin: tuple[float, float]):
        self.lat0, self.lon0 = origin
        self.coslat = math.cos(math.radians(self.lat0))

    def lonlat(self, x_m: float, y_m: float) -> tuple[float, float]:
        lon = self.lon0 + x_m / (METERS_PER_DEG * self.coslat)
        lat = self.lat0 + y_m / METERS_PER_DEG
        return lon, lat


class NetBuilder:
    """Assemble a network interchange document node by node, road by road."""

    def __init__(self, origin: tuple[float, float]):
        self.frame = _Frame(origin)
        self.node_xy: dict[str, tuple[float, float]] = {}
        self.features: list[dict] = []

    def node(self, nid: str, x_m: float, y_m: float) -> str:
        lon, lat = self.frame.lonlat(x_m, y_m)
        self.node_xy[nid] = (x_m, y_m)
        self.features.append(
            {
                "type": "Feature",
                "geometry": {"type": "Point", "coordinates": [lon, lat]},
                "properties": {"id": nid},
            }
        )
        return nid

    def road(self, rid: str, nodes: list[str], name: str = "", road_class: str = "other", oneway: bool = False):
        coords = [list(self.frame.lonlat(*self.node_xy[n])) for n in nodes]
        self.features.append(
            {
                "type": "Feature",
                "geometry": {"type": "LineString", "coordinates": coords},
                "properties": {
                    "id": rid,
                    "from": nodes[0],
                    "to": nodes[-1],
                    "name": name,
                    "class": road_class,
                    "oneway": oneway,
                },
            }
        )

    def ring(self, points_xy: list[tuple[float, float]]) -> list[list[float]]:
        """Closed (lon, lat) ring from local meter offsets."""
        ring = [list(self.frame.lonlat(x, y)) for x, y in points_xy]
        if ring[0] != ring[-1]:
            ring.append(list(ring[0]))
        return ring

    def gate_line(self, a_xy: tuple[float, float], b_xy: tuple[float, float]) -> list[list[float]]:
        return [list(self.frame.lonlat(*a_xy)), list(self.frame.lonlat(*b_xy))]

    def geojson(self) -> dict:
        return {"type": "FeatureCollection", "features": list(self.features)}


def grid_network(rows: int, cols: int, spacing_m: float = 500.0, origin: tuple[float, float] = (39.23, -77.27)) -> dict:
    """Bidirectional 4-connected grid; every edge becomes two directed segments."""
    b = NetBuilder(origin)
    for r in range(rows):
        for c in range(cols):
            b.node(f"n{r}-{c}", c * spacing_m, r * spacing_m)
    for r in range(rows):
        for c in range(cols - 1):
            b.road(f"h{r}-{c}", [f"n{r}-{c}", f"n{r}-{c+1}"], road_class="secondary")
    for r in range(rows - 1):
        for c in range(cols):
            b.road(f"v{r}-{c}", [f"n{r}-{c}", f"n{r+1}-{c}"], road_class="secondary")
    return b.geojson()


_FIXTURE_BUILDERS = {
    "grid5x5": lambda: grid_network(5, 5),
    "grid9x9": lambda: grid_network(9, 9),
    "grid36x36": lambda: grid_network(36, 36, spacing_m=300.0),
}


def fixture_network(name: str) -> dict:
    try:
        return _FIXTURE_BUILDERS[name]()
    except KeyError:
        raise SynthError(f"unknown fixture network {name!r}") from None


def resolve_network(ref: str) -> RoadNetwork:
    """A fixture name or a path to an interchange file -> RoadNetwork."""
    if ref in _FIXTURE_BUILDERS:
        return network_from_geojson(fixture_network(ref))
    return load_network(ref)


# -- waypoint emission -------------------------------------------------------


def path_geometry(net: RoadNetwork, seg_ids: list[str]) -> tuple[list[tuple[float, float]], list[float]]:
    """Concatenated (lon, lat) polyline and cumulative chainage for a path."""
    coords: list[tuple[float, float]] = []
    cum: list[float] = []
    base = 0.0
    for sid in seg_ids:
        seg = net.segment(sid)
        start = 0
        if coords and seg.coords[0] == coords[-1]:
            start = 1
        for i in range(start, len(seg.coords)):
            coords.append(seg.coords[i])
            cum.append(base + seg.cum_m[i])
        base += seg.length_m
    return coords, cum


def point_at(coords: list[tuple[float, float]], cum: list[float], chainage: float) -> tuple[float, float]:
    """(lon, lat) at a chainage along a concatenated polyline."""
    if chainage <= 0.0:
        return coords[0]
    if chainage >= cum[-1]:
        return coords[-1]
    i = bisect_right(cum, chainage) - 1
    span = cum[i + 1] - cum[i]
    f = 0.0 if span <= 0 else (chainage - cum[i]) / span
    x1, y1 = coords[i]
    x2, y2 = coords[i + 1]
    return x1 + f * (x2 - x1), y1 + f * (y2 - y1)


def waypoints_along(
    net: RoadNetwork,
    seg_ids: list[str],
    departure: datetime,
    speed_mps: float,
    period_s: float,
    noise_sigma_m: float,
    rng: np.random.Generator,
) -> list[Waypoint]:
    """Constant-speed waypoints along a segment path, with isotropic noise.

    The first waypoint sits exactly at the path start at the departure time
    and the last exactly at the path end; interior points tick every
    period_s seconds.
    """
    coords, cum = path_geometry(net, seg_ids)
    total_s = cum[-1] / speed_mps
    offsets = [k * period_s for k in range(int(total_s / period_s) + 1)]
    if total_s - offsets[-1] > 1e-9:
        offsets.append(total_s)
    noise = rng.normal(0.0, 1.0, size=(len(offsets), 2)) * noise_sigma_m
    out = []
    for j, dt_s in enumerate(offsets):
        lon, lat = point_at(coords, cum, dt_s * speed_mps)
        if noise_sigma_m > 0:
            lat += noise[j, 0] / METERS_PER_DEG
            lon += noise[j, 1] / (METERS_PER_DEG * math.cos(math.radians(lat)))
        out.append(Waypoint(departure + timedelta(seconds=dt_s), lat, lon))
    return out


# -- ground truth ------------------------------------------------------------


@dataclass
class TruthRecord:
    trip_id: str
    path: list[str]
    route_label: str
    detour: bool
    departure: datetime
    emitted: bool  # False when the penetration draw left the trip unobserved


@dataclass
class GroundTruth:
    records: list[TruthRecord] = field(default_factory=list)
    station_daily: dict[str, dict[str, int]] = field(default_factory=dict)  # station -> iso date -> count

    def by_trip(self) -> dict[str, TruthRecord]:
        return {r.trip_id: r for r in self.records}

    def to_json(self) -> dict:
        return {
            "trips": [
                {
                    "trip_id": r.trip_id,
                    "path": r.path,
                    "route_label": r.route_label,
                    "detour": r.detour,
                    "departure": format_timestamp(r.departure),
                    "emitted": r.emitted,
                }
                for r in self.records
            ],
            "station_daily": self.station_daily,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GroundTruth":
        gt = cls()
        for row in obj.get("trips", []):
            gt.records.append(
                TruthRecord(
                    trip_id=row["trip_id"],
                    path=list(row["path"]),
                    route_label=row["route_label"],
                    detour=bool(row["detour"]),
                    departure=parse_timestamp(row["departure"]),
                    emitted=bool(row.get("emitted", True)),
                )
            )
        gt.station_daily = {k: dict(v) for k, v in obj.get("station_daily", {}).items()}
        return gt


# -- scenario specification ---------------------------------------------------


@dataclass
class ScenarioSpec:
    """Declarative demand scenario over a network fixture or file.

    od_pairs entries are (origin node, destination node, trips per day).
    detour_params depend on the model:
      enforcement_hours: windows [[\"08:00\",\"09:00\"], ...], probability,
        alternates [via-node, ...]
      ramp_control: routes [{\"via\": node or null}], periods
        [{\"start\": iso, \"end\": iso, \"speeds\": [mps per route]}]
      closure: segments [...], start iso, end iso
    demand \"fixed\" emits exactly round(trips/day) per day; \"poisson\" draws.
    """

    network: str
    od_pairs: list[tuple[str, str, float]]
    detour_model: str = "none"
    detour_params: dict = field(default_factory=dict)
    penetration: float = 1.0
    noise_sigma_m: float = 5.0
    waypoint_period_s: float = 30.0
    seed: int = 0
    days: int = 1
    start_date: date = date(2026, 7, 20)
    tz: str = DEFAULT_TZ
    depart_window: tuple[str, str] = ("06:00", "20:00")
    weekend_factor: float = 1.0
    speed_mps: float = 15.0
    demand: str = "poisson"
    stations: list[tuple[str, str]] = field(default_factory=list)  # (station_id, segment_id)

    def validate(self) -> None:
        if self.detour_model not in DETOUR_MODELS:
            raise SynthError(f"unknown detour model {self.detour_model!r}")
        if not (0.0 < self.penetration <= 1.0):
            raise SynthError("penetration must be in (0, 1]")
        if self.noise_sigma_m < 0 or self.waypoint_period_s <= 0:
            raise SynthError("noise must be >= 0 and waypoint period positive")
        if self.days < 1 or not self.od_pairs:
            raise SynthError("need at least one day and one od pair")
        if self.demand not in ("poisson", "fixed"):
            raise SynthError(f"unknown demand model {self.demand!r}")
        p = self.detour_params
        if self.detour_model == "enforcement_hours":
            prob = p.get("probability", 0.0)
            if not (0.0 <= prob <= 1.0):
                raise SynthError("avoidance probability must be in [0, 1]")
            if prob > 0 and not p.get("alternates"):
                raise SynthError("enforcement_hours with nonzero probability needs alternates")

    @classmethod
    def from_json(cls, obj: dict) -> "ScenarioSpec":
        kw = dict(obj)
        if "od_pairs" in kw:
            kw["od_pairs"] = [tuple(x) for x in kw["od_pairs"]]
        if "stations" in kw:
            kw["stations"] = [tuple(x) for x in kw["stations"]]
        if "start_date" in kw:
            kw["start_date"] = date.fromisoformat(kw["start_date"])
        if "depart_window" in kw:
            kw["depart_window"] = tuple(kw["depart_window"])
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(kw) - known
        if unknown:
            raise SynthError(f"unknown scenario fields: {sorted(unknown)}")
        return cls(**kw)


@dataclass
class ScenarioResult:
    trips: list[Trip]  # emitted probes only, canonical order
    truth: GroundTruth  # full population
    counts: list[CountRecord]  # full-population station records


def _parse_hhmm(s: str) -> time:
    h, m = s.split(":")
    return time(int(h), int(m))


def _local_dt(d: date, t: time, zone: ZoneInfo) -> datetime:
    return datetime.combine(d, t, tzinfo=zone).astimezone(timezone.utc)


def _in_daily_windows(t_utc: datetime, windows: list[tuple[str, str]], zone: ZoneInfo) -> bool:
    loc = t_utc.astimezone(zone)
    for a, b in windows:
        if _parse_hhmm(a) <= loc.time() < _parse_hhmm(b):
            return True
    return False


def generate(spec: ScenarioSpec) -> ScenarioResult:
    """Draw a full synthetic population and emit the probe subset."""
    spec.validate()
    net = resolve_network(spec.network)
    zone = ZoneInfo(spec.tz)
    w_start = _parse_hhmm(spec.depart_window[0])
    w_end = _parse_hhmm(spec.depart_window[1])
    window_s = (w_end.hour * 3600 + w_end.minute * 60) - (w_start.hour * 3600 + w_start.minute * 60)
    if window_s <= 0:
        raise SynthError("departure window must have positive length")

    base_paths: dict[int, list[str]] = {}
    for i, (o, d, _) in enumerate(spec.od_pairs):
        path = net.node_path(o, d)
        if path is None:
            raise SynthError(f"od pair {o!r} -> {d!r} is unreachable")
        base_paths[i] = path

    model = spec.detour_model
    p = spec.detour_params
    closure_paths: dict[int, list[str]] = {}
    if model == "closure":
        banned = frozenset(p.get("segments", []))
        for i, (o, d, _) in enumerate(spec.od_pairs):
            alt = net.node_path(o, d, banned=banned)
            if alt is None:
                raise SynthError(f"no route for {o!r} -> {d!r} avoiding closed segments")
            closure_paths[i] = alt
        closure_start = parse_timestamp(p["start"])
        closure_end = parse_timestamp(p["end"])
    ramp_routes: list[list[str]] = []
    if model == "ramp_control":
        if len(spec.od_pairs) != 1:
            raise SynthError("ramp_control expects a single od pair")
        o, d, _ = spec.od_pairs[0]
        for r in p.get("routes", []):
            via = r.get("via")
            path = net.node_path(o, d) if via is None else _path_via(net, o, via, d)
            if path is None:
                raise SynthError(f"ramp_control route via {via!r} is unreachable")
            ramp_routes.append(path)
        if not ramp_routes:
            raise SynthError("ramp_control needs at least one route")

    entries = []  # (departure, trip_id, path, label, detour, emitted, rng)
    for od_i, (o, d, per_day) in enumerate(spec.od_pairs):
        for day_i in range(spec.days):
            day = spec.start_date + timedelta(days=day_i)
            factor = spec.weekend_factor if day.weekday() >= 5 else 1.0
            lam = per_day * factor
            day_rng = np.random.default_rng((spec.seed, od_i, day_i))
            n = int(round(lam)) if spec.demand == "fixed" else int(day_rng.poisson(lam))
            for j in range(n):
                rng = np.random.default_rng((spec.seed, od_i, day_i, j))
                dep_s = float(rng.uniform(0, window_s))
                dep = _local_dt(day, w_start, zone) + timedelta(seconds=dep_s)
                path = base_paths[od_i]
                label = f"{o}->{d}"
                detour = False
                if model == "enforcement_hours":
                    windows = [tuple(w) for w in p.get("windows", [])]
                    if windows and _in_daily_windows(dep, windows, zone) and rng.random() < p.get("probability", 0.0):
                        vias = p.get("alternates", [])
                        via = vias[int(rng.integers(len(vias)))]
                        alt = _path_via(net, o, via, d)
                        if alt is None:
                            raise SynthError(f"alternate via {via!r} unreachable for {o!r} -> {d!r}")
                        path = alt
                        label = f"{o}->{d} via {via}"
                        detour = True
                elif model == "ramp_control":
                    period = _ramp_period(p.get("periods", []), dep)
                    if period is not None:
                        speeds = period["speeds"]
                        times = [net.path_length_m(r) / speeds[k] for k, r in enumerate(ramp_routes)]
                        k = min(range(len(times)), key=lambda i_: (times[i_], i_))
                        path = ramp_routes[k]
                        label = f"{o}->{d} route {k}"
                        detour = k != 0
                elif model == "closure":
                    if closure_start <= dep < closure_end:
                        path = closure_paths[od_i]
                        label = f"{o}->{d} closure"
                        detour = path != base_paths[od_i]
                emitted = bool(rng.random() < spec.penetration)
                trip_id = f"t{od_i:02d}-{day_i:03d}-{j:04d}"
                entries.append((dep, trip_id, path, label, detour, emitted, rng))

    entries.sort(key=lambda e: (e[0], e[1]))
    return _emit(net, spec, entries, zone)


def _path_via(net: RoadNetwork, o: str, via: str, d: str) -> list[str] | None:
    a = net.node_path(o, via)
    b = net.node_path(via, d)
    if a is None or b is None:
        return None
    return a + b


def _ramp_period(periods: list[dict], dep: datetime) -> dict | None:
    for per in periods:
        if parse_timestamp(per["start"]) <= dep < parse_timestamp(per["end"]):
            return per
    return None


def _emit(net: RoadNetwork, spec: ScenarioSpec, entries, zone: ZoneInfo) -> ScenarioResult:
    """Waypoint emission, station bookkeeping, and canonical ordering."""
    truth = GroundTruth()
    trips: list[Trip] = []
    counts: list[CountRecord] = []
    station_daily: dict[str, dict[str, int]] = {sid: {} for sid, _ in spec.stations}
    station_segs = list(spec.stations)

    for dep, trip_id, path, label, detour, emitted, rng in entries:
        speed = spec.speed_mps * float(rng.uniform(0.85, 1.15))
        truth.records.append(TruthRecord(trip_id, list(path), label, detour, dep, emitted))
        length_before: dict[str, float] = {}
        acc = 0.0
        for sid in path:
            length_before[sid] = acc
            acc += net.segment(sid).length_m
        for station_id, seg_id in station_segs:
            if seg_id in length_before:
                t_pass = dep + timedelta(seconds=length_before[seg_id] / speed)
                counts.append(CountRecord(station_id, t_pass, CMV_CLASS_CODE))
                key = t_pass.astimezone(zone).date().isoformat()
                daily = station_daily[station_id]
                daily[key] = daily.get(key, 0) + 1
        if emitted:
            wps = waypoints_along(net, path, dep, speed, spec.waypoint_period_s, spec.noise_sigma_m, rng)
            trips.append(Trip(trip_id=trip_id, vehicle_class="cmv", waypoints=wps))

    truth.station_daily = station_daily
    counts.sort(key=lambda r: (r.t, r.station_id))
    return ScenarioResult(trips=trips, truth=truth, counts=counts)


# -- degradation --------------------------------------------------------------


def degrade(trips: list[Trip], drop_rate: float, seed: int) -> list[Trip]:
    """Drop interior waypoints independently with probability drop_rate.

    First and last waypoints always survive, so trip extent is preserved.
    """
    if not (0.0 <= drop_rate < 1.0):
        raise SynthError("drop_rate must be in [0, 1)")
    out = []
    for idx, trip in enumerate(trips):
        if drop_rate == 0.0 or len(trip.waypoints) <= 2:
            out.append(Trip(trip.trip_id, trip.vehicle_class, list(trip.waypoints)))
            continue
        rng = np.random.default_rng((seed, idx))
        keep_mask = rng.random(len(trip.waypoints) - 2) >= drop_rate
        kept = [trip.waypoints[0]]
        kept += [w for w, k in zip(trip.waypoints[1:-1], keep_mask) if k]
        kept.append(trip.waypoints[-1])
        out.append(Trip(trip.trip_id, trip.vehicle_class, kept))
    return out


# -- direct station-count simulation (validation at scale) --------------------


def simulate_station_year(
    seed: int,
    weeks: int = 52,
    weekday_mu: float = 180.0,
    weekend_factor: float = 0.4,
    penetration: float = 0.1,
    start: date = date(2025, 1, 6),
    tz: str = DEFAULT_TZ,
    station_id: str = "vws-1",
) -> tuple[DailyCountSeries, DailyCountSeries]:
    """Paired (truth, probe) daily series: Poisson demand, binomial sampling.

    The start date should be a Monday for clean week alignment.  Weekend
    truth is suppressed by weekend_factor, mirroring real CMV patterns.
    """
    rng = np.random.default_rng(seed)
    truth_days = []
    probe_days = []
    for i in range(weeks * 7):
        d = start + timedelta(days=i)
        mu = weekday_mu * (weekend_factor if d.weekday() >= 5 else 1.0)
        n_true = int(rng.poisson(mu))
        n_probe = int(rng.binomial(n_true, penetration)) if n_true > 0 else 0
        truth_days.append((d, n_true))
        probe_days.append((d, n_probe))
    return (
        DailyCountSeries(station_id=station_id, timezone=tz, days=truth_days),
        DailyCountSeries(station_id=station_id, timezone=tz, days=probe_days),
    )


# -- hand-built corridor scenarios --------------------------------------------


@dataclass
class FixtureBundle:
    """A ready-to-run scenario: network, probe corpus, truth, query documents."""

    name: str
    network: dict
    trips: list[Trip]
    truth: GroundTruth
    counts: list[CountRecord]
    queries: dict[str, dict]
    expected: dict


def _query_doc(
    b: NetBuilder,
    gates: list[tuple[str, tuple[float, float], tuple[float, float]]],
    area_xy: list[tuple[float, float]],
    window_utc: tuple[datetime, datetime],
    tz: str,
    active_hours: list[int] | None = None,
) -> dict:
    doc = {
        "study_area": {"polygon": b.ring(area_xy)},
        "gates": [
            {"gate_id": gid, "line": b.gate_line(a, c), "positive_direction": "left_to_right"}
            for gid, a, c in gates
        ],
        "gate_sequence": [{"gate": gid, "sign": 1} for gid, _, _ in gates],
        "time_window": {"start": format_timestamp(window_utc[0]), "end": format_timestamp(window_utc[1])},
        "require_order": True,
        "tz": tz,
        "theta": 0.9,
    }
    if active_hours is not None:
        doc["active_hours"] = active_hours
    return doc


def _emit_fixture_trips(net, plans, period_s, sigma, seed):
    """plans: list of (departure utc, path, label, detour flag, speed or None).

    Returns canonical-order trips plus truth records; penetration is 1.
    Departures within one scenario are unique, so ordering by departure
    alone is already total.
    """
    trips = []
    truth = GroundTruth()
    for i, (dep, path, label, detour, speed) in enumerate(sorted(plans, key=lambda e: e[0])):
        trip_id = f"t{i+1:04d}"
        rng = np.random.default_rng((seed, i))
        v = speed if speed is not None else float(rng.uniform(13.0, 17.0))
        wps = waypoints_along(net, path, dep, v, period_s, sigma, rng)
        trips.append(Trip(trip_id=trip_id, vehicle_class="cmv", waypoints=wps))
        truth.records.append(TruthRecord(trip_id, list(path), label, detour, dep, True))
    return trips, truth


def scenario_weigh_station(seed: int = 7) -> FixtureBundle:
    """Freeway corridor with a weigh station and four local bypass roads.

    585 southbound trips on six routes: 552 stay on the freeway outside
    enforcement hours; during the two active hours 21 pull through the
    station and 12 avoid it on local roads (the 12-of-33 pattern).
    """
    zone = ZoneInfo(DEFAULT_TZ)
    day = date(2026, 7, 21)
    b = NetBuilder((39.295, -77.40))
    b.node("S", 0, 0)
    b.node("J1", 0, -400)
    b.node("M1", 0, -4400)
    b.node("J2", 0, -8400)
    b.node("E", 0, -8800)
    b.node("T1", 300, -1400)
    b.node("T2", 300, -7400)
    alts = {
        "md27": (600, "Ridge Road, MD-27"),
        "md28": (-600, "Dickerson Road, MD-28"),
        "md355": (1200, "Frederick Road, MD-355"),
        "md109": (-1200, "Old Hundred Road, MD-109"),
    }
    for key, (x, _) in alts.items():
        b.node(f"{key}a", x, -1400)
        b.node(f"{key}b", x, -7400)

    mainline = "Eisenhower Memorial Highway, I-270"
    b.road("i270-n", ["S", "J1"], name=mainline, road_class="motorway", oneway=True)
    b.road("i270-1", ["J1", "M1"], name=mainline, road_class="motorway", oneway=True)
    b.road("i270-2", ["M1", "J2"], name=mainline, road_class="motorway", oneway=True)
    b.road("i270-s", ["J2", "E"], name=mainline, road_class="motorway", oneway=True)
    twis = "Hyattstown South TWIS"
    b.road("twis-in", ["J1", "T1"], name=twis, road_class="ramp", oneway=True)
    b.road("twis-mid", ["T1", "T2"], name=twis, road_class="ramp", oneway=True)
    b.road("twis-out", ["T2", "J2"], name=twis, road_class="ramp", oneway=True)
    for key, (_, name) in alts.items():
        b.road(f"{key}-in", ["J1", f"{key}a"], name=name, road_class="secondary", oneway=True)
        b.road(f"{key}-mid", [f"{key}a", f"{key}b"], name=name, road_class="secondary", oneway=True)
        b.road(f"{key}-out", [f"{key}b", "J2"], name=name, road_class="secondary", oneway=True)

    routes = {
        "mainline": ["i270-n", "i270-1", "i270-2", "i270-s"],
        "twis": ["i270-n", "twis-in", "twis-mid", "twis-out", "i270-s"],
        "md27": ["i270-n", "md27-in", "md27-mid", "md27-out", "i270-s"],
        "md28": ["i270-n", "md28-in", "md28-mid", "md28-out", "i270-s"],
        "md355": ["i270-n", "md355-in", "md355-mid", "md355-out", "i270-s"],
        "md109": ["i270-n", "md109-in", "md109-mid", "md109-out", "i270-s"],
    }
    labels = {
        "mainline": mainline,
        "twis": twis,
        "md27": alts["md27"][1],
        "md28": alts["md28"][1],
        "md355": alts["md355"][1],
        "md109": alts["md109"][1],
    }

    def at(hh: int, mm: int, ss: int = 0) -> datetime:
        return _local_dt(day, time(hh, mm, ss), zone)

    plans = []
    # 552 freeway trips evenly over three off-enforcement bands
    bands = [(at(5, 10), at(7, 50)), (at(9, 10), at(14, 50)), (at(16, 10), at(21, 50))]
    band_s = sum((e - s).total_seconds() for s, e in bands)
    step = band_s / 552
    for i in range(552):
        virt = (i + 0.5) * step
        for s, e in bands:
            span = (e - s).total_seconds()
            if virt < span:
                dep = s + timedelta(seconds=virt)
                break
            virt -= span
        plans.append((dep, routes["mainline"], labels["mainline"], False, None))
    # enforcement-hour trips: 21 through the station, 12 avoiding it
    twis_deps = [at(8, 5 + 4 * k) for k in range(11)] + [at(15, 5 + 4 * k) for k in range(10)]
    for dep in twis_deps:
        plans.append((dep, routes["twis"], labels["twis"], False, None))
    avoid_deps = {
        "md27": [at(8, 7), at(8, 23), at(8, 39), at(15, 7), at(15, 23)],
        "md28": [at(8, 11), at(8, 27), at(15, 11)],
        "md355": [at(8, 15), at(15, 15), at(15, 31)],
        "md109": [at(15, 19)],
    }
    for key, deps in avoid_deps.items():
        for dep in deps:
            plans.append((dep, routes[key], labels[key], True, None))

    net = network_from_geojson(b.geojson())
    trips, truth = _emit_fixture_trips(net, [(d, p, l, det, sp) for d, p, l, det, sp in plans], 20.0, 2.0, seed)

    counts = []
    by_day: dict[str, int] = {}
    for rec in truth.records:
        pass_t = rec.departure + timedelta(seconds=8600 / 15.0)
        counts.append(CountRecord("vws-hyattstown", pass_t, CMV_CLASS_CODE))
        key = pass_t.astimezone(zone).date().isoformat()
        by_day[key] = by_day.get(key, 0) + 1
    counts.sort(key=lambda r: (r.t, r.station_id))
    truth.station_daily = {"vws-hyattstown": by_day}

    query = _query_doc(
        b,
        gates=[("gate-up", (-120, -200), (120, -200)), ("gate-down", (-120, -8600), (120, -8600))],
        area_xy=[(-1700, 300), (1700, 300), (1700, -9100), (-1700, -9100)],
        window_utc=(_local_dt(day, time(0, 0), zone), _local_dt(day + timedelta(days=1), time(0, 0), zone)),
        tz=DEFAULT_TZ,
        active_hours=[8, 15],
    )
    expected = {
        "route_counts": {
            labels["mainline"]: 552,
            labels["twis"]: 21,
            labels["md27"]: 5,
            labels["md28"]: 3,
            labels["md355"]: 3,
            labels["md109"]: 1,
        },
        "shares_display": ["94%", "4%", "0.9%", "0.5%", "0.5%", "0.2%"],
        "total": 585,
        "active_window_trips": 33,
        "off_primary_in_window": 12,
        "avoid_share_display": "36%",
    }
    return FixtureBundle("weigh_station", b.geojson(), trips, truth, counts, {"main": query}, expected)


def scenario_bridge_times(seed: int = 7) -> FixtureBundle:
    """Two-gate eastbound corridor with three routes and pinned travel times.

    Per-trip speeds are chosen so gate-to-gate durations hit exact minute
    targets; baseline and control days differ only in those durations.
    """
    zone = ZoneInfo(DEFAULT_TZ)
    b = NetBuilder((38.97, -76.50))
    b.node("S", 0, 0)
    b.node("J1", 400, 0)
    b.node("M", 6400, 0)
    b.node("J2", 12400, 0)
    b.node("E", 12800, 0)
    b.node("K1", 1400, -600)
    b.node("K2", 11400, -600)
    b.node("C1", 1400, 600)
    b.node("C2", 11400, 600)
    us50 = "EB US-50"
    b.road("us50-w", ["S", "J1"], name=us50, road_class="motorway", oneway=True)
    b.road("us50-1", ["J1", "M"], name=us50, road_class="motorway", oneway=True)
    b.road("us50-2", ["M", "J2"], name=us50, road_class="motorway", oneway=True)
    b.road("us50-e", ["J2", "E"], name=us50, road_class="motorway", oneway=True)
    skid = "EB Skidmore Road"
    b.road("skid-in", ["J1", "K1"], name=skid, road_class="secondary", oneway=True)
    b.road("skid-mid", ["K1", "K2"], name=skid, road_class="secondary", oneway=True)
    b.road("skid-out", ["K2", "J2"], name=skid, road_class="secondary", oneway=True)
    coll = "EB College Pkwy"
    b.road("coll-in", ["J1", "C1"], name=coll, road_class="secondary", oneway=True)
    b.road("coll-mid", ["C1", "C2"], name=coll, road_class="secondary", oneway=True)
    b.road("coll-out", ["C2", "J2"], name=coll, road_class="secondary", oneway=True)

    routes = {
        "us50": ["us50-w", "us50-1", "us50-2", "us50-e"],
        "skid": ["us50-w", "skid-in", "skid-mid", "skid-out", "us50-e"],
        "coll": ["us50-w", "coll-in", "coll-mid", "coll-out", "us50-e"],
    }
    labels = {"us50": us50, "skid": skid, "coll": coll}
    net = network_from_geojson(b.geojson())
    # gate chainages along each route: gates sit 200 m into the entry stub
    # and 200 m before the exit-stub end
    gate_gap = {k: net.path_length_m(p) - 400.0 for k, p in routes.items()}

    baseline = date(2026, 7, 30)
    control = date(2026, 8, 6)
    schedule = {
        baseline: {
            "us50": [(time(13, 5), 40), (time(13, 20), 41), (time(13, 35), 42), (time(13, 50), 42), (time(14, 5), 43), (time(14, 20), 44)],
            "skid": [(time(13, 10), 15), (time(14, 10), 17)],
            "coll": [(time(13, 15), 14)],
        },
        control: {
            "us50": [(time(13, 5), 24), (time(13, 20), 25), (time(13, 35), 25), (time(13, 50), 25), (time(14, 5), 25), (time(14, 20), 26)],
            "skid": [(time(13, 10), 21), (time(14, 10), 23)],
        },
    }
    plans = []
    for day, by_route in schedule.items():
        for key, rows in by_route.items():
            for t0, minutes in rows:
                dep = _local_dt(day, t0, zone)
                speed = gate_gap[key] / (minutes * 60.0)
                plans.append((dep, routes[key], labels[key], key != "us50", speed))

    trips, truth = _emit_fixture_trips(net, plans, 20.0, 2.0, seed)

    def q(day: date) -> dict:
        return _query_doc(
            b,
            gates=[("gate-west", (200, -150), (200, 150)), ("gate-east", (12600, -150), (12600, 150))],
            area_xy=[(-200, 900), (13000, 900), (13000, -900), (-200, -900)],
            window_utc=(_local_dt(day, time(13, 0), zone), _local_dt(day, time(15, 0), zone)),
            tz=DEFAULT_TZ,
        )

    expected = {
        "baseline": {us50: (6, 42.0), skid: (2, 16.0), coll: (1, 14.0)},
        "control": {us50: (6, 25.0), skid: (2, 22.0)},
    }
    return FixtureBundle(
        "bridge_times", b.geojson(), trips, truth, [], {"baseline": q(baseline), "control": q(control)}, expected
    )


def scenario_closure_compare(seed: int = 7) -> FixtureBundle:
    """Two parallel freeways plus a reliever, before/after a closure week.

    Period A splits 31/14/5 over I-95 / US-50 / MD-295; period B splits
    18/22/10, giving share deltas of -26 pp and +16 pp on the named pair.
    """
    zone = ZoneInfo(DEFAULT_TZ)
    b = NetBuilder((39.10, -76.85))
    b.node("S", 0, 0)
    b.node("J1", 400, 0)
    b.node("I1", 7400, 0)
    b.node("J2", 14400, 0)
    b.node("E", 14800, 0)
    b.node("U1", 2400, -900)
    b.node("U2", 12400, -900)
    b.node("N1", 2400, 900)
    b.node("N2", 12400, 900)
    i95 = "I-95"
    b.road("i95-w", ["S", "J1"], name=i95, road_class="motorway", oneway=True)
    b.road("i95-1", ["J1", "I1"], name=i95, road_class="motorway", oneway=True)
    b.road("i95-2", ["I1", "J2"], name=i95, road_class="motorway", oneway=True)
    b.road("i95-e", ["J2", "E"], name=i95, road_class="motorway", oneway=True)
    us50 = "US-50"
    b.road("us50-in", ["J1", "U1"], name=us50, road_class="trunk", oneway=True)
    b.road("us50-mid", ["U1", "U2"], name=us50, road_class="trunk", oneway=True)
    b.road("us50-out", ["U2", "J2"], name=us50, road_class="trunk", oneway=True)
    md295 = "MD-295"
    b.road("md295-in", ["J1", "N1"], name=md295, road_class="primary", oneway=True)
    b.road("md295-mid", ["N1", "N2"], name=md295, road_class="primary", oneway=True)
    b.road("md295-out", ["N2", "J2"], name=md295, road_class="primary", oneway=True)

    routes = {
        "i95": ["i95-w", "i95-1", "i95-2", "i95-e"],
        "us50": ["i95-w", "us50-in", "us50-mid", "us50-out", "i95-e"],
        "md295": ["i95-w", "md295-in", "md295-mid", "md295-out", "i95-e"],
    }
    labels = {"i95": i95, "us50": us50, "md295": md295}
    period_a = date(2026, 8, 3)
    period_b = date(2026, 8, 10)
    mix = {
        period_a: [("i95", 31), ("us50", 14), ("md295", 5)],
        period_b: [("i95", 18), ("us50", 22), ("md295", 10)],
    }
    net = network_from_geojson(b.geojson())
    plans = []
    for day, rows in mix.items():
        assignment = [key for key, n in rows for _ in range(n)]
        rng = np.random.default_rng((seed, day.toordinal()))
        rng.shuffle(assignment)
        for i, key in enumerate(assignment):
            dep = _local_dt(day, time(6, 30), zone) + timedelta(seconds=i * 14 * 60)
            plans.append((dep, routes[key], labels[key], key != "i95", None))
    trips, truth = _emit_fixture_trips(net, plans, 20.0, 2.0, seed)

    def q(day: date) -> dict:
        return _query_doc(
            b,
            gates=[("gate-west", (200, -150), (200, 150)), ("gate-east", (14600, -150), (14600, 150))],
            area_xy=[(-200, 1200), (15000, 1200), (15000, -1200), (-200, -1200)],
            window_utc=(_local_dt(day, time(0, 0), zone), _local_dt(day + timedelta(days=1), time(0, 0), zone)),
            tz=DEFAULT_TZ,
        )

    expected = {
        "period_a": {i95: 62.0, us50: 28.0, md295: 10.0},
        "period_b": {i95: 36.0, us50: 44.0, md295: 20.0},
        "deltas": {i95: -26.0, us50: 16.0, md295: 10.0},
    }
    return FixtureBundle(
        "closure_compare", b.geojson(), trips, truth, [], {"period_a": q(period_a), "period_b": q(period_b)}, expected
    )


_SCENARIOS = {
    "weigh_station": scenario_weigh_station,
    "bridge_times": scenario_bridge_times,
    "closure_compare": scenario_closure_compare,
}


def build_scenario(name: str, seed: int = 7) -> FixtureBundle:
    try:
        builder = _SCENARIOS[name]
    except KeyError:
        raise UnknownScenarioError(
            f"unknown scenario {name!r} (have: {', '.join(sorted(_SCENARIOS))})"
        ) from None
    return builder(seed=seed)


def scenario_names() -> list[str]:
    return sorted(_SCENARIOS)


def write_bundle(bundle: FixtureBundle, out_dir) -> dict[str, str]:
    """Write a bundle to disk; returns a name -> path map."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    net_path = out / "network.json"
    net_path.write_text(json.dumps(bundle.network), encoding="utf-8")
    paths["network"] = str(net_path)
    trips_path = out / "trips.csv"
    write_trips(bundle.trips, trips_path)
    paths["trips"] = str(trips_path)
    truth_path = out / "truth.json"
    truth_path.write_text(json.dumps(bundle.truth.to_json(), indent=1), encoding="utf-8")
    paths["truth"] = str(truth_path)
    if bundle.counts:
        counts_path = out / "counts.csv"
        write_counts(bundle.counts, counts_path)
        paths["counts"] = str(counts_path)
    for name, doc in bundle.queries.items():
        qp = out / f"query-{name}.json"
        qp.write_text(json.dumps(doc, indent=1), encoding="utf-8")
        paths[f"query-{name}"] = str(qp)
    return paths
