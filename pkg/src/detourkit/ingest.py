"""Probe-trip and count-station file ingestion.

Trips file: UTF-8 CSV with header ``trip_id,timestamp,lat,lon,vehicle_class``,
timestamps ISO-8601 UTC.  Counts file: header
``station_id,timestamp,class[,weight_lb,speed_mph,...]``; unknown extra
columns are carried through opaquely.  Parsing never filters; class
filtering happens at aggregation time with an explicit class-code set.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone
from zoneinfo import ZoneInfo

DEFAULT_TZ = "America/New_York"

VEHICLE_CLASSES = ("cmv", "other")

# FHWA scheme F classes 4..13: buses and trucks, i.e. everything a weigh
# station cares about.  Classes 1..3 are motorcycles and passenger cars.
CMV_CLASSES = frozenset(range(4, 14))


class IngestError(Exception):
    """Malformed trips or counts input."""


class UnknownStationError(IngestError):
    """Station id absent from a counts corpus."""


@dataclass(frozen=True)
class Waypoint:
    t: datetime
    lat: float
    lon: float


@dataclass
class Trip:
    trip_id: str
    vehicle_class: str
    waypoints: list[Waypoint]


@dataclass
class CountRecord:
    station_id: str
    t: datetime
    vehicle_class: int
    extra: dict[str, str] = field(default_factory=dict)


@dataclass
class DailyCountSeries:
    station_id: str
    timezone: str
    days: list[tuple[date, int]]


def parse_timestamp(text: str) -> datetime:
    """ISO-8601 timestamp to an aware UTC datetime."""
    try:
        t = datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError as e:
        raise IngestError(f"bad timestamp {text!r}: {e}") from None
    if t.tzinfo is None:
        t = t.replace(tzinfo=timezone.utc)
    return t.astimezone(timezone.utc)


def format_timestamp(t: datetime) -> str:
    """Inverse of parse_timestamp; drops an all-zero fractional part."""
    t = t.astimezone(timezone.utc)
    if t.microsecond:
        return t.strftime("%Y-%m-%dT%H:%M:%S.%f") + "Z"
    return t.strftime("%Y-%m-%dT%H:%M:%S") + "Z"


# -- trips ------------------------------------------------------------------

_TRIP_COLUMNS = ["trip_id", "timestamp", "lat", "lon", "vehicle_class"]


def parse_trips(path) -> list[Trip]:
    """Read a trips file; waypoints grouped per trip_id, time-sorted.

    Rows that are exact duplicates of an earlier row of the same trip are
    dropped; distinct rows sharing a timestamp within a trip are an error
    (ordering would be ambiguous).  Trips are returned in order of first
    appearance in the file.
    """
    by_trip: dict[str, Trip] = {}
    rows_seen: dict[str, set[tuple]] = {}
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            return []
        missing = [c for c in _TRIP_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise IngestError(f"trips file missing columns: {', '.join(missing)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                tid = row["trip_id"]
                wp = Waypoint(parse_timestamp(row["timestamp"]), float(row["lat"]), float(row["lon"]))
                vclass = row["vehicle_class"]
            except (TypeError, ValueError, KeyError) as e:
                raise IngestError(f"trips row {lineno}: {e}") from None
            if not tid:
                raise IngestError(f"trips row {lineno}: empty trip_id")
            if not (-90.0 <= wp.lat <= 90.0 and -180.0 <= wp.lon <= 180.0):
                raise IngestError(f"trips row {lineno}: coordinates out of range")
            if vclass not in VEHICLE_CLASSES:
                raise IngestError(f"trips row {lineno}: unknown vehicle_class {vclass!r}")
            key = (wp.t, wp.lat, wp.lon, vclass)
            seen = rows_seen.setdefault(tid, set())
            if key in seen:
                continue
            seen.add(key)
            trip = by_trip.get(tid)
            if trip is None:
                by_trip[tid] = Trip(trip_id=tid, vehicle_class=vclass, waypoints=[wp])
            else:
                trip.waypoints.append(wp)
    for trip in by_trip.values():
        trip.waypoints.sort(key=lambda w: w.t)
        for a, b in zip(trip.waypoints[:-1], trip.waypoints[1:]):
            if a.t == b.t:
                raise IngestError(
                    f"trip {trip.trip_id!r} has distinct waypoints at the same timestamp {format_timestamp(a.t)}"
                )
    return list(by_trip.values())


def write_trips(trips: list[Trip], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(_TRIP_COLUMNS)
        for trip in trips:
            for wp in trip.waypoints:
                w.writerow([trip.trip_id, format_timestamp(wp.t), f"{wp.lat:.7f}", f"{wp.lon:.7f}", trip.vehicle_class])


# -- counts -----------------------------------------------------------------

_COUNT_COLUMNS = ["station_id", "timestamp", "class"]


def parse_counts(path) -> list[CountRecord]:
    """Read a counts file into records, extra columns kept as strings."""
    out: list[CountRecord] = []
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            return []
        missing = [c for c in _COUNT_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise IngestError(f"counts file missing columns: {', '.join(missing)}")
        extras = [c for c in reader.fieldnames if c not in _COUNT_COLUMNS]
        for lineno, row in enumerate(reader, start=2):
            try:
                rec = CountRecord(
                    station_id=row["station_id"],
                    t=parse_timestamp(row["timestamp"]),
                    vehicle_class=int(row["class"]),
                    extra={c: row[c] for c in extras if row.get(c) not in (None, "")},
                )
            except (TypeError, ValueError) as e:
                raise IngestError(f"counts row {lineno}: {e}") from None
            if not rec.station_id:
                raise IngestError(f"counts row {lineno}: empty station_id")
            out.append(rec)
    return out


def write_counts(records: list[CountRecord], path) -> None:
    extras: list[str] = []
    for rec in records:
        for k in rec.extra:
            if k not in extras:
                extras.append(k)
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(_COUNT_COLUMNS + extras)
        for rec in records:
            row = [rec.station_id, format_timestamp(rec.t), str(rec.vehicle_class)]
            row += [rec.extra.get(k, "") for k in extras]
            w.writerow(row)


def daily_aggregate(records: list[CountRecord], cmv_classes: set[int], tz: str = DEFAULT_TZ) -> DailyCountSeries:
    """Daily counts of matching-class records, by local calendar day.

    The series spans min..max local date of the filtered records with
    zero-count days filled in, so gaps are explicit rather than missing.
    """
    if not records:
        raise IngestError("daily_aggregate needs at least one record")
    stations = {r.station_id for r in records}
    if len(stations) > 1:
        raise IngestError(f"daily_aggregate got mixed station ids: {sorted(stations)}")
    zone = ZoneInfo(tz)
    tally: dict[date, int] = {}
    for rec in records:
        if rec.vehicle_class in cmv_classes:
            d = rec.t.astimezone(zone).date()
            tally[d] = tally.get(d, 0) + 1
    days: list[tuple[date, int]] = []
    if tally:
        d = min(tally)
        last = max(tally)
        while d <= last:
            days.append((d, tally.get(d, 0)))
            d += timedelta(days=1)
    return DailyCountSeries(station_id=next(iter(stations)), timezone=tz, days=days)
