"""Analyst-defined study areas, directed gates, and trip filtering.

Crossing detection runs on raw waypoint chords in degree space, so it is
independent of map-matching quality.  A gate is a directed polyline; a
chord crossing it left-to-right (relative to the polyline direction) has
geometric sense "left_to_right", and the crossing sign is +1 when that
sense equals the gate's positive_direction.

Duplicate suppression uses half-open parameter ranges: a crossing at the
very end of a chord belongs to the following chord, and one exactly on an
interior gate vertex belongs to the next gate sub-segment.  Both line ends
of the gate itself count (closed-line rule), as do the last chord's
endpoint hits.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime

from .geo import (
    cross_sign,
    point_in_ring,
    polyline_length_m,
    ring_area_deg2,
    ring_is_closed,
    ring_self_intersects,
    segment_intersection,
)
from .ingest import DEFAULT_TZ, Trip, parse_timestamp

DIRECTIONS = ("left_to_right", "right_to_left")


class QueryError(Exception):
    """Malformed query document or invalid gate/study-area definition."""


class UnknownGateError(QueryError):
    """Gate sequence references a gate id that was not defined."""


@dataclass
class Gate:
    gate_id: str
    line: list[tuple[float, float]]  # (lon, lat)
    positive_direction: str = "left_to_right"

    def validate(self) -> None:
        if len(self.line) < 2 or polyline_length_m(self.line) <= 0.0:
            raise QueryError(f"gate {self.gate_id!r} needs a polyline with positive length")
        if self.positive_direction not in DIRECTIONS:
            raise QueryError(f"gate {self.gate_id!r}: positive_direction must be one of {DIRECTIONS}")


@dataclass
class StudyArea:
    polygon: list[tuple[float, float]]  # closed (lon, lat) ring

    def validate(self) -> None:
        if not ring_is_closed(self.polygon):
            raise QueryError("study area ring must be closed (first point repeated last, >= 4 points)")
        if ring_self_intersects(self.polygon):
            raise QueryError("study area ring must not self-intersect")
        if ring_area_deg2(self.polygon) <= 0.0:
            raise QueryError("study area ring must enclose a positive area")

    def contains(self, lat: float, lon: float) -> bool:
        return point_in_ring(lat, lon, self.polygon)


@dataclass(frozen=True)
class GateCrossing:
    trip_id: str
    gate_id: str
    t: datetime
    sign: int


@dataclass
class TripQuery:
    gate_sequence: list[tuple[str, int]]  # (gate id, required sign)
    study_area: StudyArea | None = None
    time_window: tuple[datetime, datetime] | None = None
    require_order: bool = True

    def validate(self, gate_ids) -> None:
        if not self.gate_sequence:
            raise QueryError("gate_sequence must not be empty")
        for gid, sign in self.gate_sequence:
            if gid not in gate_ids:
                raise UnknownGateError(f"gate_sequence references unknown gate {gid!r}")
            if sign not in (1, -1):
                raise QueryError(f"required sign for gate {gid!r} must be +1 or -1")
        if self.time_window is not None and self.time_window[0] >= self.time_window[1]:
            raise QueryError("time_window start must be before end")
        if self.study_area is not None:
            self.study_area.validate()


@dataclass
class QueryDocument:
    """One self-contained analysis request: gates, filter, and options."""

    gates: dict[str, Gate]
    query: TripQuery
    tz: str = DEFAULT_TZ
    theta: float = 0.9
    active_hours: list[int] = field(default_factory=list)


@dataclass
class TripSetEntry:
    trip_id: str
    anchor_t: datetime  # first qualifying crossing; drives windows and hour bins
    times: list[datetime]  # per sequence element; times[0] is the refined start


# -- crossing detection -------------------------------------------------------


def detect_crossings(trip: Trip, gate: Gate) -> list[GateCrossing]:
    """Every signed crossing of the gate by the trip's waypoint chords."""
    wps = trip.waypoints
    out: list[GateCrossing] = []
    line = gate.line
    n_chords = len(wps) - 1
    n_subs = len(line) - 1
    xs = [pt[0] for pt in line]
    ys = [pt[1] for pt in line]
    min_x, max_x = min(xs), max(xs)
    min_y, max_y = min(ys), max(ys)
    for i in range(n_chords):
        p = (wps[i].lon, wps[i].lat)
        q = (wps[i + 1].lon, wps[i + 1].lat)
        # a chord entirely on one outer side of the gate's bbox cannot cross it
        if (
            (p[0] < min_x and q[0] < min_x)
            or (p[0] > max_x and q[0] > max_x)
            or (p[1] < min_y and q[1] < min_y)
            or (p[1] > max_y and q[1] > max_y)
        ):
            continue
        for j in range(n_subs):
            hit = segment_intersection(p, q, line[j], line[j + 1])
            if hit is None:
                continue
            u, v = hit
            if u >= 1.0 and i < n_chords - 1:
                continue  # chord-end hit; the next chord owns it
            if v >= 1.0 and j < n_subs - 1:
                continue  # interior gate vertex; the next sub-segment owns it
            gate_dir = (line[j + 1][0] - line[j][0], line[j + 1][1] - line[j][1])
            chord_dir = (q[0] - p[0], q[1] - p[1])
            sense = cross_sign(gate_dir, chord_dir)
            if sense == 0:
                continue
            geometric = "left_to_right" if sense < 0 else "right_to_left"
            sign = 1 if geometric == gate.positive_direction else -1
            t = wps[i].t + u * (wps[i + 1].t - wps[i].t)
            out.append(GateCrossing(trip.trip_id, gate.gate_id, t, sign))
    out.sort(key=lambda c: c.t)
    return out


# -- filtering ----------------------------------------------------------------


def _greedy_assignment(per_gate: list[list[datetime]], ordered: bool) -> list[datetime] | None:
    """Earliest strictly-increasing pick of one crossing time per gate.

    Greedy-earliest is complete: if any monotone assignment exists, this
    finds one, and its first element is the minimum feasible start.
    """
    if not ordered:
        if any(not times for times in per_gate):
            return None
        return [times[0] for times in per_gate]
    picked: list[datetime] = []
    last = None
    for times in per_gate:
        nxt = None
        for t in times:
            if last is None or t > last:
                nxt = t
                break
        if nxt is None:
            return None
        picked.append(nxt)
        last = nxt
    return picked


def filter_trips(trips: list[Trip], doc: QueryDocument) -> list[TripSetEntry]:
    """Apply study-area, gate-sequence, and time-window rules to a corpus.

    A trip passes when (a) some waypoint lies inside the study area, when
    one is given; (b) the gate sequence admits a strictly time-increasing
    assignment of required-sign crossings (any one crossing per gate when
    require_order is off); and (c) the first qualifying crossing falls in
    the time window, when one is given.
    """
    q = doc.query
    q.validate(doc.gates.keys())
    for gate in doc.gates.values():
        gate.validate()
    out: list[TripSetEntry] = []
    for trip in trips:
        if q.study_area is not None:
            if not any(q.study_area.contains(w.lat, w.lon) for w in trip.waypoints):
                continue
        if len(trip.waypoints) < 2:
            continue
        per_gate: list[list[datetime]] = []
        crossings_by_gate: dict[str, list[GateCrossing]] = {}
        for gid, sign in q.gate_sequence:
            if gid not in crossings_by_gate:
                crossings_by_gate[gid] = detect_crossings(trip, doc.gates[gid])
            per_gate.append([c.t for c in crossings_by_gate[gid] if c.sign == sign])
        picked = _greedy_assignment(per_gate, q.require_order)
        if picked is None:
            continue
        anchor = min(picked) if not q.require_order else picked[0]
        if q.time_window is not None and not (q.time_window[0] <= anchor < q.time_window[1]):
            continue
        times = list(picked)
        if q.require_order and len(times) >= 2:
            # travel-time start: the last qualifying crossing of the first
            # gate before the second gate's pick (skips pre-departure dithering)
            first_times = per_gate[0]
            later = [t for t in first_times if t < times[1]]
            if later:
                times[0] = max(later)
        out.append(TripSetEntry(trip_id=trip.trip_id, anchor_t=anchor, times=times))
    return out


# -- query document -----------------------------------------------------------

_DOC_FIELDS = {"study_area", "gates", "gate_sequence", "time_window", "require_order", "tz", "theta", "active_hours"}


def parse_gate(g: dict) -> Gate:
    """Validate and build one Gate from parsed JSON."""
    try:
        gate = Gate(
            gate_id=str(g["gate_id"]),
            line=[(float(x), float(y)) for x, y in g["line"]],
            positive_direction=g.get("positive_direction", "left_to_right"),
        )
    except (KeyError, TypeError, ValueError) as e:
        raise QueryError(f"malformed gate entry: {e}") from None
    gate.validate()
    return gate


def parse_query_document(obj: dict) -> QueryDocument:
    """Validate and build a QueryDocument from parsed JSON."""
    if not isinstance(obj, dict):
        raise QueryError("query document must be a JSON object")
    unknown = set(obj) - _DOC_FIELDS
    if unknown:
        raise QueryError(f"unknown query document fields: {sorted(unknown)}")
    raw_gates = obj.get("gates")
    if not isinstance(raw_gates, list) or not raw_gates:
        raise QueryError("query document needs a non-empty gates list")
    gates: dict[str, Gate] = {}
    for g in raw_gates:
        gate = parse_gate(g)
        if gate.gate_id in gates:
            raise QueryError(f"duplicate gate id {gate.gate_id!r}")
        gates[gate.gate_id] = gate

    seq_raw = obj.get("gate_sequence")
    if not isinstance(seq_raw, list) or not seq_raw:
        raise QueryError("query document needs a non-empty gate_sequence")
    sequence: list[tuple[str, int]] = []
    for item in seq_raw:
        try:
            sequence.append((str(item["gate"]), int(item.get("sign", 1))))
        except (KeyError, TypeError, ValueError) as e:
            raise QueryError(f"malformed gate_sequence entry: {e}") from None

    area = None
    if obj.get("study_area") is not None:
        try:
            ring = [(float(x), float(y)) for x, y in obj["study_area"]["polygon"]]
        except (KeyError, TypeError, ValueError) as e:
            raise QueryError(f"malformed study_area: {e}") from None
        area = StudyArea(polygon=ring)
        area.validate()

    window = None
    if obj.get("time_window") is not None:
        tw = obj["time_window"]
        try:
            window = (parse_timestamp(tw["start"]), parse_timestamp(tw["end"]))
        except (KeyError, TypeError) as e:
            raise QueryError(f"malformed time_window: {e}") from None
        except Exception as e:  # parse_timestamp raises IngestError
            raise QueryError(f"malformed time_window: {e}") from None

    theta = obj.get("theta", 0.9)
    if not (0.0 < float(theta) <= 1.0):
        raise QueryError("theta must be in (0, 1]")
    active_hours = obj.get("active_hours", [])
    if not isinstance(active_hours, list) or not all(isinstance(h, int) and 0 <= h <= 23 for h in active_hours):
        raise QueryError("active_hours must be a list of hours 0..23")

    query = TripQuery(
        gate_sequence=sequence,
        study_area=area,
        time_window=window,
        require_order=bool(obj.get("require_order", True)),
    )
    query.validate(gates.keys())
    return QueryDocument(
        gates=gates,
        query=query,
        tz=str(obj.get("tz", DEFAULT_TZ)),
        theta=float(theta),
        active_hours=list(active_hours),
    )


def load_query_document(path) -> QueryDocument:
    try:
        with open(path, encoding="utf-8") as f:
            obj = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise QueryError(f"cannot read query document {path}: {e}") from e
    return parse_query_document(obj)
