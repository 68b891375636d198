import json
from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from detourkit.gates import (
    Gate,
    QueryError,
    UnknownGateError,
    detect_crossings,
    filter_trips,
    load_query_document,
    parse_gate,
    parse_query_document,
)
from detourkit.ingest import Trip, Waypoint

UTC = timezone.utc
T0 = datetime(2026, 7, 21, 12, 0, tzinfo=UTC)


def trip_of(points, tid="t1", period_s=10.0):
    wps = [Waypoint(T0 + timedelta(seconds=i * period_s), lat, lon) for i, (lat, lon) in enumerate(points)]
    return Trip(tid, "cmv", wps)


def vgate(gid="g", lon=-77.26, lo=39.2, hi=39.3, positive="left_to_right"):
    """A gate drawn south to north along a meridian."""
    return Gate(gid, [(lon, lo), (lon, hi)], positive)


# -- crossing geometry --------------------------------------------------------


def test_single_eastbound_crossing():
    gate = vgate()
    trip = trip_of([(39.25, -77.2605), (39.25, -77.2595)])
    (c,) = detect_crossings(trip, gate)
    # gate direction is north; west-to-east movement crosses left to right
    assert c.sign == 1
    assert c.gate_id == "g"
    # the crossing sits at the midpoint of the 10 s chord
    assert c.t == T0 + timedelta(seconds=5)


def test_westbound_crossing_is_negative():
    gate = vgate()
    trip = trip_of([(39.25, -77.2595), (39.25, -77.2605)])
    (c,) = detect_crossings(trip, gate)
    assert c.sign == -1


def test_positive_direction_flips_signs():
    gate = vgate(positive="right_to_left")
    east = trip_of([(39.25, -77.2605), (39.25, -77.2595)])
    assert detect_crossings(east, gate)[0].sign == -1


def test_crossing_time_interpolates_along_chord():
    gate = vgate()
    # 10 s chord that covers the gate at 30% of its length
    trip = trip_of([(39.25, -77.2603), (39.25, -77.2593)])
    (c,) = detect_crossings(trip, gate)
    assert abs((c.t - T0).total_seconds() - 3.0) < 1e-6


def test_multiple_crossings_sorted_by_time():
    gate = vgate()
    trip = trip_of([(39.25, -77.2605), (39.25, -77.2595), (39.251, -77.2605), (39.252, -77.2595)])
    signs = [c.sign for c in detect_crossings(trip, gate)]
    assert signs == [1, -1, 1]
    ts = [c.t for c in detect_crossings(trip, gate)]
    assert ts == sorted(ts)


def test_waypoint_exactly_on_gate_counted_once():
    gate = vgate()
    # the shared waypoint of two chords lies exactly on the gate line
    trip = trip_of([(39.25, -77.2605), (39.25, -77.26), (39.25, -77.2595)])
    crossings = detect_crossings(trip, gate)
    assert len(crossings) == 1
    assert crossings[0].sign == 1


def test_interior_gate_vertex_counted_once():
    # two collinear gate sub-segments; a chord through the shared vertex
    gate = Gate("g", [(-77.26, 39.2), (-77.26, 39.25), (-77.26, 39.3)], "left_to_right")
    trip = trip_of([(39.25, -77.2605), (39.25, -77.2595)])
    crossings = detect_crossings(trip, gate)
    assert len(crossings) == 1


def test_chord_parallel_to_gate_ignored():
    gate = vgate()
    trip = trip_of([(39.21, -77.26), (39.29, -77.26)])  # rides along the gate line
    assert detect_crossings(trip, gate) == []


def test_net_sign_matches_side_change():
    """Crossing parity: net sign is 0 for same-side trips, +-1 otherwise."""
    gate = vgate(lo=39.0, hi=39.5)  # tall enough that no trip escapes around it
    rng = np.random.default_rng(12)
    for _ in range(200):
        n = int(rng.integers(2, 12))
        lats = 39.2 + rng.uniform(0, 0.1, size=n)
        lons = -77.26 + rng.uniform(-0.04, 0.04, size=n)
        trip = trip_of(list(zip(lats.tolist(), lons.tolist())))
        net = sum(c.sign for c in detect_crossings(trip, gate))
        start_right = lons[0] > -77.26
        end_right = lons[-1] > -77.26
        if start_right == end_right:
            assert net == 0
        else:
            assert net == (1 if end_right and not start_right else -1)


def test_brute_force_oracle_small():
    """Compare against an independent intersection solver on random data."""

    def oracle(trip, gate):
        hits = []
        wps = trip.waypoints
        for i in range(len(wps) - 1):
            p = np.array([wps[i].lon, wps[i].lat])
            q = np.array([wps[i + 1].lon, wps[i + 1].lat])
            for j in range(len(gate.line) - 1):
                a = np.array(gate.line[j])
                b = np.array(gate.line[j + 1])
                m = np.column_stack([q - p, a - b])
                if abs(np.linalg.det(m)) < 1e-18:
                    continue
                u, v = np.linalg.solve(m, a - p)
                if not (0.0 <= u <= 1.0 and 0.0 <= v <= 1.0):
                    continue
                if u >= 1.0 and i < len(wps) - 2:
                    continue
                if v >= 1.0 and j < len(gate.line) - 2:
                    continue
                gd, cd = b - a, q - p
                z = gd[0] * cd[1] - gd[1] * cd[0]
                if z == 0:
                    continue
                sign = -1 if z > 0 else 1
                if gate.positive_direction == "right_to_left":
                    sign = -sign
                t = wps[i].t + u * (wps[i + 1].t - wps[i].t)
                hits.append((t, sign))
        hits.sort(key=lambda h: h[0])
        return hits

    rng = np.random.default_rng(77)
    for _ in range(60):
        n = int(rng.integers(2, 10))
        trip = trip_of(
            list(zip((39.2 + rng.uniform(0, 0.1, n)).tolist(), (-77.3 + rng.uniform(0, 0.1, n)).tolist()))
        )
        for _ in range(4):
            x0, y0, x1, y1 = rng.uniform(0, 0.1, size=4)
            direction = "left_to_right" if rng.random() < 0.5 else "right_to_left"
            gate = Gate("g", [(-77.3 + x0, 39.2 + y0), (-77.3 + x1, 39.2 + y1)], direction)
            if (x0, y0) == (x1, y1):
                continue
            got = [(c.t, c.sign) for c in detect_crossings(trip, gate)]
            assert got == oracle(trip, gate)


# -- document parsing ----------------------------------------------------------


def doc_json(**overrides):
    base = {
        "gates": [
            {"gate_id": "in", "line": [[-77.27, 39.2], [-77.27, 39.3]], "positive_direction": "left_to_right"},
            {"gate_id": "out", "line": [[-77.25, 39.2], [-77.25, 39.3]], "positive_direction": "left_to_right"},
        ],
        "gate_sequence": [{"gate": "in", "sign": 1}, {"gate": "out", "sign": 1}],
        "require_order": True,
    }
    base.update(overrides)
    return base


def test_parse_query_document_defaults():
    doc = parse_query_document(doc_json())
    assert set(doc.gates) == {"in", "out"}
    assert doc.query.gate_sequence == [("in", 1), ("out", 1)]
    assert doc.theta == 0.9
    assert doc.query.time_window is None


def test_parse_query_document_rejects_unknown_fields():
    with pytest.raises(QueryError):
        parse_query_document(doc_json(wormholes=True))


def test_parse_query_document_rejects_unknown_gate_reference():
    bad = doc_json(gate_sequence=[{"gate": "nope", "sign": 1}])
    with pytest.raises(UnknownGateError):
        parse_query_document(bad)


def test_parse_query_document_rejects_duplicate_gate_ids():
    gates = doc_json()["gates"]
    gates.append(dict(gates[0]))
    with pytest.raises(QueryError):
        parse_query_document(doc_json(gates=gates))


@pytest.mark.parametrize(
    "mutant",
    [
        {"gates": []},
        {"gates": [{"gate_id": "g"}]},  # no line
        {"gates": [{"gate_id": "g", "line": [[-77.0, 39.0]]}]},  # one point
        {"gate_sequence": []},
        {"gate_sequence": [{"sign": 1}]},
        {"gate_sequence": [{"gate": "in", "sign": 2}]},
        {"theta": 0.0},
        {"active_hours": [25]},
        {"time_window": {"start": "2026-07-21T10:00:00Z", "end": "2026-07-21T08:00:00Z"}},
        {"study_area": {"polygon": [[-77.3, 39.2], [-77.2, 39.2], [-77.3, 39.2]]}},
    ],
)
def test_parse_query_document_rejects_malformed(mutant):
    with pytest.raises(QueryError):
        doc = parse_query_document(doc_json(**mutant))
        filter_trips([], doc)


def test_parse_gate_direction_vocabulary():
    with pytest.raises(QueryError):
        parse_gate({"gate_id": "g", "line": [[-77.0, 39.0], [-77.0, 39.1]], "positive_direction": "up"})


def test_load_query_document(tmp_path):
    p = tmp_path / "q.json"
    p.write_text(json.dumps(doc_json()), encoding="utf-8")
    doc = load_query_document(p)
    assert set(doc.gates) == {"in", "out"}


# -- corpus filtering ----------------------------------------------------------


def through_trip(tid="t1", start_s=0.0):
    """West to east through both document gates."""
    t0 = T0 + timedelta(seconds=start_s)
    lons = [-77.28, -77.26, -77.24]
    wps = [Waypoint(t0 + timedelta(seconds=30 * i), 39.25, lon) for i, lon in enumerate(lons)]
    return Trip(tid, "cmv", wps)


def test_filter_accepts_ordered_pass():
    doc = parse_query_document(doc_json())
    entries = filter_trips([through_trip()], doc)
    assert len(entries) == 1
    e = entries[0]
    assert e.trip_id == "t1"
    assert len(e.times) == 2
    assert e.times[0] < e.times[1]
    assert e.anchor_t == e.times[0]


def test_filter_rejects_wrong_direction():
    doc = parse_query_document(doc_json())
    west = trip_of([(39.25, -77.24), (39.25, -77.26), (39.25, -77.28)], tid="w")
    assert filter_trips([west], doc) == []


def test_filter_rejects_wrong_order():
    seq = [{"gate": "out", "sign": 1}, {"gate": "in", "sign": 1}]
    doc = parse_query_document(doc_json(gate_sequence=seq))
    assert filter_trips([through_trip()], doc) == []
    relaxed = parse_query_document(doc_json(gate_sequence=seq, require_order=False))
    assert len(filter_trips([through_trip()], relaxed)) == 1


def test_filter_time_window_uses_first_crossing():
    window = {"start": "2026-07-21T12:00:00Z", "end": "2026-07-21T12:01:00Z"}
    doc = parse_query_document(doc_json(time_window=window))
    inside = through_trip("a", start_s=0.0)
    outside = through_trip("b", start_s=3600.0)
    entries = filter_trips([inside, outside], doc)
    assert [e.trip_id for e in entries] == ["a"]


def test_filter_study_area_requires_a_waypoint_inside():
    area = {"polygon": [[-77.29, 39.24], [-77.23, 39.24], [-77.23, 39.26], [-77.29, 39.26], [-77.29, 39.24]]}
    doc = parse_query_document(doc_json(study_area=area))
    assert len(filter_trips([through_trip()], doc)) == 1
    far_area = {"polygon": [[-70.0, 30.0], [-69.0, 30.0], [-69.0, 31.0], [-70.0, 31.0], [-70.0, 30.0]]}
    doc2 = parse_query_document(doc_json(study_area=far_area))
    assert filter_trips([through_trip()], doc2) == []


def test_filter_refines_start_to_last_crossing_before_second_gate():
    """A vehicle dithering across the first gate starts its run at the final
    crossing, not the first one."""
    t0 = T0
    pts = [
        (39.25, -77.28),
        (39.25, -77.26),  # crosses "in" eastbound around t=45 s
        (39.25, -77.28),  # back out (westbound, wrong sign)
        (39.25, -77.26),  # crosses "in" again around t=225 s
        (39.25, -77.24),  # through "out"
    ]
    wps = [Waypoint(t0 + timedelta(seconds=90 * i), 39.25, lon) for i, (_, lon) in enumerate(pts)]
    wps = [Waypoint(w.t, lat, lon) for w, (lat, lon) in zip(wps, pts)]
    trip = Trip("dither", "cmv", wps)
    doc = parse_query_document(doc_json())
    (entry,) = filter_trips([trip], doc)
    # anchor keeps the first qualifying crossing; times[0] is refined to the
    # re-entry at t=225, and the second gate is reached at t=315
    assert (entry.anchor_t - t0).total_seconds() == pytest.approx(45.0, abs=1.0)
    assert (entry.times[0] - t0).total_seconds() == pytest.approx(225.0, abs=1.0)
    assert (entry.times[1] - t0).total_seconds() == pytest.approx(315.0, abs=1.0)


def test_filter_window_monotone_in_width():
    doc_narrow = parse_query_document(
        doc_json(time_window={"start": "2026-07-21T12:00:00Z", "end": "2026-07-21T12:00:30Z"})
    )
    doc_wide = parse_query_document(
        doc_json(time_window={"start": "2026-07-21T12:00:00Z", "end": "2026-07-21T14:00:00Z"})
    )
    trips = [through_trip(f"t{i}", start_s=i * 600.0) for i in range(8)]
    narrow = {e.trip_id for e in filter_trips(trips, doc_narrow)}
    wide = {e.trip_id for e in filter_trips(trips, doc_wide)}
    assert narrow <= wide
