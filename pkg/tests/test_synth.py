import json
from datetime import date

import numpy as np
import pytest
from scipy import stats

from detourkit.ingest import CMV_CLASSES, daily_aggregate
from detourkit.synth import (
    FixtureBundle,
    ScenarioSpec,
    SynthError,
    UnknownScenarioError,
    build_scenario,
    degrade,
    generate,
    scenario_names,
    simulate_station_year,
    write_bundle,
)


def small_spec(**overrides):
    kw = dict(
        network="grid5x5",
        od_pairs=[("n0-0", "n4-4", 8.0), ("n4-0", "n0-4", 5.0)],
        seed=3,
        days=2,
        waypoint_period_s=10.0,
    )
    kw.update(overrides)
    return ScenarioSpec(**kw)


def trips_equal(a, b):
    if [t.trip_id for t in a] != [t.trip_id for t in b]:
        return False
    for x, y in zip(a, b):
        if len(x.waypoints) != len(y.waypoints):
            return False
        for wx, wy in zip(x.waypoints, y.waypoints):
            if (wx.t, wx.lat, wx.lon) != (wy.t, wy.lat, wy.lon):
                return False
    return True


def test_generate_is_deterministic():
    r1 = generate(small_spec())
    r2 = generate(small_spec())
    assert trips_equal(r1.trips, r2.trips)
    assert [(t.trip_id, t.path, t.detour) for t in r1.truth.records] == [
        (t.trip_id, t.path, t.detour) for t in r2.truth.records
    ]
    assert [(c.station_id, c.t) for c in r1.counts] == [(c.station_id, c.t) for c in r2.counts]


def test_generate_seed_changes_output():
    r1 = generate(small_spec())
    r2 = generate(small_spec(seed=4))
    assert not trips_equal(r1.trips, r2.trips)


def test_generate_trip_ids_unique_and_times_increasing():
    res = generate(small_spec())
    ids = [t.trip_id for t in res.trips]
    assert len(ids) == len(set(ids))
    for trip in res.trips:
        times = [w.t for w in trip.waypoints]
        assert times == sorted(times)
        assert len(set(times)) == len(times)


def test_generate_fixed_demand_exact_counts():
    res = generate(small_spec(demand="fixed", penetration=1.0, days=3))
    assert len(res.truth.records) == (8 + 5) * 3
    assert len(res.trips) == len(res.truth.records)


def test_generate_emits_probe_subset_only():
    res = generate(small_spec(demand="fixed", penetration=0.5, days=4))
    emitted = {t.trip_id for t in res.trips}
    assert emitted == {r.trip_id for r in res.truth.records if r.emitted}
    assert 0 < len(emitted) < len(res.truth.records)


def test_generate_penetration_concentrates():
    spec = small_spec(od_pairs=[("n0-0", "n4-4", 10_000)], demand="fixed", days=1, penetration=0.1,
                      waypoint_period_s=1000.0)
    res = generate(spec)
    frac = len(res.trips) / len(res.truth.records)
    # binomial(10000, 0.1): 4 sigma is about 0.012
    assert abs(frac - 0.1) < 0.012


def test_generate_zero_noise_waypoints_sit_on_path():
    from detourkit.synth import resolve_network
    net = resolve_network("grid5x5")
    res = generate(small_spec(noise_sigma_m=0.0, days=1, demand="fixed"))
    by_id = {r.trip_id: r for r in res.truth.records}
    for trip in res.trips:
        path = by_id[trip.trip_id].path
        for wp in trip.waypoints:
            d = min(net.segment(s).distance_and_offset(wp.lat, wp.lon)[0] for s in path)
            assert d < 0.01


def test_generate_unknown_node_fails():
    from detourkit.network import NetworkError

    with pytest.raises(NetworkError):
        generate(small_spec(od_pairs=[("n0-0", "ghost", 3.0)]))


def test_generate_unreachable_od_pair(tmp_path):
    # two oneway islands: b is a dead end, so a -> c has no route
    doc = {
        "type": "FeatureCollection",
        "features": [
            {"type": "Feature", "geometry": {"type": "Point", "coordinates": [-77.0, 39.0]}, "properties": {"id": "a"}},
            {"type": "Feature", "geometry": {"type": "Point", "coordinates": [-76.99, 39.0]}, "properties": {"id": "b"}},
            {"type": "Feature", "geometry": {"type": "Point", "coordinates": [-76.98, 39.0]}, "properties": {"id": "c"}},
            {
                "type": "Feature",
                "geometry": {"type": "LineString", "coordinates": [[-77.0, 39.0], [-76.99, 39.0]]},
                "properties": {"id": "ab", "from": "a", "to": "b", "oneway": True},
            },
            {
                "type": "Feature",
                "geometry": {"type": "LineString", "coordinates": [[-76.98, 39.0], [-76.99, 39.0]]},
                "properties": {"id": "cb", "from": "c", "to": "b", "oneway": True},
            },
        ],
    }
    p = tmp_path / "islands.json"
    p.write_text(json.dumps(doc), encoding="utf-8")
    with pytest.raises(SynthError):
        generate(small_spec(network=str(p), od_pairs=[("a", "c", 3.0)]))


def test_generate_rejects_unknown_fields_via_from_json():
    obj = {"network": "grid5x5", "od_pairs": [["n0-0", "n4-4", 2.0]], "frobnicate": 1}
    with pytest.raises(SynthError):
        ScenarioSpec.from_json(obj)


def test_from_json_round_trip_of_types():
    obj = {
        "network": "grid5x5",
        "od_pairs": [["n0-0", "n4-4", 2.0]],
        "start_date": "2026-07-20",
        "depart_window": ["07:00", "09:00"],
        "stations": [["vws-1", "h0-0"]],
    }
    spec = ScenarioSpec.from_json(obj)
    assert spec.start_date == date(2026, 7, 20)
    assert spec.od_pairs == [("n0-0", "n4-4", 2.0)]
    assert spec.stations == [("vws-1", "h0-0")]


def test_enforcement_detours_every_window_trip():
    spec = small_spec(
        od_pairs=[("n0-0", "n0-4", 40.0)],
        demand="fixed",
        days=1,
        detour_model="enforcement_hours",
        detour_params={
            "windows": [["08:00", "15:00"]],
            "probability": 1.0,
            "alternates": ["n2-2"],
        },
        depart_window=("06:00", "20:00"),
        tz="America/New_York",
    )
    res = generate(spec)
    from zoneinfo import ZoneInfo
    zone = ZoneInfo("America/New_York")
    for rec in res.truth.records:
        local = rec.departure.astimezone(zone)
        in_window = 8 <= local.hour < 15
        assert rec.detour == in_window
        if in_window:
            assert "via n2-2" in rec.route_label


def test_station_counts_conserve_truth():
    spec = small_spec(
        od_pairs=[("n0-0", "n0-4", 12.0)],
        demand="fixed",
        days=3,
        stations=[("vws-1", "h0-1")],
    )
    res = generate(spec)
    # every base-path trip passes the station segment once
    n_pass = sum(1 for r in res.truth.records if "h0-1" in r.path)
    assert len(res.counts) == n_pass
    assert sum(res.truth.station_daily["vws-1"].values()) == n_pass
    series = daily_aggregate(res.counts, CMV_CLASSES, tz=spec.tz)
    recounted = {d.isoformat(): c for d, c in series.days if c}
    assert recounted == {k: v for k, v in res.truth.station_daily["vws-1"].items() if v}


def test_degrade_zero_rate_is_identity():
    res = generate(small_spec(days=1))
    out = degrade(res.trips, 0.0, seed=1)
    assert trips_equal(res.trips, out)
    assert out[0] is not res.trips[0]  # copies, not aliases


def test_degrade_preserves_endpoints_and_subset():
    res = generate(small_spec(days=1))
    out = degrade(res.trips, 0.4, seed=2)
    for orig, worn in zip(res.trips, out):
        assert worn.waypoints[0] == orig.waypoints[0]
        assert worn.waypoints[-1] == orig.waypoints[-1]
        kept = {(w.t, w.lat, w.lon) for w in worn.waypoints}
        assert kept <= {(w.t, w.lat, w.lon) for w in orig.waypoints}


def test_degrade_drop_rate_statistics():
    res = generate(small_spec(od_pairs=[("n0-0", "n4-4", 30.0)], demand="fixed", days=1,
                              waypoint_period_s=5.0))
    rate = 0.3
    out = degrade(res.trips, rate, seed=3)
    interior = sum(len(t.waypoints) - 2 for t in res.trips)
    dropped = sum(len(a.waypoints) - len(b.waypoints) for a, b in zip(res.trips, out))
    lo, hi = stats.binom.interval(0.9999, interior, rate)
    assert lo <= dropped <= hi


def test_degrade_validates_rate():
    with pytest.raises(SynthError):
        degrade([], 1.0, seed=0)


def test_station_year_shape_and_determinism():
    truth, probe = simulate_station_year(11)
    assert len(truth.days) == 364
    assert truth.days[0][0].weekday() == 0
    t2, p2 = simulate_station_year(11)
    assert truth.days == t2.days and probe.days == p2.days
    assert all(p <= t for (_, t), (_, p) in zip(truth.days, probe.days))


def test_station_year_weekend_suppression():
    truth, _ = simulate_station_year(5)
    weekday = [c for d, c in truth.days if d.weekday() < 5]
    weekend = [c for d, c in truth.days if d.weekday() >= 5]
    assert np.mean(weekend) < 0.6 * np.mean(weekday)


def test_bundled_scenarios_exist():
    assert scenario_names() == ["bridge_times", "closure_compare", "weigh_station"]
    with pytest.raises(UnknownScenarioError):
        build_scenario("motorway_madness")


def test_bundled_scenario_sizes(ws_bundle, bt_bundle, cc_bundle):
    assert len(ws_bundle.trips) == 585
    assert len(bt_bundle.trips) == 17
    assert len(cc_bundle.trips) == 100
    for bundle in (ws_bundle, bt_bundle, cc_bundle):
        assert isinstance(bundle, FixtureBundle)
        assert bundle.queries
        assert bundle.network["type"] == "FeatureCollection"


def test_write_bundle_files(tmp_path, ws_bundle):
    paths = write_bundle(ws_bundle, tmp_path)
    # the weigh-station bundle carries station counts, so all four land
    assert set(paths) >= {"network", "trips", "truth", "counts"}
    net_doc = json.loads((tmp_path / "network.json").read_text(encoding="utf-8"))
    assert net_doc["type"] == "FeatureCollection"
    assert (tmp_path / "trips.csv").exists()
    assert (tmp_path / "counts.csv").exists()
    for qname in ws_bundle.queries:
        qdoc = json.loads((tmp_path / f"query-{qname}.json").read_text(encoding="utf-8"))
        assert qdoc["gates"]
