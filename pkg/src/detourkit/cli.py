"""Command-line front end for the full pipeline.

Exit codes: 0 success, 2 usage, 3 missing file, 4 malformed input,
5 unknown reference (scenario, station, gate, segment), 6 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from zoneinfo import ZoneInfoNotFoundError

from . import __version__
from .analytics import (
    AnalyticsError,
    box_summary,
    compare_periods,
    comparison_to_json,
    correlations_to_json,
    probe_daily_counts,
    render_comparison,
    render_correlations,
    render_hourly,
    render_share_table,
    render_travel_times,
    share_table_from_json,
    weekly_correlations,
)
from .gates import QueryError, UnknownGateError, filter_trips, parse_gate, parse_query_document
from .ingest import (
    CMV_CLASSES,
    DEFAULT_TZ,
    IngestError,
    UnknownStationError,
    daily_aggregate,
    parse_counts,
    parse_trips,
    write_counts,
    write_trips,
)
from .matching import MatchParams, match_corpus, parse_matched, write_matched
from .network import (
    NetworkError,
    NetworkReferenceError,
    UnknownSegmentError,
    load_network,
)
from .pipeline import (
    build_manifest,
    report_bytes,
    run_query,
    tripset_from_json,
    tripset_to_json,
)
from .routes import extract_signature, fold_routes, write_routesets
from .synth import (
    ScenarioSpec,
    SynthError,
    UnknownScenarioError,
    build_scenario,
    generate,
    scenario_names,
    write_bundle,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MISSING_FILE = 3
EXIT_PARSE = 4
EXIT_UNKNOWN_REF = 5
EXIT_INTERNAL = 6


def _load_json(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


# -- subcommands -------------------------------------------------------------------


def cmd_synth(args) -> int:
    out = Path(args.out)
    if args.scenario:
        seed = args.seed if args.seed is not None else 7
        bundle = build_scenario(args.scenario, seed=seed)
        paths = write_bundle(bundle, out)
        for name, p in sorted(paths.items()):
            _say(f"wrote {name}: {p}")
        return EXIT_OK
    spec = ScenarioSpec.from_json(_load_json(args.spec))
    if args.seed is not None:
        spec.seed = args.seed
    result = generate(spec)
    out.mkdir(parents=True, exist_ok=True)
    trips_path = out / "trips.csv"
    write_trips(result.trips, trips_path)
    _say(f"wrote trips: {trips_path} ({len(result.trips)} trips)")
    truth_path = out / "truth.json"
    truth_path.write_text(json.dumps(result.truth.to_json(), indent=1), encoding="utf-8")
    _say(f"wrote truth: {truth_path}")
    if result.counts:
        counts_path = out / "counts.csv"
        write_counts(result.counts, counts_path)
        _say(f"wrote counts: {counts_path} ({len(result.counts)} records)")
    return EXIT_OK


def _match_params(args) -> MatchParams:
    params = MatchParams(
        candidate_radius_m=args.radius_m,
        emission_sigma_m=args.sigma_m,
        max_gap_fill_ratio=args.gap_ratio,
        min_waypoints=args.min_waypoints,
    )
    params.validate()
    return params


def cmd_match(args) -> int:
    net = load_network(args.network)
    trips = parse_trips(args.trips)
    params = _match_params(args)
    matched, rejected = match_corpus(trips, net, params, workers=args.threads)
    write_matched(matched, args.out)
    _say(f"matched {len(matched)} of {len(trips)} trips ({len(rejected)} rejected)")
    for r in rejected:
        _say(f"  rejected {r.trip_id}: {r.reason}")
    return EXIT_OK


def cmd_query(args) -> int:
    trips = parse_trips(args.trips)
    doc = parse_query_document(_load_json(args.gates))
    entries = filter_trips(trips, doc)
    Path(args.out).write_text(
        json.dumps(tripset_to_json(entries), indent=1), encoding="utf-8"
    )
    _say(f"{len(entries)} of {len(trips)} trips pass the gate query")
    return EXIT_OK


def cmd_fold(args) -> int:
    net = load_network(args.network)
    matched = parse_matched(args.matched)
    entries = tripset_from_json(_load_json(args.tripset))
    by_id = {m.trip_id: m for m in matched}
    sigs = []
    skipped = 0
    for e in entries:
        mt = by_id.get(e.trip_id)
        sig = extract_signature(mt, e, net) if mt is not None else None
        if sig is None:
            skipped += 1
        else:
            sigs.append(sig)
    route_sets = fold_routes(net, sigs, theta=args.theta)
    write_routesets(route_sets, args.out)
    _say(f"folded {len(sigs)} trips into {len(route_sets)} routes ({skipped} without usable paths)")
    return EXIT_OK


def cmd_report(args) -> int:
    net = load_network(args.network)
    trips = parse_trips(args.trips)
    doc_json = _load_json(args.gates)
    if args.theta is not None:
        doc_json["theta"] = args.theta
    if args.tz is not None:
        doc_json["tz"] = args.tz
    params = _match_params(args)
    manifest = build_manifest(
        {"network": args.network, "trips": args.trips, "query": args.gates},
        {
            "theta": doc_json.get("theta", 0.9),
            "tz": doc_json.get("tz", DEFAULT_TZ),
            "candidate_radius_m": params.candidate_radius_m,
            "emission_sigma_m": params.emission_sigma_m,
            "max_gap_fill_ratio": params.max_gap_fill_ratio,
            "min_waypoints": params.min_waypoints,
        },
    )
    report = run_query(
        net, trips, doc_json, match_params=params, workers=args.threads, manifest=manifest
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_bytes(report_bytes(report))
    (out / "shares.tsv").write_text(render_share_table(report.share_table), encoding="utf-8")
    (out / "travel_times.tsv").write_text(render_travel_times(report.travel_times), encoding="utf-8")
    (out / "hourly.tsv").write_text(render_hourly(report.hourly), encoding="utf-8")
    sys.stdout.write(render_share_table(report.share_table))
    sys.stdout.write(render_travel_times(report.travel_times))
    if report.avoid is not None:
        av = report.avoid
        sys.stdout.write(
            f"active-window trips {av.window_trips}, off primary {av.off_primary} ({av.display})\n"
        )
    _say(f"wrote report to {out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    records = [r for r in parse_counts(args.counts) if r.station_id == args.station]
    if not records:
        raise UnknownStationError(f"no count records for station {args.station!r}")
    gates_doc = _load_json(args.gates)
    gate = None
    for raw in gates_doc.get("gates", []):
        parsed = parse_gate(raw)
        if parsed.gate_id == args.gate_id:
            gate = parsed
            break
    if gate is None:
        raise UnknownGateError(f"gate {args.gate_id!r} not in {args.gates}")
    trips = parse_trips(args.trips)
    truth = daily_aggregate(records, CMV_CLASSES, args.tz)
    probe = probe_daily_counts(trips, gate, args.tz, args.station)
    wc = weekly_correlations(probe, truth)
    Path(args.out).write_text(
        json.dumps(correlations_to_json(wc), indent=1), encoding="utf-8"
    )
    sys.stdout.write(render_correlations(wc))
    box = box_summary(wc.points)
    if box.median is not None:
        _say(f"{box.n} weeks, median r = {box.median:.4f} ({box.n_undefined} undefined)")
    else:
        _say(f"no defined correlations over {len(wc.points)} weeks")
    return EXIT_OK


def cmd_compare(args) -> int:
    table_a = share_table_from_json(_load_json(args.report_a)["share_table"])
    table_b = share_table_from_json(_load_json(args.report_b)["share_table"])
    cmp = compare_periods(table_a, table_b)
    Path(args.out).write_text(json.dumps(comparison_to_json(cmp), indent=1), encoding="utf-8")
    sys.stdout.write(render_comparison(cmp))
    return EXIT_OK


def cmd_serve(args) -> int:
    from .service import ServiceConfig, serve

    base = {}
    if args.config:
        base = _load_json(args.config)
        if not isinstance(base, dict):
            raise QueryError("service config must be a JSON object")
    overrides = {
        "network": args.network,
        "trips": args.trips,
        "counts": args.counts,
        "tz": args.tz,
        "host": args.host,
        "port": args.port,
        "workers": args.threads,
    }
    merged = dict(base)
    for key, val in overrides.items():
        if val is not None:
            merged[key] = val
    if "network" not in merged or "trips" not in merged:
        raise QueryError("serve needs --network and --trips (or a config file providing them)")
    config = ServiceConfig(
        network=str(merged["network"]),
        trips=str(merged["trips"]),
        counts=merged.get("counts"),
        tz=str(merged.get("tz", DEFAULT_TZ)),
        host=str(merged.get("host", "127.0.0.1")),
        port=int(merged.get("port", 8000)),
        workers=int(merged.get("workers", 1)),
        match_params=MatchParams(),
    )
    serve(config)
    return EXIT_OK


# -- parser ------------------------------------------------------------------------


def _add_match_flags(sp) -> None:
    sp.add_argument("--threads", type=int, default=1, help="matching worker processes")
    sp.add_argument("--radius-m", type=float, default=50.0, help="candidate search radius")
    sp.add_argument("--sigma-m", type=float, default=15.0, help="GPS noise scale for scoring")
    sp.add_argument("--gap-ratio", type=float, default=1.5, help="max detour ratio when bridging gaps")
    sp.add_argument("--min-waypoints", type=int, default=2, help="reject shorter trips")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="detourkit",
        description="Probe-trip detour analytics: synthesize, match, query, fold, report.",
    )
    p.add_argument("--version", action="version", version=f"detourkit {__version__}")
    sub = p.add_subparsers(dest="command", metavar="command")

    sp = sub.add_parser("synth", help="generate a synthetic scenario or bundled fixture")
    group = sp.add_mutually_exclusive_group(required=True)
    group.add_argument(
        "--scenario", help=f"bundled fixture name ({', '.join(scenario_names())})"
    )
    group.add_argument("--spec", help="ScenarioSpec JSON file")
    sp.add_argument("--out", required=True, help="output directory")
    sp.add_argument("--seed", type=int, default=None, help="override the generation seed (default 7)")
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("match", help="conflate probe trips onto the road network")
    sp.add_argument("--network", required=True)
    sp.add_argument("--trips", required=True)
    sp.add_argument("--out", required=True, help="matched-trip CSV path")
    _add_match_flags(sp)
    sp.set_defaults(func=cmd_match)

    sp = sub.add_parser("query", help="filter trips through a gate query document")
    sp.add_argument("--trips", required=True)
    sp.add_argument("--gates", required=True, help="query document JSON")
    sp.add_argument("--out", required=True, help="trip-set JSON path")
    sp.set_defaults(func=cmd_query)

    sp = sub.add_parser("fold", help="fold matched trips into canonical route sets")
    sp.add_argument("--network", required=True)
    sp.add_argument("--matched", required=True, help="matched-trip CSV from `match`")
    sp.add_argument("--tripset", required=True, help="trip-set JSON from `query`")
    sp.add_argument("--theta", type=float, default=0.9, help="similarity threshold")
    sp.add_argument("--out", required=True, help="route-sets JSON path")
    sp.set_defaults(func=cmd_fold)

    sp = sub.add_parser("report", help="full pipeline: match, filter, fold, tabulate")
    sp.add_argument("--network", required=True)
    sp.add_argument("--trips", required=True)
    sp.add_argument("--gates", required=True, help="query document JSON")
    sp.add_argument("--out", required=True, help="output directory")
    sp.add_argument("--theta", type=float, default=None, help="override the document's theta")
    sp.add_argument("--tz", default=None, help="override the document's timezone")
    _add_match_flags(sp)
    sp.set_defaults(func=cmd_report)

    sp = sub.add_parser("validate", help="correlate probe counts against station counts")
    sp.add_argument("--counts", required=True, help="station count CSV (ground truth)")
    sp.add_argument("--station", required=True, help="station id within the counts file")
    sp.add_argument("--trips", required=True, help="probe trips CSV")
    sp.add_argument("--gates", required=True, help="JSON file with a gates list")
    sp.add_argument("--gate-id", required=True, help="gate marking the station location")
    sp.add_argument("--tz", default=DEFAULT_TZ)
    sp.add_argument("--out", required=True, help="correlation JSON path")
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("compare", help="share deltas between two report documents")
    sp.add_argument("--report-a", required=True)
    sp.add_argument("--report-b", required=True)
    sp.add_argument("--out", required=True, help="comparison JSON path")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("serve", help="run the HTTP query service")
    sp.add_argument("--config", default=None, help="service config JSON")
    sp.add_argument("--network", default=None)
    sp.add_argument("--trips", default=None)
    sp.add_argument("--counts", default=None)
    sp.add_argument("--host", default=None)
    sp.add_argument("--port", type=int, default=None)
    sp.add_argument("--tz", default=None)
    sp.add_argument("--threads", type=int, default=None)
    sp.set_defaults(func=cmd_serve)

    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "func"):
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except FileNotFoundError as e:
        _say(f"error: missing file: {e.filename or e}")
        return EXIT_MISSING_FILE
    except (UnknownScenarioError, UnknownSegmentError, UnknownGateError, NetworkReferenceError, UnknownStationError) as e:
        _say(f"error: {e}")
        return EXIT_UNKNOWN_REF
    except (
        IngestError,
        QueryError,
        NetworkError,
        SynthError,
        AnalyticsError,
        json.JSONDecodeError,
        ZoneInfoNotFoundError,
        ValueError,
    ) as e:
        _say(f"error: {e}")
        return EXIT_PARSE
    except Exception as e:  # pragma: no cover - defensive
        _say(f"internal error: {e!r}")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
