"""Shared query pipeline: match, filter, fold, tabulate, report.

Both the CLI and the HTTP service run queries through this module, so a
query document produces the same report bytes no matter which front end
submitted it.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from . import __version__
from .analytics import (
    AvoidShare,
    HourlyMatrix,
    RouteShareTable,
    TravelTimeStats,
    avoid_share,
    avoid_share_to_json,
    hourly_route_counts,
    hourly_to_json,
    route_share_table,
    share_table_to_json,
    travel_time_stats,
    travel_times_to_json,
)
from .gates import QueryDocument, TripSetEntry, filter_trips, parse_query_document
from .ingest import Trip, format_timestamp, parse_timestamp
from .matching import MatchedTrip, MatchParams, Rejection, match_corpus
from .network import RoadNetwork
from .routes import RouteSet, extract_signature, fold_routes, routesets_to_json


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def query_hash(doc_json: dict) -> str:
    return hashlib.sha256(canonical_json(doc_json).encode("utf-8")).hexdigest()


def build_manifest(inputs: dict[str, str], params: dict) -> dict:
    """Reproducibility record: input hashes and parameter values.

    Deliberately carries no wall-clock timestamp so that re-running the
    same inputs yields byte-identical output files.  Runtime-only knobs
    (worker counts) are likewise excluded because they never change
    results.
    """
    return {
        "tool": "detourkit",
        "version": __version__,
        "inputs": {
            name: {"path": str(path), "sha256": file_sha256(path)}
            for name, path in sorted(inputs.items())
        },
        "params": {k: params[k] for k in sorted(params)},
    }


# -- trip sets ---------------------------------------------------------------------


def tripset_to_json(entries: list[TripSetEntry]) -> dict:
    return {
        "total": len(entries),
        "entries": [
            {
                "trip_id": e.trip_id,
                "anchor": format_timestamp(e.anchor_t),
                "times": [format_timestamp(t) for t in e.times],
            }
            for e in entries
        ],
    }


def tripset_from_json(doc: dict) -> list[TripSetEntry]:
    return [
        TripSetEntry(
            trip_id=row["trip_id"],
            anchor_t=parse_timestamp(row["anchor"]),
            times=[parse_timestamp(t) for t in row["times"]],
        )
        for row in doc["entries"]
    ]


# -- the query pipeline ------------------------------------------------------------


@dataclass
class QueryReport:
    doc: QueryDocument
    doc_hash: str
    entries: list[TripSetEntry]
    route_sets: list[RouteSet]
    share_table: RouteShareTable
    travel_times: TravelTimeStats
    hourly: HourlyMatrix
    avoid: AvoidShare | None
    corpus_trips: int
    matched_count: int
    rejections: list[Rejection]
    unfolded: list[str] = field(default_factory=list)
    manifest: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        doc = {
            "manifest": self.manifest,
            "query_hash": self.doc_hash,
            "trip_set": tripset_to_json(self.entries),
            "route_sets": routesets_to_json(self.route_sets),
            "share_table": share_table_to_json(self.share_table),
            "travel_times": travel_times_to_json(self.travel_times),
            "hourly": hourly_to_json(self.hourly),
            "avoid_share": avoid_share_to_json(self.avoid) if self.avoid else None,
            "diagnostics": {
                "corpus_trips": self.corpus_trips,
                "matched": self.matched_count,
                "match_rejections": [
                    {"trip_id": r.trip_id, "reason": r.reason} for r in self.rejections
                ],
                "filtered_in": len(self.entries),
                "unfolded": list(self.unfolded),
            },
        }
        return doc


def run_query(
    net: RoadNetwork,
    trips: list[Trip],
    doc_json: dict,
    match_params: MatchParams | None = None,
    workers: int = 1,
    matched: list[MatchedTrip] | None = None,
    rejections: list[Rejection] | None = None,
    manifest: dict | None = None,
) -> QueryReport:
    """Run one query document against a corpus, end to end.

    Pass a precomputed (matched, rejections) pair to reuse conflation
    across queries over the same corpus; otherwise the corpus is matched
    here with the given params and worker count.
    """
    doc = parse_query_document(doc_json)
    params = match_params or MatchParams()
    if matched is None:
        matched, rejections = match_corpus(trips, net, params, workers=workers)
    rejections = rejections or []

    entries = filter_trips(trips, doc)

    by_id = {m.trip_id: m for m in matched}
    sigs = []
    unfolded = []
    for e in entries:
        mt = by_id.get(e.trip_id)
        sig = extract_signature(mt, e, net) if mt is not None else None
        if sig is None:
            unfolded.append(e.trip_id)
        else:
            sigs.append(sig)

    route_sets = fold_routes(net, sigs, theta=doc.theta)
    table = route_share_table(route_sets)
    gate_pair = (doc.query.gate_sequence[0][0], doc.query.gate_sequence[-1][0])
    times = travel_time_stats(entries, route_sets, gate_pair)
    hourly = hourly_route_counts(entries, route_sets, doc.tz)
    avoid = avoid_share(hourly, doc.active_hours) if doc.active_hours else None

    return QueryReport(
        doc=doc,
        doc_hash=query_hash(doc_json),
        entries=entries,
        route_sets=route_sets,
        share_table=table,
        travel_times=times,
        hourly=hourly,
        avoid=avoid,
        corpus_trips=len(trips),
        matched_count=len(matched),
        rejections=list(rejections),
        unfolded=unfolded,
        manifest=manifest or {},
    )


def report_bytes(report: QueryReport) -> bytes:
    """Stable serialization of a report document."""
    return json.dumps(report.to_json(), indent=1).encode("utf-8")
