"""HTTP/JSON query service.

A thin adapter over the pipeline: corpora are loaded read-only at
startup, query reports are cached by document hash, and every response
is reproducible with direct library calls on the same inputs.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response

from . import __version__
from .analytics import (
    AnalyticsError,
    compare_periods,
    comparison_to_json,
    correlations_to_json,
    probe_daily_counts,
    share_table_from_json,
    weekly_correlations,
)
from .gates import QueryError, UnknownGateError, parse_gate
from .ingest import (
    CMV_CLASSES,
    DEFAULT_TZ,
    CountRecord,
    IngestError,
    Trip,
    daily_aggregate,
    parse_counts,
    parse_trips,
)
from .matching import MatchedTrip, MatchParams, Rejection, match_corpus
from .network import RoadNetwork, UnknownSegmentError, load_network
from .pipeline import build_manifest, query_hash, report_bytes, run_query


@dataclass
class ServiceConfig:
    network: str
    trips: str
    counts: str | None = None
    tz: str = DEFAULT_TZ
    host: str = "127.0.0.1"
    port: int = 8000
    workers: int = 1
    match_params: MatchParams = field(default_factory=MatchParams)


class AnalysisState:
    """Loaded corpora plus caches shared across requests.

    The matched corpus is computed once on first use; query reports are
    cached as the exact bytes first served, keyed by document hash, with
    per-key deduplication so concurrent identical queries compute once.
    """

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.net: RoadNetwork = load_network(config.network)
        self.trips: list[Trip] = parse_trips(config.trips)
        self.counts: dict[str, list[CountRecord]] = {}
        if config.counts:
            for rec in parse_counts(config.counts):
                self.counts.setdefault(rec.station_id, []).append(rec)
        inputs = {"network": config.network, "trips": config.trips}
        if config.counts:
            inputs["counts"] = config.counts
        self.manifest = build_manifest(
            inputs,
            {
                "tz": config.tz,
                "candidate_radius_m": config.match_params.candidate_radius_m,
                "emission_sigma_m": config.match_params.emission_sigma_m,
                "max_gap_fill_ratio": config.match_params.max_gap_fill_ratio,
                "min_waypoints": config.match_params.min_waypoints,
            },
        )
        self._matched: list[MatchedTrip] | None = None
        self._rejections: list[Rejection] = []
        self._match_lock = threading.Lock()
        self._reports: dict[str, bytes] = {}
        self._cache_lock = threading.Lock()
        self._inflight: dict[str, threading.Lock] = {}

    def matched(self) -> tuple[list[MatchedTrip], list[Rejection]]:
        with self._match_lock:
            if self._matched is None:
                self._matched, self._rejections = match_corpus(
                    self.trips, self.net, self.config.match_params, workers=self.config.workers
                )
            return self._matched, self._rejections

    def cached_report(self, key: str) -> bytes | None:
        with self._cache_lock:
            return self._reports.get(key)

    def run(self, doc_json: dict) -> tuple[bytes, bool]:
        """Report bytes for a query document, computing at most once per key."""
        key = query_hash(doc_json)
        hit = self.cached_report(key)
        if hit is not None:
            return hit, True
        with self._cache_lock:
            gate = self._inflight.setdefault(key, threading.Lock())
        with gate:
            hit = self.cached_report(key)
            if hit is not None:
                return hit, True
            matched, rejections = self.matched()
            report = run_query(
                self.net,
                self.trips,
                doc_json,
                match_params=self.config.match_params,
                matched=matched,
                rejections=rejections,
                manifest=self.manifest,
            )
            body = report_bytes(report)
            with self._cache_lock:
                self._reports[key] = body
                self._inflight.pop(key, None)
            return body, False


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": {"code": code, "message": message}})


async def _body_json(request: Request):
    raw = await request.body()
    try:
        return json.loads(raw)
    except json.JSONDecodeError as e:
        raise QueryError(f"request body is not valid JSON: {e}") from None


def create_app(config: ServiceConfig) -> FastAPI:
    state = AnalysisState(config)
    app = FastAPI(title="detourkit", version=__version__)
    app.state.analysis = state

    @app.get("/status")
    def status():
        return {
            "status": "ready",
            "version": __version__,
            "network": {"nodes": len(state.net.nodes), "segments": len(state.net.segments)},
            "corpus": {"trips": len(state.trips)},
            "counts": {"stations": sorted(state.counts)},
            "queries_cached": len(state._reports),
        }

    @app.post("/query")
    async def query(request: Request):
        try:
            doc_json = await _body_json(request)
            body, hit = state.run(doc_json)
        except UnknownGateError as e:
            return _error(404, "unknown_reference", str(e))
        except (QueryError, IngestError) as e:
            return _error(400, "invalid_query", str(e))
        except UnknownSegmentError as e:
            return _error(404, "unknown_reference", str(e))
        return Response(
            content=body,
            media_type="application/json",
            headers={"X-Cache": "hit" if hit else "miss"},
        )

    @app.post("/compare")
    async def compare(request: Request):
        try:
            body = await _body_json(request)
        except QueryError as e:
            return _error(400, "invalid_query", str(e))
        if not isinstance(body, dict) or "a" not in body or "b" not in body:
            return _error(400, "invalid_query", 'compare body needs "a" and "b" query hashes')
        tables = []
        for side in ("a", "b"):
            stored = state.cached_report(str(body[side]))
            if stored is None:
                return _error(404, "unknown_reference", f"no stored query result {body[side]!r}")
            tables.append(share_table_from_json(json.loads(stored)["share_table"]))
        return comparison_to_json(compare_periods(tables[0], tables[1]))

    @app.post("/validate")
    async def validate(request: Request):
        try:
            body = await _body_json(request)
            if not isinstance(body, dict):
                raise QueryError("validate body must be a JSON object")
            station_id = str(body.get("station_id", ""))
            if not station_id:
                raise QueryError('validate body needs a "station_id"')
            if "gate" not in body:
                raise QueryError('validate body needs a "gate"')
            gate = parse_gate(body["gate"])
        except QueryError as e:
            return _error(400, "invalid_query", str(e))
        records = state.counts.get(station_id)
        if records is None:
            return _error(404, "unknown_reference", f"no count station {station_id!r} loaded")
        tz = str(body.get("tz", config.tz))
        try:
            truth = daily_aggregate(records, CMV_CLASSES, tz)
            probe = probe_daily_counts(state.trips, gate, tz, station_id)
            result = weekly_correlations(probe, truth)
        except AnalyticsError as e:
            return _error(422, "no_overlap", str(e))
        except (ValueError, KeyError) as e:
            return _error(400, "invalid_query", str(e))
        return correlations_to_json(result)

    @app.get("/network")
    def network_extract(bbox: str = ""):
        if not bbox:
            return _error(400, "invalid_query", "bbox query parameter required: minlon,minlat,maxlon,maxlat")
        parts = bbox.split(",")
        try:
            min_lon, min_lat, max_lon, max_lat = (float(p) for p in parts)
        except ValueError:
            return _error(400, "invalid_query", f"malformed bbox {bbox!r}")
        ids = state.net.bbox_segments(min_lon, min_lat, max_lon, max_lat)
        segments = []
        for sid in sorted(ids):
            seg = state.net.segments[sid]
            segments.append(
                {
                    "segment_id": seg.id,
                    "name": seg.name,
                    "road_class": seg.road_class,
                    "length_m": seg.length_m,
                    "coords": [[x, y] for x, y in seg.coords],
                }
            )
        return {"count": len(segments), "segments": segments}

    return app


def serve(config: ServiceConfig) -> None:
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
