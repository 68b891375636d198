"""Conflate probe trips onto the road network.

A sequence-alignment matcher over directed segments: per-waypoint candidate
segments score a Gaussian emission term in point-to-segment distance, and
waypoint-to-waypoint transitions are penalized by how much the on-network
route between the two projections exceeds the straight-line hop.  The best
state sequence is recovered per maximal connectable run; runs separated by
larger gaps are stitched by shortest path when the fill is short enough
relative to the gap, otherwise the trip is split and the piece with the
most waypoints is kept.

Ties in likelihood break toward ascending segment id, so output is fully
deterministic.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timedelta

import numpy as np

from .geo import distance_m
from .ingest import Trip, format_timestamp, parse_timestamp
from .network import RoadNetwork

MAX_CANDIDATES = 8  # states kept per waypoint
TRANSITION_WEIGHT = 15.0  # log-likelihood cost per unit of route/straight excess
BACKTRACK_SLACK_M = 30.0  # tolerated on-segment regression from GPS jitter
ROUTE_CUTOFF_FACTOR = 4.0  # transition search limit, in units of the straight hop
ROUTE_CUTOFF_FLOOR_M = 800.0

REJECT_TOO_FEW = "too_few_waypoints"
REJECT_NO_CANDIDATES = "no_candidates"


@dataclass(frozen=True)
class MatchParams:
    candidate_radius_m: float = 50.0
    max_gap_fill_ratio: float = 1.5
    min_waypoints: int = 2
    emission_sigma_m: float = 15.0

    def validate(self) -> None:
        if min(self.candidate_radius_m, self.max_gap_fill_ratio, self.min_waypoints, self.emission_sigma_m) <= 0:
            raise ValueError("all matching parameters must be positive")


@dataclass
class PathStep:
    segment_id: str
    entry_time: datetime
    exit_time: datetime
    inferred: bool


@dataclass
class MatchedTrip:
    trip_id: str
    path: list[PathStep]
    unmatched_fraction: float


@dataclass
class Rejection:
    trip_id: str
    reason: str


@dataclass
class _State:
    seg_id: str
    dist_m: float
    offset_m: float
    score: float = 0.0
    prev: int = -1  # index into previous waypoint's state list


def _route_distance(net: RoadNetwork, a: _State, b: _State, cutoff: float) -> float | None:
    """Directed on-network distance between two projected points."""
    sa = net.segment(a.seg_id)
    if a.seg_id == b.seg_id:
        d = b.offset_m - a.offset_m
        if d >= -BACKTRACK_SLACK_M:
            return max(d, 0.0)
        # regression beyond jitter: only a loop back onto the segment explains it
        loop = net.node_distance(sa.to_node, sa.from_node, cutoff=cutoff)
        if loop is None:
            return None
        return (sa.length_m - a.offset_m) + loop + b.offset_m
    sb = net.segment(b.seg_id)
    mid = net.node_distance(sa.to_node, sb.from_node, cutoff=cutoff)
    if mid is None:
        return None
    return (sa.length_m - a.offset_m) + mid + b.offset_m


def _fill_between(net: RoadNetwork, a: _State, b: _State) -> list[str] | None:
    """Intermediate segment ids between two states (may repeat a.seg_id)."""
    sa = net.segment(a.seg_id)
    if a.seg_id == b.seg_id:
        if b.offset_m - a.offset_m >= -BACKTRACK_SLACK_M:
            return []
        loop = net.node_path(sa.to_node, sa.from_node)
        return None if loop is None else loop + [b.seg_id]
    sb = net.segment(b.seg_id)
    return net.node_path(sa.to_node, sb.from_node)


def match_trip(trip: Trip, net: RoadNetwork, params: MatchParams = MatchParams()) -> MatchedTrip | Rejection:
    params.validate()
    wps = trip.waypoints
    if len(wps) < params.min_waypoints:
        return Rejection(trip.trip_id, REJECT_TOO_FEW)

    # candidate (seg_id, dist, offset) tuples per waypoint; none -> skipped
    usable: list[int] = []
    candidates: list[list[tuple[str, float, float]]] = []
    for i, w in enumerate(wps):
        found = net.locate(w.lat, w.lon, params.candidate_radius_m, MAX_CANDIDATES)
        if found:
            found.sort(key=lambda h: h[0])  # ascending segment id for tie order
            candidates.append(found)
            usable.append(i)
    if not usable:
        return Rejection(trip.trip_id, REJECT_NO_CANDIDATES)

    runs = _viterbi_runs(net, wps, usable, candidates, params)
    pieces = _stitch_runs(net, wps, runs, params)
    piece = max(pieces, key=lambda p: (len(p["wp_idx"]), -p["wp_idx"][0]))

    steps, wp_instance = _assemble_steps(net, piece)
    steps, wp_instance = _trim_endpoints(net, piece, steps, wp_instance, params.emission_sigma_m)
    path = _time_steps(net, wps, piece, steps, wp_instance)
    matched_wp = len(piece["wp_idx"])
    return MatchedTrip(
        trip_id=trip.trip_id,
        path=path,
        unmatched_fraction=round(1.0 - matched_wp / len(wps), 9),
    )


def _viterbi_runs(net, wps, usable, candidates, params):
    """Best state sequences over maximal connectable waypoint runs.

    Returns a list of runs, each {"wp_idx": [...waypoint indices...],
    "states": [...one chosen _State per index...]}.
    """
    inv_two_sigma2 = 0.5 / (params.emission_sigma_m**2)
    neg_inf = -math.inf
    node_distance = net.node_distance
    segment = net.segment
    seg_info: dict[str, tuple[str, str, float]] = {}

    def info(sid):
        got = seg_info.get(sid)
        if got is None:
            s = segment(sid)
            got = (s.from_node, s.to_node, s.length_m)
            seg_info[sid] = got
        return got

    runs = []
    # per layer: (candidate tuples, chosen prev index per candidate)
    layer_trace: list[tuple[list, list]] = []
    cands: list[tuple[str, float, float]] = []
    scores: list[float] = []
    run_wp: list[int] = []

    def close_run():
        if not run_wp:
            return
        best_i = 0
        for i in range(1, len(scores)):
            if scores[i] > scores[best_i]:
                best_i = i
        seq = []
        i = best_i
        for layer_cands, prevs in reversed(layer_trace):
            sid, dist, off = layer_cands[i]
            seq.append(_State(sid, dist, off))
            i = prevs[i]
        seq.reverse()
        runs.append({"wp_idx": list(run_wp), "states": seq})

    for pos, wp_i in enumerate(usable):
        nxt = candidates[pos]
        w = wps[wp_i]
        emissions = [-(d**2) * inv_two_sigma2 for _, d, _ in nxt]
        if not run_wp:
            cands, scores = nxt, emissions
            layer_trace = [(nxt, [-1] * len(nxt))]
            run_wp = [wp_i]
            continue
        prev_w = wps[run_wp[-1]]
        straight = max(distance_m(prev_w.lat, prev_w.lon, w.lat, w.lon), 1.0)
        cutoff = ROUTE_CUTOFF_FACTOR * straight + ROUTE_CUTOFF_FLOOR_M
        n_prev = len(cands)
        new_scores = []
        new_prevs = []
        alive = False
        for ci, (c_sid, _, c_off) in enumerate(nxt):
            e = emissions[ci]
            c_from = info(c_sid)[0]
            best = neg_inf
            best_j = -1
            for j in range(n_prev):
                ps = scores[j]
                if ps == neg_inf:
                    continue
                p_sid, _, p_off = cands[j]
                p_from, p_to, p_len = info(p_sid)
                if p_sid == c_sid:
                    delta = c_off - p_off
                    if delta >= -BACKTRACK_SLACK_M:
                        route = delta if delta > 0.0 else 0.0
                    else:
                        # regression beyond jitter: needs a loop back onto the segment
                        loop = node_distance(p_to, p_from, cutoff=cutoff)
                        if loop is None:
                            continue
                        route = (p_len - p_off) + loop + c_off
                else:
                    mid = node_distance(p_to, c_from, cutoff=cutoff)
                    if mid is None:
                        continue
                    route = (p_len - p_off) + mid + c_off
                score = ps + e - TRANSITION_WEIGHT * max(route / straight - 1.0, 0.0)
                if score > best:
                    best = score
                    best_j = j
            new_scores.append(best)
            new_prevs.append(best_j)
            if best_j >= 0:
                alive = True
        if alive:
            cands, scores = nxt, new_scores
            layer_trace.append((nxt, new_prevs))
            run_wp.append(wp_i)
        else:
            close_run()
            cands, scores = nxt, emissions
            layer_trace = [(nxt, [-1] * len(nxt))]
            run_wp = [wp_i]
    close_run()
    return runs


def _stitch_runs(net, wps, runs, params):
    """Join consecutive runs when a short network fill explains the gap."""
    pieces = []
    cur = None
    for run in runs:
        if cur is None:
            cur = {"wp_idx": list(run["wp_idx"]), "states": list(run["states"])}
            continue
        a = cur["states"][-1]
        b = run["states"][0]
        wa = wps[cur["wp_idx"][-1]]
        wb = wps[run["wp_idx"][0]]
        straight = max(distance_m(wa.lat, wa.lon, wb.lat, wb.lon), 1.0)
        limit = params.max_gap_fill_ratio * straight
        route = _route_distance(net, a, b, cutoff=limit + 1.0)
        if route is not None and route <= limit:
            cur["wp_idx"] += run["wp_idx"]
            cur["states"] += run["states"]
        else:
            pieces.append(cur)
            cur = {"wp_idx": list(run["wp_idx"]), "states": list(run["states"])}
    if cur is not None:
        pieces.append(cur)
    return pieces


def _assemble_steps(net, piece):
    """Expand chosen states into a contiguous segment-instance list.

    Returns (steps, wp_instance): steps are [segment id, inferred] pairs and
    wp_instance[k] is the step index waypoint k's projection belongs to.
    """
    states = piece["states"]
    steps: list[list] = [[states[0].seg_id, False]]
    wp_instance = [0]
    for k in range(1, len(states)):
        a, b = states[k - 1], states[k]
        mids = _fill_between(net, a, b)
        if mids is None:
            # stitched join already validated; fall back to unrestricted path
            mids = net.node_path(net.segment(a.seg_id).to_node, net.segment(b.seg_id).from_node) or []
        for sid in mids:
            steps.append([sid, True])
        same_instance = not mids and a.seg_id == b.seg_id
        if same_instance:
            wp_instance.append(len(steps) - 1)
        else:
            if mids and mids[-1] == b.seg_id:
                steps[-1][1] = False
                wp_instance.append(len(steps) - 1)
            else:
                steps.append([b.seg_id, False])
                wp_instance.append(len(steps) - 1)
    return steps, wp_instance


def _trim_endpoints(net, piece, steps, wp_instance, trim_m):
    """Drop first/last steps whose observed coverage is shorter than trim_m.

    A waypoint landing a few meters past a junction node is equally well
    explained by the end of one segment or the start of the next; such a
    sliver at either end of the path is projection ambiguity, not evidence
    the segment was driven.  Stranded waypoints get instance -1 and are
    simply left out of the timing table.
    """
    states = piece["states"]
    while len(steps) > 1:
        last = len(steps) - 1
        offs = [states[k].offset_m for k, inst in enumerate(wp_instance) if inst == last]
        if not offs or max(offs) >= trim_m:
            break
        steps.pop()
        wp_instance = [(-1 if inst == last else inst) for inst in wp_instance]
    while len(steps) > 1:
        seg_len = net.segment(steps[0][0]).length_m
        offs = [states[k].offset_m for k, inst in enumerate(wp_instance) if inst == 0]
        if not offs or seg_len - min(offs) >= trim_m:
            break
        steps.pop(0)
        wp_instance = [(-1 if inst == 0 else inst - 1) for inst in wp_instance]
    return steps, wp_instance


def _time_steps(net, wps, piece, steps, wp_instance):
    """Interpolate entry/exit times along the path chainage."""
    base = [0.0]
    for sid, _ in steps:
        base.append(base[-1] + net.segment(sid).length_m)
    xs: list[float] = []
    ts: list[float] = []
    t0 = wps[piece["wp_idx"][0]].t
    high = 0.0
    for k, wp_i in enumerate(piece["wp_idx"]):
        if wp_instance[k] < 0:
            continue
        st = piece["states"][k]
        chain = base[wp_instance[k]] + st.offset_m
        high = max(high, chain)  # monotonize against jitter regressions
        if not xs or high > xs[-1]:
            xs.append(high)
            ts.append((wps[wp_i].t - t0).total_seconds())
    path = []
    entries = np.interp(base[:-1], xs, ts)
    exits = np.interp(base[1:], xs, ts)
    for i, (sid, inferred) in enumerate(steps):
        path.append(
            PathStep(
                segment_id=sid,
                entry_time=t0 + timedelta(seconds=float(entries[i])),
                exit_time=t0 + timedelta(seconds=float(exits[i])),
                inferred=inferred,
            )
        )
    return path


# -- corpus -------------------------------------------------------------------

_POOL_CTX: dict = {}


def _pool_init(net, params):
    _POOL_CTX["net"] = net
    _POOL_CTX["params"] = params


def _pool_match(trip):
    return match_trip(trip, _POOL_CTX["net"], _POOL_CTX["params"])


def match_corpus(
    trips: list[Trip],
    net: RoadNetwork,
    params: MatchParams = MatchParams(),
    workers: int = 1,
) -> tuple[list[MatchedTrip], list[Rejection]]:
    """Match every trip; output order equals input order regardless of workers."""
    if workers <= 1 or len(trips) < 32:
        results = [match_trip(t, net, params) for t in trips]
    else:
        with ProcessPoolExecutor(max_workers=workers, initializer=_pool_init, initargs=(net, params)) as ex:
            results = list(ex.map(_pool_match, trips, chunksize=max(1, len(trips) // (workers * 8))))
    matched = [r for r in results if isinstance(r, MatchedTrip)]
    rejected = [r for r in results if isinstance(r, Rejection)]
    return matched, rejected


# -- persistence ---------------------------------------------------------------

_MATCH_COLUMNS = ["trip_id", "seq", "segment_id", "entry_time", "exit_time", "inferred"]


def write_matched(matched: list[MatchedTrip], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(_MATCH_COLUMNS)
        for mt in matched:
            for seq, step in enumerate(mt.path):
                w.writerow(
                    [
                        mt.trip_id,
                        seq,
                        step.segment_id,
                        format_timestamp(step.entry_time),
                        format_timestamp(step.exit_time),
                        "true" if step.inferred else "false",
                    ]
                )


def parse_matched(path) -> list[MatchedTrip]:
    """Read a matched-trip file; unmatched_fraction is not persisted (0.0)."""
    rows: dict[str, list[tuple[int, PathStep]]] = {}
    order: list[str] = []
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        for row in reader:
            tid = row["trip_id"]
            step = PathStep(
                segment_id=row["segment_id"],
                entry_time=parse_timestamp(row["entry_time"]),
                exit_time=parse_timestamp(row["exit_time"]),
                inferred=row["inferred"] == "true",
            )
            if tid not in rows:
                rows[tid] = []
                order.append(tid)
            rows[tid].append((int(row["seq"]), step))
    out = []
    for tid in order:
        steps = [s for _, s in sorted(rows[tid], key=lambda x: x[0])]
        out.append(MatchedTrip(trip_id=tid, path=steps, unmatched_fraction=0.0))
    return out
