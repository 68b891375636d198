"""Route signatures and folding.

A trip's route signature is its matched path clipped to the span between
its first and last gate crossings.  Signatures that are essentially the
same pathway fold into one RouteSet under a length-weighted Jaccard
similarity, so a trip with a few missing or extra segments still lands in
the canonical route it belongs to.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .gates import TripSetEntry
from .matching import MatchedTrip
from .network import RoadNetwork


@dataclass
class RouteSignature:
    trip_id: str
    segs: list[str]
    length_m: float


@dataclass
class RouteSet:
    route_id: str
    canonical: list[str]
    label: str
    members: list[str]
    fold_scores: list[float]


def extract_signature(mt: MatchedTrip, entry: TripSetEntry, net: RoadNetwork) -> RouteSignature | None:
    """Clip a matched path to the trip's gate-crossing span.

    Keeps steps whose [entry, exit] interval touches [first crossing, last
    crossing].  Returns None when the clip is empty, which means the
    matched path and the crossing window disagree; callers report those
    trips instead of folding them.
    """
    t_lo = entry.times[0]
    t_hi = entry.times[-1]
    if t_hi < t_lo:
        t_lo, t_hi = t_hi, t_lo
    segs = [s.segment_id for s in mt.path if s.entry_time <= t_hi and s.exit_time >= t_lo]
    if not segs:
        return None
    return RouteSignature(
        trip_id=mt.trip_id,
        segs=segs,
        length_m=sum(net.segment(s).length_m for s in segs),
    )


def similarity(net: RoadNetwork, a_segs, b_segs) -> float:
    """Length-weighted Jaccard over segment-id sets: shared length / union length."""
    sa = set(a_segs)
    sb = set(b_segs)
    union = sa | sb
    if not union:
        return 0.0
    shared = sa & sb
    shared_len = sum(net.segment(s).length_m for s in shared)
    union_len = sum(net.segment(s).length_m for s in union)
    return shared_len / union_len if union_len > 0 else 0.0


def fold_routes(net: RoadNetwork, sigs: list[RouteSignature], theta: float = 0.9) -> list[RouteSet]:
    """Greedy longest-first agglomeration of signatures into RouteSets.

    Signatures are processed in descending length (ties by trip_id) and
    each joins the first existing RouteSet whose canonical path is at
    least theta-similar, otherwise founds a new set with itself as the
    canonical.  The longest member of a pathway is the likeliest to be
    gap-free, so it becomes the canonical the others fold into.
    """
    if not (0.0 < theta <= 1.0):
        raise ValueError("theta must be in (0, 1]")
    seg_len: dict[str, float] = {}

    def set_length(ids: set[str]) -> float:
        total = 0.0
        for s in ids:
            v = seg_len.get(s)
            if v is None:
                v = net.segment(s).length_m
                seg_len[s] = v
            total += v
        return total

    route_sets: list[RouteSet] = []
    canons: list[tuple[set[str], float]] = []
    for sig in sorted(sigs, key=lambda s: (-s.length_m, s.trip_id)):
        sig_set = set(sig.segs)
        sig_len = set_length(sig_set)
        joined = False
        for rs, (canon_set, canon_len) in zip(route_sets, canons):
            shared = set_length(sig_set & canon_set)
            union = sig_len + canon_len - shared
            sim = shared / union if union > 0 else 0.0
            if sim >= theta:
                rs.members.append(sig.trip_id)
                rs.fold_scores.append(sim)
                joined = True
                break
        if not joined:
            rs = RouteSet(
                route_id=f"route-{len(route_sets) + 1:03d}",
                canonical=list(sig.segs),
                label="",
                members=[sig.trip_id],
                fold_scores=[1.0],
            )
            route_sets.append(rs)
            canons.append((sig_set, sig_len))
    for rs in route_sets:
        rs.label = label_route(rs, net)
    return route_sets


def dominant_name(net: RoadNetwork, segs) -> str:
    """Road name with the greatest total length share, ties lexicographic."""
    by_name: dict[str, float] = {}
    for sid in segs:
        seg = net.segment(sid)
        if seg.name:
            by_name[seg.name] = by_name.get(seg.name, 0.0) + seg.length_m
    if not by_name:
        return "unnamed"
    return min(by_name, key=lambda n: (-by_name[n], n))


def label_route(rs: RouteSet, net: RoadNetwork) -> str:
    return dominant_name(net, rs.canonical)


# -- persistence ----------------------------------------------------------------


def routesets_to_json(route_sets: list[RouteSet]) -> list[dict]:
    return [
        {
            "route_id": rs.route_id,
            "label": rs.label,
            "canonical": list(rs.canonical),
            "members": list(rs.members),
            "fold_scores": [round(s, 6) for s in rs.fold_scores],
        }
        for rs in route_sets
    ]


def routesets_from_json(rows: list[dict]) -> list[RouteSet]:
    return [
        RouteSet(
            route_id=r["route_id"],
            canonical=list(r["canonical"]),
            label=r.get("label", ""),
            members=list(r["members"]),
            fold_scores=[float(x) for x in r.get("fold_scores", [])],
        )
        for r in rows
    ]


def write_routesets(route_sets: list[RouteSet], path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(routesets_to_json(route_sets), f, indent=1)


def load_routesets(path) -> list[RouteSet]:
    with open(path, encoding="utf-8") as f:
        return routesets_from_json(json.load(f))
