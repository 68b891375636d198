"""Directed road network: loading, spatial index, nearest-segment queries,
and shortest paths.

Networks are loaded from a GeoJSON FeatureCollection (see docs/formats.md):
Point features are graph nodes, LineString features are road segments.
Bidirectional roads become two directed segments at load time, the reverse
twin carrying the ``:r`` id suffix.  A loaded network is immutable and all
queries are read-only, so one instance can serve any number of threads.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field

from .geo import METERS_PER_DEG, distance_m

ROAD_CLASSES = ("motorway", "trunk", "primary", "secondary", "tertiary", "ramp", "other")

REVERSE_SUFFIX = ":r"

# endpoint of a segment geometry must sit on its node within this tolerance
_ENDPOINT_TOL_M = 1.0


class NetworkError(Exception):
    """Base class for network loading/validation failures."""


class NetworkFormatError(NetworkError):
    """Malformed interchange file."""


class NetworkReferenceError(NetworkError):
    """Dangling node reference or duplicate identifier."""


class NetworkGeometryError(NetworkError):
    """Degenerate or inconsistent segment geometry."""


class UnknownSegmentError(NetworkError):
    """A query referenced a segment id that is not in the network."""


@dataclass(frozen=True)
class Node:
    id: str
    lat: float
    lon: float


@dataclass
class Segment:
    """One directed road segment with its polyline geometry."""

    id: str
    from_node: str
    to_node: str
    coords: list[tuple[float, float]]  # (lon, lat) vertices, >= 2
    length_m: float
    name: str
    road_class: str
    oneway: bool
    cum_m: list[float] = field(repr=False, default_factory=list)  # chainage at each vertex
    # per-chord projection constants, built lazily: (ax, ay, dx, dy, inv_sq, cum0, dcum)
    _chords: list[tuple] | None = field(default=None, repr=False, compare=False)
    _kx: float = field(default=0.0, repr=False, compare=False)

    def _build_chords(self) -> None:
        # Anchor the local plane at the segment's own mid latitude; over the
        # few hundred meters a candidate search spans, the cos factor is
        # indistinguishable from one anchored at the query point.
        mid_lat = 0.5 * (self.coords[0][1] + self.coords[-1][1])
        kx = math.cos(math.radians(mid_lat))
        chords = []
        cs = self.coords
        cum = self.cum_m
        for i in range(len(cs) - 1):
            ax = cs[i][0] * kx
            ay = cs[i][1]
            dx = cs[i + 1][0] * kx - ax
            dy = cs[i + 1][1] - ay
            sq = dx * dx + dy * dy
            inv = 1.0 / sq if sq > 0.0 else 0.0
            chords.append((ax, ay, dx, dy, inv, cum[i], cum[i + 1] - cum[i]))
        self._kx = kx
        self._chords = chords

    def distance_and_offset(self, lat: float, lon: float) -> tuple[float, float]:
        """Distance from a point to this polyline and chainage of the foot.

        Pure-Python hot path over precomputed per-chord constants; ties
        between adjacent chords keep the earlier chord's projection.
        """
        if self._chords is None:
            self._build_chords()
        px = lon * self._kx
        py = lat
        best_d2 = math.inf
        best_off = 0.0
        for ax, ay, dx, dy, inv, cum0, dcum in self._chords:
            t = ((px - ax) * dx + (py - ay) * dy) * inv
            if t < 0.0:
                t = 0.0
            elif t > 1.0:
                t = 1.0
            cx = ax + t * dx - px
            cy = ay + t * dy - py
            d2 = cx * cx + cy * cy
            if d2 < best_d2:
                best_d2 = d2
                best_off = cum0 + t * dcum
        return math.sqrt(best_d2) * METERS_PER_DEG, best_off


class _GridIndex:
    """Uniform degree-grid over segment chord bounding boxes.

    Conservative pruning only: every segment within ``radius_m`` of a query
    point is guaranteed to appear among the candidates; exact distances are
    recomputed by the caller.
    """

    def __init__(self, segments: dict[str, Segment], cell_deg: float = 0.0015):
        self.cell = cell_deg
        self.buckets: dict[tuple[int, int], list[str]] = {}
        for seg in segments.values():
            seen: set[tuple[int, int]] = set()
            cs = seg.coords
            for i in range(len(cs) - 1):
                x1, y1 = cs[i]
                x2, y2 = cs[i + 1]
                for cello in self._cells(min(x1, x2), min(y1, y2), max(x1, x2), max(y1, y2)):
                    if cello not in seen:
                        seen.add(cello)
                        self.buckets.setdefault(cello, []).append(seg.id)

    def _cells(self, minx, miny, maxx, maxy):
        c = self.cell
        for ix in range(math.floor(minx / c), math.floor(maxx / c) + 1):
            for iy in range(math.floor(miny / c), math.floor(maxy / c) + 1):
                yield ix, iy

    def candidates(self, lat: float, lon: float, radius_m: float) -> list[str]:
        pad_lat = radius_m / METERS_PER_DEG + 1e-9
        coslat = max(math.cos(math.radians(lat)), 1e-9)
        pad_lon = radius_m / (METERS_PER_DEG * coslat) + 1e-9
        out: list[str] = []
        seen: set[str] = set()
        for cell in self._cells(lon - pad_lon, lat - pad_lat, lon + pad_lon, lat + pad_lat):
            for sid in self.buckets.get(cell, ()):
                if sid not in seen:
                    seen.add(sid)
                    out.append(sid)
        return out


class _DijkstraState:
    """Resumable single-source Dijkstra over nodes, grown on demand."""

    __slots__ = ("final", "parent", "heap", "bound")

    def __init__(self, source: str):
        self.final: dict[str, float] = {}
        self.parent: dict[str, tuple[str, str]] = {}  # node -> (prev node, seg id)
        self.heap: list[tuple[float, str, str, str]] = [(0.0, source, "", "")]
        self.bound = 0.0

    def expand(self, adjacency, target: str | None = None, cutoff: float | None = None) -> None:
        final = self.final
        heap = self.heap
        while heap:
            if target is not None and target in final:
                return
            d = heap[0][0]
            if cutoff is not None and d > cutoff:
                self.bound = cutoff
                return
            d, node, prev, seg = heapq.heappop(heap)
            if node in final:
                continue
            final[node] = d
            self.bound = d
            if prev:
                self.parent[node] = (prev, seg)
            for nxt, length, sid in adjacency.get(node, ()):
                if nxt not in final:
                    heapq.heappush(heap, (d + length, nxt, node, sid))


class RoadNetwork:
    """Immutable directed road graph with a spatial index."""

    def __init__(self, nodes: dict[str, Node], segments: dict[str, Segment]):
        self.nodes = nodes
        self.segments = segments
        # adjacency sorted by (length, id) so equal-cost relaxations settle on
        # the lowest segment id deterministically
        self.out_segments: dict[str, list[tuple[str, float, str]]] = {}
        for seg in segments.values():
            self.out_segments.setdefault(seg.from_node, []).append((seg.to_node, seg.length_m, seg.id))
        for lst in self.out_segments.values():
            lst.sort(key=lambda e: (e[1], e[2]))
        self._index = _GridIndex(segments)
        self._dijkstra_cache: dict[str, _DijkstraState] = {}
        self._reverse_twin: dict[str, str] = {}
        for sid, seg in segments.items():
            twin = sid[: -len(REVERSE_SUFFIX)] if sid.endswith(REVERSE_SUFFIX) else sid + REVERSE_SUFFIX
            if twin in segments:
                self._reverse_twin[sid] = twin

    # -- queries ----------------------------------------------------------

    def segment(self, seg_id: str) -> Segment:
        try:
            return self.segments[seg_id]
        except KeyError:
            raise UnknownSegmentError(f"unknown segment id: {seg_id!r}") from None

    def reverse_twin(self, seg_id: str) -> str | None:
        """Id of the opposite-direction twin of a bidirectional segment."""
        self.segment(seg_id)
        return self._reverse_twin.get(seg_id)

    def nearest_segments(self, lat: float, lon: float, radius_m: float, k: int) -> list[tuple[str, float]]:
        """Up to k segments within radius_m, ascending by (distance, id)."""
        if radius_m <= 0:
            raise ValueError("radius_m must be positive")
        if k < 1:
            raise ValueError("k must be >= 1")
        hits = []
        for sid in self._index.candidates(lat, lon, radius_m):
            d, _ = self.segments[sid].distance_and_offset(lat, lon)
            if d <= radius_m:
                hits.append((sid, d))
        hits.sort(key=lambda h: (h[1], h[0]))
        return hits[:k]

    def locate(self, lat: float, lon: float, radius_m: float, k: int) -> list[tuple[str, float, float]]:
        """Like nearest_segments but also returns the chainage of the foot."""
        hits = []
        for sid in self._index.candidates(lat, lon, radius_m):
            d, off = self.segments[sid].distance_and_offset(lat, lon)
            if d <= radius_m:
                hits.append((sid, d, off))
        hits.sort(key=lambda h: (h[1], h[0]))
        return hits[:k]

    def node_distance(self, from_node: str, to_node: str, cutoff: float | None = None) -> float | None:
        """Shortest on-network distance between two nodes, or None.

        With a cutoff the answer is exact when it is <= cutoff and None
        otherwise; states are cached per source and grown on demand.
        """
        state = self._dijkstra_cache.get(from_node)
        if state is None:
            state = _DijkstraState(from_node)
            self._dijkstra_cache[from_node] = state
        if to_node not in state.final:
            if cutoff is not None and state.bound >= cutoff and not _heap_below(state.heap, cutoff):
                return None
            state.expand(self.out_segments, target=to_node, cutoff=cutoff)
        return state.final.get(to_node)

    def shortest_path(self, from_seg: str, to_seg: str) -> list[str] | None:
        """Minimum-total-length directed segment path, or None if unreachable."""
        a = self.segment(from_seg)
        b = self.segment(to_seg)
        if from_seg == to_seg:
            return [from_seg]
        state = self._dijkstra_cache.get(a.to_node)
        if state is None:
            state = _DijkstraState(a.to_node)
            self._dijkstra_cache[a.to_node] = state
        state.expand(self.out_segments, target=b.from_node)
        if b.from_node not in state.final:
            return None
        mids: list[str] = []
        node = b.from_node
        while node != a.to_node:
            prev, sid = state.parent[node]
            mids.append(sid)
            node = prev
        mids.reverse()
        return [from_seg, *mids, to_seg]

    def node_path(self, from_node: str, to_node: str, banned: frozenset[str] = frozenset()) -> list[str] | None:
        """Minimum-length segment chain from one node to another.

        With a non-empty banned set the search runs uncached on the reduced
        graph (used for closure rerouting); otherwise it shares the cached
        Dijkstra states.
        """
        for nid in (from_node, to_node):
            if nid not in self.nodes:
                raise NetworkError(f"unknown node id: {nid!r}")
        if from_node == to_node:
            return []
        if banned:
            adjacency = {
                node: [e for e in edges if e[2] not in banned] for node, edges in self.out_segments.items()
            }
            state = _DijkstraState(from_node)
            state.expand(adjacency, target=to_node)
        else:
            state = self._dijkstra_cache.get(from_node)
            if state is None:
                state = _DijkstraState(from_node)
                self._dijkstra_cache[from_node] = state
            state.expand(self.out_segments, target=to_node)
        if to_node not in state.final:
            return None
        segs: list[str] = []
        node = to_node
        while node != from_node:
            prev, sid = state.parent[node]
            segs.append(sid)
            node = prev
        segs.reverse()
        return segs

    def path_length_m(self, seg_ids) -> float:
        return sum(self.segment(s).length_m for s in seg_ids)

    def bbox_segments(self, min_lon: float, min_lat: float, max_lon: float, max_lat: float) -> list[str]:
        """Ids of segments whose geometry has a vertex inside the box."""
        out = []
        for sid, seg in self.segments.items():
            if any(min_lon <= x <= max_lon and min_lat <= y <= max_lat for x, y in seg.coords):
                out.append(sid)
        return out


def _heap_below(heap, cutoff: float) -> bool:
    return bool(heap) and heap[0][0] <= cutoff


# -- loading ---------------------------------------------------------------


def load_network(path) -> RoadNetwork:
    """Load and validate a network interchange file."""
    try:
        with open(path, encoding="utf-8") as f:
            obj = json.load(f)
    except FileNotFoundError:
        raise
    except (OSError, json.JSONDecodeError) as e:
        raise NetworkFormatError(f"cannot read network file {path}: {e}") from e
    return network_from_geojson(obj)


def network_from_geojson(obj) -> RoadNetwork:
    """Build a RoadNetwork from a parsed interchange FeatureCollection."""
    if not isinstance(obj, dict) or obj.get("type") != "FeatureCollection":
        raise NetworkFormatError("network file must be a FeatureCollection")
    features = obj.get("features")
    if not isinstance(features, list):
        raise NetworkFormatError("FeatureCollection has no features list")

    nodes: dict[str, Node] = {}
    lines: list[dict] = []
    for feat in features:
        geom = feat.get("geometry") or {}
        gtype = geom.get("type")
        props = feat.get("properties") or {}
        if gtype == "Point":
            nid = _require_id(props, "node")
            if nid in nodes:
                raise NetworkReferenceError(f"duplicate node id {nid!r}")
            lon, lat = _point_coords(geom)
            if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
                raise NetworkGeometryError(f"node {nid!r} has out-of-range coordinates")
            nodes[nid] = Node(id=nid, lat=lat, lon=lon)
        elif gtype == "LineString":
            lines.append(feat)
        else:
            raise NetworkFormatError(f"unsupported feature geometry type: {gtype!r}")

    segments: dict[str, Segment] = {}
    for feat in lines:
        props = feat.get("properties") or {}
        sid = _require_id(props, "segment")
        coords = feat["geometry"].get("coordinates")
        if not isinstance(coords, list) or len(coords) < 2:
            raise NetworkGeometryError(f"segment {sid!r} needs a polyline of >= 2 points")
        coords = [(float(x), float(y)) for x, y in coords]
        from_id = props.get("from")
        to_id = props.get("to")
        for ref in (from_id, to_id):
            if ref not in nodes:
                raise NetworkReferenceError(f"segment {sid!r} references missing node {ref!r}")
        name = str(props.get("name", "") or "")
        road_class = props.get("class", "other")
        if road_class not in ROAD_CLASSES:
            road_class = "other"
        oneway = bool(props.get("oneway", False))

        _check_endpoint(sid, coords[0], nodes[from_id])
        _check_endpoint(sid, coords[-1], nodes[to_id])

        _add_segment(segments, sid, from_id, to_id, coords, name, road_class, oneway)
        if not oneway:
            rid = sid + REVERSE_SUFFIX
            _add_segment(segments, rid, to_id, from_id, list(reversed(coords)), name, road_class, oneway)

    return RoadNetwork(nodes, segments)


def _add_segment(segments, sid, from_id, to_id, coords, name, road_class, oneway):
    if sid in segments:
        raise NetworkReferenceError(f"duplicate segment id {sid!r}")
    cum = [0.0]
    for (x1, y1), (x2, y2) in zip(coords[:-1], coords[1:]):
        cum.append(cum[-1] + distance_m(y1, x1, y2, x2))
    length = cum[-1]
    if length <= 0.0:
        raise NetworkGeometryError(f"segment {sid!r} has zero length")
    segments[sid] = Segment(
        id=sid,
        from_node=from_id,
        to_node=to_id,
        coords=coords,
        length_m=length,
        name=name,
        road_class=road_class,
        oneway=oneway,
        cum_m=cum,
    )


def _check_endpoint(sid, coord, node: Node):
    d = distance_m(coord[1], coord[0], node.lat, node.lon)
    if d > _ENDPOINT_TOL_M:
        raise NetworkGeometryError(
            f"segment {sid!r} endpoint is {d:.1f} m from node {node.id!r} (tolerance {_ENDPOINT_TOL_M} m)"
        )


def _require_id(props, kind):
    val = props.get("id")
    if val is None or val == "":
        raise NetworkFormatError(f"{kind} feature is missing an id")
    return str(val)


def _point_coords(geom):
    coords = geom.get("coordinates")
    if not isinstance(coords, (list, tuple)) or len(coords) < 2:
        raise NetworkFormatError("Point feature has malformed coordinates")
    return float(coords[0]), float(coords[1])
