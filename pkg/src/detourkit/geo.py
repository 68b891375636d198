"""Planar-approximation geometry over WGS84 coordinates.

All distances use an equirectangular approximation of geodesic distance:
longitudes are scaled by cos(latitude) of a local anchor and both axes are
converted to meters with a spherical mean-Earth radius.  At corridor scale
(study areas under ~100 km) the error against true geodesics stays below
0.1%, which is far inside GPS noise.

Coordinate conventions: standalone scalars are (lat, lon) in degrees;
polylines and rings are sequences of (lon, lat) pairs, matching the
interchange-file axis order.
"""

from __future__ import annotations

import math

import numpy as np

EARTH_RADIUS_M = 6_371_008.8
METERS_PER_DEG = math.pi / 180.0 * EARTH_RADIUS_M  # ~111,195 m per degree of latitude


def distance_m(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Equirectangular distance in meters, anchored at the midpoint latitude."""
    kx = math.cos(math.radians(0.5 * (lat1 + lat2)))
    dy = (lat2 - lat1)
    dx = (lon2 - lon1) * kx
    return METERS_PER_DEG * math.hypot(dx, dy)


def polyline_length_m(coords) -> float:
    """Length of a (lon, lat) polyline in meters (sum of chord distances)."""
    total = 0.0
    for (lon1, lat1), (lon2, lat2) in zip(coords[:-1], coords[1:]):
        total += distance_m(lat1, lon1, lat2, lon2)
    return total


def chord_lengths_m(coords: np.ndarray) -> np.ndarray:
    """Per-chord lengths for an (n, 2) lon/lat array."""
    lat_mid = np.radians(0.5 * (coords[:-1, 1] + coords[1:, 1]))
    dx = (coords[1:, 0] - coords[:-1, 0]) * np.cos(lat_mid)
    dy = coords[1:, 1] - coords[:-1, 1]
    return METERS_PER_DEG * np.hypot(dx, dy)


def point_polyline_distance_m(lat: float, lon: float, coords: np.ndarray) -> float:
    """Minimum distance from a point to a (lon, lat) polyline, in meters.

    The projection is anchored at the query point so the same value is
    produced no matter which polyline is asked about.
    """
    d, _ = project_to_polyline(lat, lon, coords)
    return d


def project_to_polyline(lat: float, lon: float, coords: np.ndarray) -> tuple[float, float]:
    """Project a point onto a polyline.

    Returns (distance_m, offset_m): the minimum distance and the chainage
    along the polyline of the closest point.  Ties between chords resolve to
    the earliest chord.
    """
    kx = math.cos(math.radians(lat))
    xs = coords[:, 0] * kx
    ys = coords[:, 1]
    px = lon * kx
    py = lat

    ax, ay = xs[:-1], ys[:-1]
    bx, by = xs[1:], ys[1:]
    dx, dy = bx - ax, by - ay
    seg_sq = dx * dx + dy * dy
    # degenerate chords project onto their start vertex
    t = np.where(seg_sq > 0.0, ((px - ax) * dx + (py - ay) * dy) / np.where(seg_sq > 0.0, seg_sq, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    cx = ax + t * dx
    cy = ay + t * dy
    dist = np.hypot(px - cx, py - cy) * METERS_PER_DEG

    i = int(np.argmin(dist))
    chords = chord_lengths_m(coords)
    cum = np.concatenate(([0.0], np.cumsum(chords)))
    offset = cum[i] + float(t[i]) * chords[i]
    return float(dist[i]), float(offset)


def interpolate_along(coords: np.ndarray, offset_m: float) -> tuple[float, float]:
    """Point (lat, lon) at a given chainage along a (lon, lat) polyline."""
    chords = chord_lengths_m(coords)
    cum = np.concatenate(([0.0], np.cumsum(chords)))
    total = cum[-1]
    if offset_m <= 0.0 or total == 0.0:
        return float(coords[0, 1]), float(coords[0, 0])
    if offset_m >= total:
        return float(coords[-1, 1]), float(coords[-1, 0])
    i = int(np.searchsorted(cum, offset_m, side="right")) - 1
    i = min(i, len(chords) - 1)
    t = (offset_m - cum[i]) / chords[i] if chords[i] > 0 else 0.0
    lon = coords[i, 0] + t * (coords[i + 1, 0] - coords[i, 0])
    lat = coords[i, 1] + t * (coords[i + 1, 1] - coords[i, 1])
    return float(lat), float(lon)


def segment_intersection(p, q, a, b):
    """Intersection of segments p->q and a->b given as (lon, lat) pairs.

    Returns (u, v): parameters along p->q and a->b in [0, 1], or None when
    the segments do not meet.  Parallel and collinear pairs return None (no
    transversal crossing exists).  Computed directly in degree space; the
    lon/lat anisotropy is an affine scaling, which preserves intersections
    and parameters.
    """
    rx, ry = q[0] - p[0], q[1] - p[1]
    sx, sy = b[0] - a[0], b[1] - a[1]
    denom = rx * sy - ry * sx
    if denom == 0.0:
        return None
    wx, wy = a[0] - p[0], a[1] - p[1]
    u = (wx * sy - wy * sx) / denom
    v = (wx * ry - wy * rx) / denom
    if -0.0 <= u <= 1.0 and -0.0 <= v <= 1.0:
        return u, v
    return None


def cross_sign(d, c) -> int:
    """Sign of the 2D cross product of direction d with vector c."""
    z = d[0] * c[1] - d[1] * c[0]
    if z > 0.0:
        return 1
    if z < 0.0:
        return -1
    return 0


def point_in_ring(lat: float, lon: float, ring) -> bool:
    """Point-in-polygon for a closed (lon, lat) ring; boundary counts inside."""
    n = len(ring)
    # boundary check first: ray casting is unreliable exactly on edges
    for i in range(n - 1):
        if _on_segment((lon, lat), ring[i], ring[i + 1]):
            return True
    inside = False
    for i in range(n - 1):
        x1, y1 = ring[i]
        x2, y2 = ring[i + 1]
        if (y1 > lat) != (y2 > lat):
            x_at = x1 + (lat - y1) / (y2 - y1) * (x2 - x1)
            if x_at > lon:
                inside = not inside
    return inside


def _on_segment(p, a, b, eps: float = 1e-12) -> bool:
    cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
    if abs(cross) > eps:
        return False
    dot = (p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])
    sq = (b[0] - a[0]) ** 2 + (b[1] - a[1]) ** 2
    return -eps <= dot <= sq + eps


def ring_is_closed(ring) -> bool:
    return len(ring) >= 4 and tuple(ring[0]) == tuple(ring[-1])


def ring_self_intersects(ring) -> bool:
    """True when any two non-adjacent edges of the closed ring cross."""
    n = len(ring) - 1
    for i in range(n):
        for j in range(i + 1, n):
            if j == i or j == (i + 1) % n or (j + 1) % n == i:
                continue
            if segment_intersection(ring[i], ring[i + 1], ring[j], ring[j + 1]) is not None:
                return True
    return False


def ring_area_deg2(ring) -> float:
    """Unsigned shoelace area of the ring in squared degrees."""
    total = 0.0
    for i in range(len(ring) - 1):
        x1, y1 = ring[i]
        x2, y2 = ring[i + 1]
        total += x1 * y2 - x2 * y1
    return abs(total) * 0.5
