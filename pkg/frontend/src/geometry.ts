/** Planar helpers for drafting geometry and the map pane. */

import type { LonLat } from './types';

/** Web Mercator projection to world pixels at a given zoom (256px tiles). */
export function project(lon: number, lat: number, zoom: number): [number, number] {
  const scale = 256 * Math.pow(2, zoom);
  const x = ((lon + 180) / 360) * scale;
  const sinLat = Math.sin((lat * Math.PI) / 180);
  const y = (0.5 - Math.log((1 + sinLat) / (1 - sinLat)) / (4 * Math.PI)) * scale;
  return [x, y];
}

export function unproject(x: number, y: number, zoom: number): LonLat {
  const scale = 256 * Math.pow(2, zoom);
  const lon = (x / scale) * 360 - 180;
  const n = Math.PI - (2 * Math.PI * y) / scale;
  const lat = (180 / Math.PI) * Math.atan(0.5 * (Math.exp(n) - Math.exp(-n)));
  return [lon, lat];
}

export interface Bounds {
  minLon: number;
  minLat: number;
  maxLon: number;
  maxLat: number;
}

export function boundsOf(points: Iterable<LonLat>): Bounds | null {
  let b: Bounds | null = null;
  for (const [lon, lat] of points) {
    if (b === null) {
      b = { minLon: lon, minLat: lat, maxLon: lon, maxLat: lat };
    } else {
      b.minLon = Math.min(b.minLon, lon);
      b.minLat = Math.min(b.minLat, lat);
      b.maxLon = Math.max(b.maxLon, lon);
      b.maxLat = Math.max(b.maxLat, lat);
    }
  }
  return b;
}

function orient(p: LonLat, q: LonLat, r: LonLat): number {
  const v = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
  if (v > 0) return 1;
  if (v < 0) return -1;
  return 0;
}

function onSegment(p: LonLat, q: LonLat, r: LonLat): boolean {
  return (
    Math.min(p[0], r[0]) <= q[0] &&
    q[0] <= Math.max(p[0], r[0]) &&
    Math.min(p[1], r[1]) <= q[1] &&
    q[1] <= Math.max(p[1], r[1])
  );
}

/** True when segment ab crosses segment cd, endpoints included. */
export function segmentsIntersect(a: LonLat, b: LonLat, c: LonLat, d: LonLat): boolean {
  const o1 = orient(a, b, c);
  const o2 = orient(a, b, d);
  const o3 = orient(c, d, a);
  const o4 = orient(c, d, b);
  if (o1 !== o2 && o3 !== o4) return true;
  if (o1 === 0 && onSegment(a, c, b)) return true;
  if (o2 === 0 && onSegment(a, d, b)) return true;
  if (o3 === 0 && onSegment(c, a, d)) return true;
  if (o4 === 0 && onSegment(c, b, d)) return true;
  return false;
}

/**
 * Self-intersection test for a ring given as its distinct vertices
 * (closing edge back to the first vertex is implied).  Adjacent edges
 * sharing one endpoint do not count.
 */
export function ringSelfIntersects(vertices: LonLat[]): boolean {
  const n = vertices.length;
  if (n < 4) return false;
  const edge = (i: number): [LonLat, LonLat] => [vertices[i], vertices[(i + 1) % n]];
  for (let i = 0; i < n; i++) {
    for (let j = i + 1; j < n; j++) {
      if (j === i + 1 || (i === 0 && j === n - 1)) continue;
      const [a, b] = edge(i);
      const [c, d] = edge(j);
      if (segmentsIntersect(a, b, c, d)) return true;
    }
  }
  return false;
}

/** Twice the signed area of a ring given as distinct vertices. */
export function ringArea2(vertices: LonLat[]): number {
  let s = 0;
  for (let i = 0; i < vertices.length; i++) {
    const [x1, y1] = vertices[i];
    const [x2, y2] = vertices[(i + 1) % vertices.length];
    s += x1 * y2 - x2 * y1;
  }
  return s;
}

/** Point at half the cumulative length of a polyline, with the local heading. */
export function midpointWithHeading(line: LonLat[]): { point: LonLat; headingDeg: number } {
  let total = 0;
  const lens: number[] = [];
  for (let i = 0; i + 1 < line.length; i++) {
    const dx = line[i + 1][0] - line[i][0];
    const dy = line[i + 1][1] - line[i][1];
    const l = Math.hypot(dx, dy);
    lens.push(l);
    total += l;
  }
  let target = total / 2;
  for (let i = 0; i < lens.length; i++) {
    if (target <= lens[i] || i === lens.length - 1) {
      const t = lens[i] > 0 ? target / lens[i] : 0;
      const [x1, y1] = line[i];
      const [x2, y2] = line[i + 1];
      const heading = (Math.atan2(y2 - y1, x2 - x1) * 180) / Math.PI;
      return { point: [x1 + t * (x2 - x1), y1 + t * (y2 - y1)], headingDeg: heading };
    }
    target -= lens[i];
  }
  return { point: line[0], headingDeg: 0 };
}
