/**
 * SVG map pane: slippy tiles behind the road network, the editable
 * draft geometry, and folded-route overlays.
 *
 * Tiles come from a {z}/{x}/{y} template in the config; with no
 * template configured (tests, offline use) the pane draws on a plain
 * background.  All drawing happens in world-pixel space at one fitted
 * zoom level, so layers share a single coordinate system.
 */

import { boundsOf, midpointWithHeading, project, unproject, type Bounds } from './geometry';
import type { DraftIssue, GateDraft, QueryDraft } from './draft';
import type { LonLat, NetworkExtract, RouteSetJson } from './types';
import { routeColor } from './results';

const SVG_NS = 'http://www.w3.org/2000/svg';
const TILE = 256;
const MAX_ZOOM = 19;

export interface MapConfig {
  tileUrl: string | null;
}

export interface ViewState {
  zoom: number;
  minX: number;
  minY: number;
  width: number;
  height: number;
}

export function fitView(bounds: Bounds, widthPx: number, heightPx: number): ViewState {
  let zoom = MAX_ZOOM;
  for (; zoom > 1; zoom--) {
    const [x1, y1] = project(bounds.minLon, bounds.maxLat, zoom);
    const [x2, y2] = project(bounds.maxLon, bounds.minLat, zoom);
    if (x2 - x1 <= widthPx * 0.9 && y2 - y1 <= heightPx * 0.9) break;
  }
  const [x1, y1] = project(bounds.minLon, bounds.maxLat, zoom);
  const [x2, y2] = project(bounds.maxLon, bounds.minLat, zoom);
  const cx = (x1 + x2) / 2;
  const cy = (y1 + y2) / 2;
  return {
    zoom,
    minX: cx - widthPx / 2,
    minY: cy - heightPx / 2,
    width: widthPx,
    height: heightPx,
  };
}

function pathOf(points: LonLat[], zoom: number): string {
  return points
    .map(([lon, lat], i) => {
      const [x, y] = project(lon, lat, zoom);
      return `${i === 0 ? 'M' : 'L'}${x.toFixed(1)} ${y.toFixed(1)}`;
    })
    .join(' ');
}

export class MapPane {
  private svg: SVGSVGElement;
  private layers: Record<'tiles' | 'network' | 'routes' | 'draft' | 'pending', SVGGElement>;
  private view: ViewState | null = null;
  private network: NetworkExtract | null = null;
  private segCoords = new Map<string, LonLat[]>();

  /** Invoked with the clicked map position while an edit mode is armed. */
  onVertex: ((point: LonLat) => void) | null = null;

  constructor(
    private readonly container: HTMLElement,
    private readonly config: MapConfig,
  ) {
    this.svg = document.createElementNS(SVG_NS, 'svg');
    this.svg.setAttribute('class', 'map-pane');
    this.layers = {
      tiles: document.createElementNS(SVG_NS, 'g'),
      network: document.createElementNS(SVG_NS, 'g'),
      routes: document.createElementNS(SVG_NS, 'g'),
      draft: document.createElementNS(SVG_NS, 'g'),
      pending: document.createElementNS(SVG_NS, 'g'),
    };
    for (const layer of Object.values(this.layers)) this.svg.appendChild(layer);
    this.svg.addEventListener('click', (evt) => {
      if (this.onVertex === null) return;
      const point = this.eventLonLat(evt as MouseEvent);
      if (point) this.onVertex(point);
    });
    container.appendChild(this.svg);
  }

  private paneSize(): [number, number] {
    const rect = this.container.getBoundingClientRect();
    return [rect.width || 800, rect.height || 600];
  }

  eventLonLat(evt: MouseEvent): LonLat | null {
    if (this.view === null) return null;
    const rect = this.svg.getBoundingClientRect();
    const px = this.view.minX + (evt.clientX - rect.left) * (this.view.width / (rect.width || this.view.width));
    const py = this.view.minY + (evt.clientY - rect.top) * (this.view.height / (rect.height || this.view.height));
    return unproject(px, py, this.view.zoom);
  }

  setNetwork(extract: NetworkExtract): void {
    this.network = extract;
    this.segCoords.clear();
    for (const seg of extract.segments) this.segCoords.set(seg.segment_id, seg.coords);
    const all: LonLat[] = [];
    for (const seg of extract.segments) all.push(...seg.coords);
    const bounds = boundsOf(all);
    if (bounds === null) return;
    const [w, h] = this.paneSize();
    this.view = fitView(bounds, w, h);
    this.svg.setAttribute(
      'viewBox',
      `${this.view.minX} ${this.view.minY} ${this.view.width} ${this.view.height}`,
    );
    this.renderTiles();
    this.renderNetwork();
  }

  segmentCoords(segmentId: string): LonLat[] | undefined {
    return this.segCoords.get(segmentId);
  }

  private renderTiles(): void {
    this.layers.tiles.replaceChildren();
    if (this.view === null || this.config.tileUrl === null) return;
    const z = this.view.zoom;
    const x0 = Math.floor(this.view.minX / TILE);
    const y0 = Math.floor(this.view.minY / TILE);
    const x1 = Math.floor((this.view.minX + this.view.width) / TILE);
    const y1 = Math.floor((this.view.minY + this.view.height) / TILE);
    const side = Math.pow(2, z);
    for (let tx = x0; tx <= x1; tx++) {
      for (let ty = y0; ty <= y1; ty++) {
        if (tx < 0 || ty < 0 || tx >= side || ty >= side) continue;
        const img = document.createElementNS(SVG_NS, 'image');
        const url = this.config.tileUrl
          .replace('{z}', String(z))
          .replace('{x}', String(tx))
          .replace('{y}', String(ty));
        img.setAttribute('href', url);
        img.setAttribute('x', String(tx * TILE));
        img.setAttribute('y', String(ty * TILE));
        img.setAttribute('width', String(TILE));
        img.setAttribute('height', String(TILE));
        this.layers.tiles.appendChild(img);
      }
    }
  }

  private renderNetwork(): void {
    this.layers.network.replaceChildren();
    if (this.view === null || this.network === null) return;
    for (const seg of this.network.segments) {
      const path = document.createElementNS(SVG_NS, 'path');
      path.setAttribute('d', pathOf(seg.coords, this.view.zoom));
      path.setAttribute('class', `road road-${seg.road_class}`);
      path.setAttribute('data-segment', seg.segment_id);
      const tip = document.createElementNS(SVG_NS, 'title');
      tip.textContent = seg.name ? `${seg.name} (${seg.segment_id})` : seg.segment_id;
      path.appendChild(tip);
      this.layers.network.appendChild(path);
    }
  }

  /**
   * Overlay each route set's canonical pathway, colored by its label's
   * position in the share table so map, chips, and histogram agree.
   */
  setRoutes(routeSets: RouteSetJson[], labelOrder: string[]): void {
    this.layers.routes.replaceChildren();
    if (this.view === null) return;
    for (const rs of routeSets) {
      const points: LonLat[] = [];
      for (const segId of rs.canonical) {
        const coords = this.segCoords.get(segId) ?? this.segCoords.get(`${segId}:r`);
        if (coords) points.push(...coords);
      }
      if (points.length < 2) continue;
      const index = labelOrder.indexOf(rs.label);
      const path = document.createElementNS(SVG_NS, 'path');
      path.setAttribute('d', pathOf(points, this.view.zoom));
      path.setAttribute('class', 'route-overlay');
      path.setAttribute('stroke', index >= 0 ? routeColor(index) : '#999');
      path.setAttribute('data-route', rs.route_id);
      const tip = document.createElementNS(SVG_NS, 'title');
      tip.textContent = rs.label;
      path.appendChild(tip);
      this.layers.routes.appendChild(path);
    }
  }

  private gateArrow(gate: GateDraft): SVGPathElement | null {
    if (this.view === null || gate.line.length < 2) return null;
    const projected = gate.line.map(([lon, lat]) => project(lon, lat, this.view!.zoom) as LonLat);
    const { point, headingDeg } = midpointWithHeading(projected);
    // positive sense is 90 degrees clockwise of travel along the line in
    // screen space (y grows downward), i.e. the left_to_right side
    let angle = headingDeg + 90;
    if (gate.positiveDirection === 'right_to_left') angle += 180;
    if (gate.sign === -1) angle += 180;
    const arrow = document.createElementNS(SVG_NS, 'path');
    arrow.setAttribute('d', 'M0 -9 L6 3 L-6 3 Z');
    arrow.setAttribute('transform', `translate(${point[0]} ${point[1]}) rotate(${angle + 90})`);
    arrow.setAttribute('class', 'gate-arrow');
    arrow.setAttribute('data-gate-arrow', gate.gateId);
    return arrow;
  }

  /** Redraw the committed draft; issues mark the offending shapes. */
  setDraft(draft: QueryDraft, issues: DraftIssue[]): void {
    this.layers.draft.replaceChildren();
    if (this.view === null) return;
    const bad = new Set(issues.filter((i) => i.blocking).map((i) => i.field));
    if (draft.studyArea !== null && draft.studyArea.length >= 2) {
      const ring = [...draft.studyArea, draft.studyArea[0]];
      const path = document.createElementNS(SVG_NS, 'path');
      path.setAttribute('d', pathOf(ring, this.view.zoom));
      path.setAttribute('class', bad.has('study_area') ? 'study-area invalid' : 'study-area');
      this.layers.draft.appendChild(path);
    }
    for (const gate of draft.gates) {
      const path = document.createElementNS(SVG_NS, 'path');
      path.setAttribute('d', pathOf(gate.line, this.view.zoom));
      path.setAttribute('class', bad.has(gate.gateId) ? 'gate invalid' : 'gate');
      path.setAttribute('data-gate', gate.gateId);
      this.layers.draft.appendChild(path);
      const arrow = this.gateArrow(gate);
      if (arrow) this.layers.draft.appendChild(arrow);
    }
  }

  /** Dashed preview of the shape being clicked out right now. */
  setPending(points: LonLat[], mode: 'gate' | 'area' | null): void {
    this.layers.pending.replaceChildren();
    if (this.view === null || mode === null || points.length === 0) return;
    const path = document.createElementNS(SVG_NS, 'path');
    const shown = mode === 'area' && points.length >= 3 ? [...points, points[0]] : points;
    path.setAttribute('d', pathOf(shown, this.view.zoom));
    path.setAttribute('class', `pending pending-${mode}`);
    this.layers.pending.appendChild(path);
    for (const [lon, lat] of points) {
      const [x, y] = project(lon, lat, this.view.zoom);
      const dot = document.createElementNS(SVG_NS, 'circle');
      dot.setAttribute('cx', String(x));
      dot.setAttribute('cy', String(y));
      dot.setAttribute('r', '3');
      dot.setAttribute('class', 'pending-vertex');
      this.layers.pending.appendChild(dot);
    }
  }
}
