/**
 * Result panel renderers.
 *
 * Every number these functions put on screen is the string form of a
 * field taken straight from a service response; nothing is recomputed,
 * re-rounded, or aggregated on the client.  Deltas get an explicit sign
 * prefix but keep the field's own digits.
 */

import type {
  AvoidShareJson,
  ComparisonJson,
  ErrorEnvelope,
  HourlyJson,
  QueryReport,
  ShareTableJson,
  TravelTimesJson,
} from './types';

const SVG_NS = 'http://www.w3.org/2000/svg';

export const ROUTE_COLORS = [
  '#1f77b4',
  '#ff7f0e',
  '#2ca02c',
  '#d62728',
  '#9467bd',
  '#8c564b',
  '#e377c2',
  '#7f7f7f',
];

export function routeColor(index: number): string {
  return ROUTE_COLORS[index % ROUTE_COLORS.length];
}

export function signed(value: number): string {
  return value >= 0 ? `+${String(value)}` : String(value);
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function headerRow(table: HTMLTableElement, labels: string[]): void {
  const tr = table.createTHead().insertRow();
  for (const label of labels) {
    const th = document.createElement('th');
    th.textContent = label;
    tr.appendChild(th);
  }
}

export function renderShareTable(table: ShareTableJson): HTMLElement {
  const box = el('section', 'share-table');
  box.appendChild(el('h3', undefined, 'route shares'));
  const t = document.createElement('table');
  headerRow(t, ['', 'route', 'trips', 'share']);
  const body = t.createTBody();
  table.rows.forEach((row, i) => {
    const tr = body.insertRow();
    const chip = tr.insertCell();
    const swatch = el('span', 'route-chip');
    swatch.style.background = routeColor(i);
    chip.appendChild(swatch);
    tr.insertCell().textContent = row.label;
    const trips = tr.insertCell();
    trips.textContent = String(row.trips);
    trips.className = 'num';
    const share = tr.insertCell();
    share.textContent = row.display;
    share.className = 'num';
    share.title = `share ${String(row.share)}`;
  });
  const foot = t.createTFoot().insertRow();
  foot.insertCell();
  foot.insertCell().textContent = 'total';
  const total = foot.insertCell();
  total.textContent = String(table.total);
  total.className = 'num';
  foot.insertCell();
  box.appendChild(t);
  return box;
}

export function renderTravelTimes(stats: TravelTimesJson): HTMLElement {
  const box = el('section', 'travel-times');
  box.appendChild(el('h3', undefined, `travel times, ${stats.gate_pair[0]} to ${stats.gate_pair[1]}`));
  const t = document.createElement('table');
  headerRow(t, ['route', 'trips', 'mean minutes']);
  const body = t.createTBody();
  for (const row of stats.rows) {
    const tr = body.insertRow();
    tr.insertCell().textContent = row.label;
    const n = tr.insertCell();
    n.textContent = String(row.n_trips);
    n.className = 'num';
    const mean = tr.insertCell();
    mean.textContent = String(row.mean_minutes);
    mean.className = 'num';
  }
  box.appendChild(t);
  return box;
}

export function renderComparison(cmp: ComparisonJson): HTMLElement {
  const box = el('section', 'comparison');
  box.appendChild(el('h3', undefined, 'period comparison'));
  box.appendChild(el('p', 'totals', `period A: ${String(cmp.total_a)} trips, period B: ${String(cmp.total_b)} trips`));
  const t = document.createElement('table');
  headerRow(t, ['route', 'share A', 'share B', 'delta pp']);
  const body = t.createTBody();
  for (const row of cmp.rows) {
    const tr = body.insertRow();
    tr.insertCell().textContent = row.label;
    const a = tr.insertCell();
    a.textContent = String(row.share_a);
    a.className = 'num';
    const b = tr.insertCell();
    b.textContent = String(row.share_b);
    b.className = 'num';
    const d = tr.insertCell();
    d.textContent = signed(row.delta_pp);
    d.className = row.delta_pp < 0 ? 'num delta-down' : 'num delta-up';
  }
  box.appendChild(t);
  return box;
}

/**
 * Stacked hourly histogram.  Bar geometry scales with the counts, and
 * each rect carries its exact count in a data attribute and tooltip;
 * the only numerals drawn as text are the counts themselves.
 */
export function renderHourly(hourly: HourlyJson, labelOrder: string[]): HTMLElement {
  const box = el('section', 'hourly');
  box.appendChild(el('h3', undefined, `trips by hour (${hourly.tz}, ${String(hourly.bin_hours)}h bins)`));
  const bins = Object.keys(hourly.bins).sort();
  const colorOf = new Map(labelOrder.map((label, i) => [label, routeColor(i)]));
  let peak = 1;
  for (const bin of bins) {
    let stack = 0;
    for (const count of Object.values(hourly.bins[bin])) stack += count;
    peak = Math.max(peak, stack);
  }
  const barW = 18;
  const gap = 4;
  const plotH = 120;
  const width = bins.length * (barW + gap) + gap;
  const svg = document.createElementNS(SVG_NS, 'svg');
  svg.setAttribute('viewBox', `0 0 ${width} ${plotH + 34}`);
  svg.setAttribute('class', 'hourly-plot');
  bins.forEach((bin, i) => {
    const x = gap + i * (barW + gap);
    let y = plotH;
    for (const [label, count] of Object.entries(hourly.bins[bin])) {
      const h = (count / peak) * plotH;
      y -= h;
      const rect = document.createElementNS(SVG_NS, 'rect');
      rect.setAttribute('x', String(x));
      rect.setAttribute('y', String(y));
      rect.setAttribute('width', String(barW));
      rect.setAttribute('height', String(h));
      rect.setAttribute('fill', colorOf.get(label) ?? '#999');
      rect.setAttribute('data-bin', bin);
      rect.setAttribute('data-label', label);
      rect.setAttribute('data-count', String(count));
      const tip = document.createElementNS(SVG_NS, 'title');
      tip.textContent = `${bin} ${label}: ${String(count)}`;
      rect.appendChild(tip);
      svg.appendChild(rect);
    }
    const tick = document.createElementNS(SVG_NS, 'text');
    tick.setAttribute('x', String(x + barW / 2));
    tick.setAttribute('y', String(plotH + 26));
    tick.setAttribute('class', 'hourly-tick');
    tick.setAttribute('transform', `rotate(-45 ${x + barW / 2} ${plotH + 26})`);
    tick.textContent = bin.slice(11);
    svg.appendChild(tick);
  });
  box.appendChild(svg);
  return box;
}

export function renderAvoidShare(avoid: AvoidShareJson): HTMLElement {
  const box = el('section', 'avoid-share');
  box.appendChild(el('h3', undefined, 'active-window avoidance'));
  const p = el('p');
  p.appendChild(el('span', 'num', String(avoid.off_primary)));
  p.appendChild(document.createTextNode(' of '));
  p.appendChild(el('span', 'num', String(avoid.window_trips)));
  p.appendChild(document.createTextNode(` trips off the primary route (${avoid.primary_label}): `));
  const pct = el('strong', 'num avoid-display', avoid.display);
  pct.title = `share ${String(avoid.share)}`;
  p.appendChild(pct);
  box.appendChild(p);
  return box;
}

export function renderEmptyTripSet(): HTMLElement {
  const box = el('section', 'empty-result');
  box.appendChild(el('p', 'empty-message', '0 trips matched'));
  box.appendChild(el('p', undefined, 'No trips satisfied the gate sequence in the selected window.'));
  return box;
}

/** The error object is shown verbatim, next to a retry control. */
export function renderServiceError(envelope: ErrorEnvelope, onRetry: () => void): HTMLElement {
  const box = el('section', 'service-error');
  box.appendChild(el('h3', undefined, 'query failed'));
  const pre = el('pre', 'error-envelope');
  pre.textContent = JSON.stringify(envelope);
  box.appendChild(pre);
  const retry = el('button', 'retry', 'retry');
  retry.addEventListener('click', onRetry);
  box.appendChild(retry);
  return box;
}

export function renderDiagnostics(report: QueryReport): HTMLElement {
  const d = report.diagnostics;
  const box = el('section', 'diagnostics');
  const parts = [
    `corpus ${String(d.corpus_trips)}`,
    `matched ${String(d.matched)}`,
    `filtered in ${String(d.filtered_in)}`,
    `unfolded ${String(d.unfolded)}`,
  ];
  box.appendChild(el('p', undefined, parts.join(' / ')));
  box.appendChild(el('p', 'query-hash', `query ${report.query_hash.slice(0, 12)}`));
  return box;
}

/** Full results panel for one report. */
export function renderReport(report: QueryReport): HTMLElement {
  const box = el('div', 'report');
  if (report.trip_set.total === 0) {
    box.appendChild(renderEmptyTripSet());
    box.appendChild(renderDiagnostics(report));
    return box;
  }
  const labelOrder = report.share_table.rows.map((r) => r.label);
  box.appendChild(renderShareTable(report.share_table));
  box.appendChild(renderTravelTimes(report.travel_times));
  box.appendChild(renderHourly(report.hourly, labelOrder));
  if (report.avoid_share !== null) {
    box.appendChild(renderAvoidShare(report.avoid_share));
  }
  box.appendChild(renderDiagnostics(report));
  return box;
}
