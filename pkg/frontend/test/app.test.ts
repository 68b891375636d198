import { afterEach, beforeEach, describe, expect, it, vi } from 'vitest';

import reportJson from './fixtures/report-main.json';
import { App } from '../src/app';
import type { NetworkExtract, QueryReport, StatusJson } from '../src/types';

const report = reportJson as unknown as QueryReport;

const status: StatusJson = {
  status: 'ready',
  version: '0.1.0',
  network: { nodes: 15, segments: 19 },
  corpus: { trips: 585 },
  counts: { stations: ['vws-hyattstown'] },
  queries_cached: 0,
};

const extract: NetworkExtract = {
  count: 2,
  segments: [
    {
      segment_id: 'i270-n',
      name: 'Eisenhower Memorial Highway',
      road_class: 'motorway',
      length_m: 4000,
      coords: [
        [-77.4, 39.29],
        [-77.4, 39.25],
      ],
    },
    {
      segment_id: 'md355-in',
      name: 'Frederick Road',
      road_class: 'primary',
      length_m: 2000,
      coords: [
        [-77.41, 39.29],
        [-77.41, 39.25],
      ],
    },
  ],
};

function jsonResponse(body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status: 200,
    headers: { 'content-type': 'application/json' },
  });
}

function stubFetch(): ReturnType<typeof vi.fn> {
  return vi.fn(async (url: string | URL) => {
    const u = String(url);
    if (u.endsWith('/status')) return jsonResponse(status);
    if (u.includes('/network')) return jsonResponse(extract);
    if (u.endsWith('/query')) return jsonResponse(report);
    throw new Error(`unexpected url ${u}`);
  });
}

async function settle(): Promise<void> {
  await new Promise((r) => setTimeout(r, 0));
  await new Promise((r) => setTimeout(r, 0));
}

describe('app wiring', () => {
  let fetchSpy: ReturnType<typeof vi.fn>;
  let root: HTMLElement;

  beforeEach(() => {
    fetchSpy = stubFetch();
    vi.stubGlobal('fetch', fetchSpy);
    root = document.createElement('div');
    document.body.appendChild(root);
  });

  afterEach(() => {
    vi.unstubAllGlobals();
    root.remove();
  });

  it('boots, reports service status, and draws the network', async () => {
    new App(root, { apiBase: '', map: { tileUrl: null } });
    await settle();
    expect(root.querySelector('#status')!.textContent).toBe('0.1.0: 585 trips on 19 segments');
    expect(root.querySelectorAll('.map-pane path.road')).toHaveLength(extract.segments.length);
  });

  it('keeps submit disabled with a reason until a gate exists', async () => {
    const app = new App(root, { apiBase: '', map: { tileUrl: null } });
    await settle();
    const submit = root.querySelector<HTMLButtonElement>('#submit')!;
    expect(submit.disabled).toBe(true);
    expect(root.querySelector('#block-note')!.textContent).toBe('draw at least one gate');

    app.editor.beginGate();
    app.editor.addVertex([-77.41, 39.27]);
    app.editor.addVertex([-77.39, 39.27]);
    app.editor.finishShape();
    expect(submit.disabled).toBe(false);
    expect(root.querySelector('#block-note')!.textContent).toBe('');
  });

  it('disables submit and flags the ring when the study area crosses itself', async () => {
    const app = new App(root, { apiBase: '', map: { tileUrl: null } });
    await settle();
    app.editor.beginGate();
    app.editor.addVertex([-77.41, 39.27]);
    app.editor.addVertex([-77.39, 39.27]);
    app.editor.finishShape();

    app.editor.beginArea();
    app.editor.addVertex([-77.42, 39.21]);
    app.editor.addVertex([-77.38, 39.3]);
    app.editor.addVertex([-77.38, 39.21]);
    app.editor.addVertex([-77.42, 39.3]);
    app.editor.finishShape();

    const submit = root.querySelector<HTMLButtonElement>('#submit')!;
    expect(submit.disabled).toBe(true);
    expect(root.querySelector('#block-note')!.textContent).toBe('study area crosses itself');
    expect(root.querySelector('.map-pane path.study-area.invalid')).not.toBeNull();

    app.editor.clearArea();
    expect(submit.disabled).toBe(false);
    expect(root.querySelector('.map-pane path.study-area')).toBeNull();
  });

  it('renders the service response and overlays routes after submit', async () => {
    const app = new App(root, { apiBase: '', map: { tileUrl: null } });
    await settle();
    app.editor.beginGate();
    app.editor.addVertex([-77.41, 39.27]);
    app.editor.addVertex([-77.39, 39.27]);
    app.editor.finishShape();

    const outcome = await app.submit();
    expect(outcome?.kind).toBe('report');
    const firstRow = root.querySelector('#results tbody tr')!;
    expect(firstRow.textContent).toContain('Eisenhower Memorial Highway, I-270');
    expect(firstRow.textContent).toContain('552');
    expect(firstRow.textContent).toContain('94%');

    const overlays = root.querySelectorAll('.map-pane path.route-overlay');
    expect(overlays.length).toBeGreaterThan(0);

    const posted = fetchSpy.mock.calls.find(([u]) => String(u).endsWith('/query'));
    expect(posted).toBeDefined();
    const body = String((posted![1] as RequestInit).body);
    expect(body).toBe(app.editor.serialize());
  });

  it('draws a direction arrow at each gate midpoint', async () => {
    const app = new App(root, { apiBase: '', map: { tileUrl: null } });
    await settle();
    app.editor.beginGate();
    app.editor.addVertex([-77.41, 39.27]);
    app.editor.addVertex([-77.39, 39.27]);
    app.editor.finishShape();
    const arrow = root.querySelector('.map-pane path.gate-arrow');
    expect(arrow).not.toBeNull();
    expect(arrow!.getAttribute('data-gate-arrow')).toBe('gate-1');
  });
});
