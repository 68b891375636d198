/**
 * Application wiring: the draft editor state machine, the map pane, the
 * query session, and the results panel.
 *
 * EditorController is deliberately DOM-free so the click-to-vertex
 * behavior, direction toggling, and submit gating can be exercised
 * headlessly; App binds it to buttons and the map.
 */

import { ApiClient, QuerySession, ServiceError, type QueryOutcome } from './api';
import {
  blockingReason,
  draftIssues,
  emptyDraft,
  serializeDraft,
  type QueryDraft,
  type TimeWindow,
} from './draft';
import { MapPane, type MapConfig } from './mapview';
import { renderComparison, renderReport, renderServiceError } from './results';
import type { LonLat, QueryReport } from './types';

export type EditMode = 'gate' | 'area' | null;

export class EditorController {
  draft: QueryDraft = emptyDraft();
  mode: EditMode = null;
  pending: LonLat[] = [];
  private gateCounter = 0;
  onChange: (() => void) | null = null;

  private changed(): void {
    if (this.onChange) this.onChange();
  }

  beginGate(): void {
    this.mode = 'gate';
    this.pending = [];
    this.changed();
  }

  beginArea(): void {
    this.mode = 'area';
    this.pending = [];
    this.changed();
  }

  cancelShape(): void {
    this.mode = null;
    this.pending = [];
    this.changed();
  }

  /** One map click adds one vertex to the shape under construction. */
  addVertex(point: LonLat): void {
    if (this.mode === null) return;
    this.pending.push([point[0], point[1]]);
    this.changed();
  }

  /** Commit the pending shape into the draft; short shapes are dropped. */
  finishShape(): void {
    if (this.mode === 'gate' && this.pending.length >= 2) {
      this.gateCounter += 1;
      this.draft.gates.push({
        gateId: `gate-${this.gateCounter}`,
        line: this.pending,
        positiveDirection: 'left_to_right',
        sign: 1,
      });
    } else if (this.mode === 'area' && this.pending.length >= 3) {
      this.draft.studyArea = this.pending;
    }
    this.mode = null;
    this.pending = [];
    this.changed();
  }

  toggleDirection(gateId: string): void {
    const gate = this.draft.gates.find((g) => g.gateId === gateId);
    if (!gate) return;
    gate.positiveDirection = gate.positiveDirection === 'left_to_right' ? 'right_to_left' : 'left_to_right';
    this.changed();
  }

  toggleSign(gateId: string): void {
    const gate = this.draft.gates.find((g) => g.gateId === gateId);
    if (!gate) return;
    gate.sign = gate.sign === 1 ? -1 : 1;
    this.changed();
  }

  removeGate(gateId: string): void {
    this.draft.gates = this.draft.gates.filter((g) => g.gateId !== gateId);
    this.changed();
  }

  clearArea(): void {
    this.draft.studyArea = null;
    this.changed();
  }

  setWindow(window: TimeWindow | null): void {
    this.draft.timeWindow = window;
    this.changed();
  }

  setPeriods(a: TimeWindow | null, b: TimeWindow | null): void {
    this.draft.periodA = a;
    this.draft.periodB = b;
    this.changed();
  }

  issues() {
    return draftIssues(this.draft);
  }

  /** Null when the draft may be submitted, else the reason it may not. */
  submitBlockReason(): string | null {
    return blockingReason(this.draft);
  }

  serialize(window?: TimeWindow | null): string {
    return serializeDraft(this.draft, window);
  }
}

export interface AppConfig {
  apiBase: string;
  map: MapConfig;
}

export class App {
  readonly editor = new EditorController();
  readonly client: ApiClient;
  private session: QuerySession;
  private map: MapPane;
  private results: HTMLElement;
  private statusBar: HTMLElement;
  private submitButton: HTMLButtonElement;
  private blockNote: HTMLElement;
  private lastDocument: string | null = null;

  constructor(root: HTMLElement, config: AppConfig) {
    this.client = new ApiClient(config.apiBase);
    this.session = new QuerySession(this.client, (o) => this.applyOutcome(o));

    root.innerHTML = `
      <header class="topbar">
        <strong>detourkit</strong>
        <span id="status" class="status">connecting</span>
      </header>
      <main class="layout">
        <div id="map" class="map-box"></div>
        <aside class="panel">
          <div class="toolbar">
            <button id="draw-gate">draw gate</button>
            <button id="draw-area">draw area</button>
            <button id="finish">finish shape</button>
            <button id="cancel">cancel</button>
          </div>
          <div id="gate-list" class="gate-list"></div>
          <form id="knobs" class="knobs">
            <label>window start <input id="win-start" placeholder="2026-07-21T04:00:00Z"></label>
            <label>window end <input id="win-end" placeholder="2026-07-22T04:00:00Z"></label>
            <label>period A start <input id="pa-start"></label>
            <label>period A end <input id="pa-end"></label>
            <label>period B start <input id="pb-start"></label>
            <label>period B end <input id="pb-end"></label>
          </form>
          <div class="actions">
            <button id="submit">run query</button>
            <button id="compare">compare A/B</button>
          </div>
          <p id="block-note" class="block-note"></p>
          <div id="results" class="results"></div>
        </aside>
      </main>`;

    this.map = new MapPane(root.querySelector('#map')!, config.map);
    this.results = root.querySelector('#results')!;
    this.statusBar = root.querySelector('#status')!;
    this.submitButton = root.querySelector('#submit')!;
    this.blockNote = root.querySelector('#block-note')!;

    this.map.onVertex = (p) => this.editor.addVertex(p);
    this.editor.onChange = () => this.refreshDraftUi(root);

    root.querySelector('#draw-gate')!.addEventListener('click', () => this.editor.beginGate());
    root.querySelector('#draw-area')!.addEventListener('click', () => this.editor.beginArea());
    root.querySelector('#finish')!.addEventListener('click', () => this.editor.finishShape());
    root.querySelector('#cancel')!.addEventListener('click', () => this.editor.cancelShape());
    this.submitButton.addEventListener('click', () => void this.submit());
    root.querySelector('#compare')!.addEventListener('click', () => void this.comparePeriods());

    const windowInput = (id: string): string => (root.querySelector(`#${id}`) as HTMLInputElement).value.trim();
    root.querySelector('#knobs')!.addEventListener('change', () => {
      const start = windowInput('win-start');
      const end = windowInput('win-end');
      this.editor.setWindow(start && end ? { start, end } : null);
      const pa = windowInput('pa-start') && windowInput('pa-end')
        ? { start: windowInput('pa-start'), end: windowInput('pa-end') }
        : null;
      const pb = windowInput('pb-start') && windowInput('pb-end')
        ? { start: windowInput('pb-start'), end: windowInput('pb-end') }
        : null;
      this.editor.setPeriods(pa, pb);
    });

    this.refreshDraftUi(root);
    void this.connect();
  }

  private async connect(): Promise<void> {
    try {
      const status = await this.client.status();
      this.statusBar.textContent =
        `${status.version}: ${String(status.corpus.trips)} trips on ` +
        `${String(status.network.segments)} segments`;
      const extract = await this.client.network([-180, -90, 180, 90]);
      this.map.setNetwork(extract);
    } catch (err) {
      this.statusBar.textContent = err instanceof Error ? err.message : 'service unreachable';
    }
  }

  private refreshDraftUi(root: HTMLElement): void {
    const issues = this.editor.issues();
    this.map.setDraft(this.editor.draft, issues);
    this.map.setPending(this.editor.pending, this.editor.mode);
    const reason = this.editor.submitBlockReason();
    this.submitButton.disabled = reason !== null;
    this.blockNote.textContent = reason ?? '';

    const list = root.querySelector('#gate-list')!;
    list.replaceChildren();
    this.editor.draft.gates.forEach((gate, i) => {
      const row = document.createElement('div');
      row.className = 'gate-row';
      row.append(`${String(i + 1)}. ${gate.gateId} (${gate.positiveDirection}, sign ${gate.sign > 0 ? '+1' : '-1'}) `);
      const flip = document.createElement('button');
      flip.textContent = 'flip direction';
      flip.addEventListener('click', () => this.editor.toggleDirection(gate.gateId));
      const sign = document.createElement('button');
      sign.textContent = 'flip sign';
      sign.addEventListener('click', () => this.editor.toggleSign(gate.gateId));
      const drop = document.createElement('button');
      drop.textContent = 'remove';
      drop.addEventListener('click', () => this.editor.removeGate(gate.gateId));
      row.append(flip, sign, drop);
      list.appendChild(row);
    });
  }

  private applyOutcome(outcome: QueryOutcome): void {
    this.results.replaceChildren();
    if (outcome.kind === 'report') {
      this.results.appendChild(renderReport(outcome.report));
      const labelOrder = outcome.report.share_table.rows.map((r) => r.label);
      this.map.setRoutes(outcome.report.route_sets, labelOrder);
    } else if (outcome.kind === 'error') {
      const envelope =
        outcome.error instanceof ServiceError
          ? outcome.error.envelope
          : { error: { code: 'request_failed', message: outcome.error.message } };
      this.results.appendChild(renderServiceError(envelope, () => void this.retry()));
    }
  }

  async submit(): Promise<QueryOutcome | null> {
    const reason = this.editor.submitBlockReason();
    if (reason !== null) return null;
    this.lastDocument = this.editor.serialize();
    return this.session.submit(this.lastDocument);
  }

  private async retry(): Promise<void> {
    if (this.lastDocument !== null) await this.session.submit(this.lastDocument);
  }

  /** Run the draft once per period, then ask the service for the deltas. */
  async comparePeriods(): Promise<void> {
    const { periodA, periodB } = this.editor.draft;
    if (periodA === null || periodB === null || this.editor.submitBlockReason() !== null) {
      this.blockNote.textContent = 'comparison needs both period windows and a valid draft';
      return;
    }
    try {
      const a: QueryReport = (await this.client.query(this.editor.serialize(periodA))).report;
      const b: QueryReport = (await this.client.query(this.editor.serialize(periodB))).report;
      const cmp = await this.client.compare(a.query_hash, b.query_hash);
      this.results.replaceChildren(renderComparison(cmp));
    } catch (err) {
      const envelope =
        err instanceof ServiceError
          ? err.envelope
          : { error: { code: 'request_failed', message: (err as Error).message } };
      this.results.replaceChildren(renderServiceError(envelope, () => void this.comparePeriods()));
    }
  }
}
