/**
 * The editable query draft and its (de)serialization.
 *
 * A draft holds exactly what the gate editor manipulates: the study-area
 * ring as drawn (distinct vertices, the closing edge implied), ordered
 * directed gates, the time window, and the analysis knobs.  Serializing
 * a draft produces a query document byte-identical to a hand-written one
 * for the same geometry: key order is fixed, the ring is closed on the
 * way out, and the JSON is emitted with the same one-space indentation
 * the rest of the toolchain uses.
 */

import { ringArea2, ringSelfIntersects } from './geometry';
import type {
  GateDirection,
  GateJson,
  GateSequenceEntry,
  LonLat,
  QueryDocument,
  StudyAreaJson,
  TimeWindowJson,
} from './types';

export interface GateDraft {
  gateId: string;
  line: LonLat[];
  positiveDirection: GateDirection;
  sign: number;
}

export interface TimeWindow {
  start: string;
  end: string;
}

export interface QueryDraft {
  /** Distinct ring vertices in draw order; null until an area is drawn. */
  studyArea: LonLat[] | null;
  /** Draw order doubles as the required crossing order. */
  gates: GateDraft[];
  timeWindow: TimeWindow | null;
  requireOrder: boolean;
  tz: string;
  theta: number;
  activeHours: number[];
  /** Optional A/B windows for period comparison; not part of the document. */
  periodA: TimeWindow | null;
  periodB: TimeWindow | null;
}

export function emptyDraft(): QueryDraft {
  return {
    studyArea: null,
    gates: [],
    timeWindow: null,
    requireOrder: true,
    tz: 'America/New_York',
    theta: 0.9,
    activeHours: [],
    periodA: null,
    periodB: null,
  };
}

export class DraftError extends Error {}

export interface DraftIssue {
  field: string;
  message: string;
  blocking: boolean;
}

/** Validation the editor runs after every pointer action. */
export function draftIssues(draft: QueryDraft): DraftIssue[] {
  const issues: DraftIssue[] = [];
  if (draft.gates.length === 0) {
    issues.push({ field: 'gates', message: 'draw at least one gate', blocking: true });
  }
  const seen = new Set<string>();
  for (const g of draft.gates) {
    if (g.line.length < 2) {
      issues.push({ field: g.gateId, message: `gate ${g.gateId} needs at least two points`, blocking: true });
    }
    if (seen.has(g.gateId)) {
      issues.push({ field: g.gateId, message: `duplicate gate id ${g.gateId}`, blocking: true });
    }
    seen.add(g.gateId);
    if (g.sign !== 1 && g.sign !== -1) {
      issues.push({ field: g.gateId, message: `gate ${g.gateId} sign must be +1 or -1`, blocking: true });
    }
  }
  if (draft.studyArea !== null) {
    if (draft.studyArea.length < 3) {
      issues.push({ field: 'study_area', message: 'study area needs at least three corners', blocking: true });
    } else if (ringSelfIntersects(draft.studyArea)) {
      issues.push({ field: 'study_area', message: 'study area crosses itself', blocking: true });
    } else if (ringArea2(draft.studyArea) === 0) {
      issues.push({ field: 'study_area', message: 'study area encloses no area', blocking: true });
    }
  }
  if (!(draft.theta > 0 && draft.theta <= 1)) {
    issues.push({ field: 'theta', message: 'fold threshold must be in (0, 1]', blocking: true });
  }
  if (!draft.activeHours.every((h) => Number.isInteger(h) && h >= 0 && h <= 23)) {
    issues.push({ field: 'active_hours', message: 'active hours must be whole hours 0..23', blocking: true });
  }
  return issues;
}

export function blockingReason(draft: QueryDraft): string | null {
  const issue = draftIssues(draft).find((i) => i.blocking);
  return issue ? issue.message : null;
}

/**
 * Build the wire document.  Key order is part of the contract here:
 * study_area, gates, gate_sequence, time_window, require_order, tz,
 * theta, active_hours, with absent optionals omitted entirely.
 */
export function draftToDocument(draft: QueryDraft, window?: TimeWindow | null): QueryDocument {
  const reason = blockingReason(draft);
  if (reason !== null) throw new DraftError(reason);
  const doc: QueryDocument = {} as QueryDocument;
  if (draft.studyArea !== null) {
    const ring: LonLat[] = draft.studyArea.map((p) => [p[0], p[1]]);
    ring.push([ring[0][0], ring[0][1]]);
    const area: StudyAreaJson = { polygon: ring };
    doc.study_area = area;
  }
  doc.gates = draft.gates.map(
    (g): GateJson => ({
      gate_id: g.gateId,
      line: g.line.map((p) => [p[0], p[1]]),
      positive_direction: g.positiveDirection,
    }),
  );
  doc.gate_sequence = draft.gates.map(
    (g): GateSequenceEntry => ({ gate: g.gateId, sign: g.sign }),
  );
  const tw = window === undefined ? draft.timeWindow : window;
  if (tw !== null) {
    const w: TimeWindowJson = { start: tw.start, end: tw.end };
    doc.time_window = w;
  }
  doc.require_order = draft.requireOrder;
  doc.tz = draft.tz;
  doc.theta = draft.theta;
  doc.active_hours = draft.activeHours.slice();
  return doc;
}

/** The exact bytes posted to the service and written to disk. */
export function serializeDraft(draft: QueryDraft, window?: TimeWindow | null): string {
  return JSON.stringify(draftToDocument(draft, window), null, 1);
}

/**
 * Rebuild a draft from a document.  The editor represents one sequence
 * entry per gate in definition order; documents outside that shape are
 * valid queries but not editable drafts.
 */
export function documentToDraft(doc: QueryDocument): QueryDraft {
  const draft = emptyDraft();
  if (doc.study_area != null) {
    const ring = doc.study_area.polygon.map((p): LonLat => [p[0], p[1]]);
    const last = ring[ring.length - 1];
    if (ring.length >= 2 && last[0] === ring[0][0] && last[1] === ring[0][1]) {
      ring.pop();
    }
    draft.studyArea = ring;
  }
  const seq = doc.gate_sequence ?? [];
  const gates = doc.gates ?? [];
  if (seq.length !== gates.length) {
    throw new DraftError('gate sequence does not visit each gate exactly once');
  }
  draft.gates = gates.map((g, i) => {
    if (seq[i].gate !== g.gate_id) {
      throw new DraftError('gate sequence order differs from gate definition order');
    }
    return {
      gateId: g.gate_id,
      line: g.line.map((p): LonLat => [p[0], p[1]]),
      positiveDirection: g.positive_direction ?? 'left_to_right',
      sign: seq[i].sign ?? 1,
    };
  });
  if (doc.time_window != null) {
    draft.timeWindow = { start: doc.time_window.start, end: doc.time_window.end };
  }
  draft.requireOrder = doc.require_order ?? true;
  draft.tz = doc.tz ?? 'America/New_York';
  draft.theta = doc.theta ?? 0.9;
  draft.activeHours = (doc.active_hours ?? []).slice();
  return draft;
}

export function parseDraft(text: string): QueryDraft {
  return documentToDraft(JSON.parse(text) as QueryDocument);
}
