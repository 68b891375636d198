import { describe, expect, it } from 'vitest';

import fixtureText from './fixtures/query-main.json?raw';
import {
  DraftError,
  blockingReason,
  documentToDraft,
  draftIssues,
  draftToDocument,
  emptyDraft,
  parseDraft,
  serializeDraft,
  type QueryDraft,
} from '../src/draft';
import { EditorController } from '../src/app';
import type { QueryDocument } from '../src/types';

/** The weigh-station query rebuilt vertex by vertex, as an analyst would draw it. */
function weighStationDraft(): QueryDraft {
  const draft = emptyDraft();
  draft.studyArea = [
    [-77.419755182172, 39.297697961091174],
    [-77.38024481782801, 39.297697961091174],
    [-77.38024481782801, 39.213161846901066],
    [-77.419755182172, 39.213161846901066],
  ];
  draft.gates = [
    {
      gateId: 'gate-up',
      line: [
        [-77.40139448344745, 39.29320135927255],
        [-77.39860551655256, 39.29320135927255],
      ],
      positiveDirection: 'left_to_right',
      sign: 1,
    },
    {
      gateId: 'gate-down',
      line: [
        [-77.40139448344745, 39.21765844871969],
        [-77.39860551655256, 39.21765844871969],
      ],
      positiveDirection: 'left_to_right',
      sign: 1,
    },
  ];
  draft.timeWindow = { start: '2026-07-21T04:00:00Z', end: '2026-07-22T04:00:00Z' };
  draft.requireOrder = true;
  draft.tz = 'America/New_York';
  draft.theta = 0.9;
  draft.activeHours = [8, 15];
  return draft;
}

describe('document serialization', () => {
  it('serializes a hand-built draft byte-identically to the bundled document', () => {
    const text = serializeDraft(weighStationDraft());
    expect(text).toBe(fixtureText);
    expect(Buffer.from(text, 'utf-8').equals(Buffer.from(fixtureText, 'utf-8'))).toBe(true);
  });

  it('editor-drawn gate serializes byte-identically to a hand-written document', () => {
    const handWritten = `{
 "gates": [
  {
   "gate_id": "gate-1",
   "line": [
    [
     -76.51,
     39.3
    ],
    [
     -76.49,
     39.28
    ]
   ],
   "positive_direction": "left_to_right"
  }
 ],
 "gate_sequence": [
  {
   "gate": "gate-1",
   "sign": 1
  }
 ],
 "require_order": true,
 "tz": "America/New_York",
 "theta": 0.9,
 "active_hours": []
}`;
    const editor = new EditorController();
    editor.beginGate();
    editor.addVertex([-76.51, 39.3]);
    editor.addVertex([-76.49, 39.28]);
    editor.finishShape();
    expect(editor.submitBlockReason()).toBeNull();
    expect(editor.serialize()).toBe(handWritten);
  });

  it('round-trips document to draft to document byte-identically', () => {
    const draft = parseDraft(fixtureText);
    expect(serializeDraft(draft)).toBe(fixtureText);
  });

  it('round-trips draft to document to draft losslessly', () => {
    const draft = weighStationDraft();
    const back = documentToDraft(draftToDocument(draft));
    expect(back).toEqual(draft);
  });

  it('closes the study-area ring on the way out and strips it on the way in', () => {
    const draft = weighStationDraft();
    const doc = draftToDocument(draft);
    const ring = doc.study_area!.polygon;
    expect(ring.length).toBe(draft.studyArea!.length + 1);
    expect(ring[ring.length - 1]).toEqual(ring[0]);
    expect(documentToDraft(doc).studyArea).toEqual(draft.studyArea);
  });

  it('omits absent optional fields instead of writing nulls', () => {
    const editor = new EditorController();
    editor.beginGate();
    editor.addVertex([-76.51, 39.3]);
    editor.addVertex([-76.49, 39.28]);
    editor.finishShape();
    const doc = JSON.parse(editor.serialize()) as Record<string, unknown>;
    expect('study_area' in doc).toBe(false);
    expect('time_window' in doc).toBe(false);
  });

  it('rejects documents whose sequence cannot be edited as a draft', () => {
    const doc = JSON.parse(fixtureText) as QueryDocument;
    doc.gate_sequence = [...doc.gate_sequence, { gate: 'gate-up', sign: -1 }];
    expect(() => documentToDraft(doc)).toThrow(DraftError);
  });
});

describe('draft validation', () => {
  it('accepts a two-click gate as a valid draft', () => {
    const editor = new EditorController();
    editor.beginGate();
    editor.addVertex([-76.51, 39.3]);
    editor.addVertex([-76.49, 39.28]);
    editor.finishShape();
    expect(editor.draft.gates).toHaveLength(1);
    expect(editor.draft.gates[0].line).toHaveLength(2);
    expect(draftIssues(editor.draft)).toEqual([]);
  });

  it('blocks a self-intersecting study area with a reason', () => {
    const draft = weighStationDraft();
    draft.studyArea = [
      [-77.42, 39.21],
      [-77.38, 39.3],
      [-77.38, 39.21],
      [-77.42, 39.3],
    ];
    const reason = blockingReason(draft);
    expect(reason).toBe('study area crosses itself');
    expect(() => draftToDocument(draft)).toThrow(DraftError);
  });

  it('accepts the same four corners drawn without the crossing', () => {
    const draft = weighStationDraft();
    draft.studyArea = [
      [-77.42, 39.21],
      [-77.38, 39.21],
      [-77.38, 39.3],
      [-77.42, 39.3],
    ];
    expect(blockingReason(draft)).toBeNull();
  });

  it('blocks an empty draft and a degenerate ring', () => {
    expect(blockingReason(emptyDraft())).toBe('draw at least one gate');
    const draft = weighStationDraft();
    draft.studyArea = [
      [-77.4, 39.2],
      [-77.4, 39.2],
      [-77.4, 39.2],
    ];
    expect(blockingReason(draft)).toBe('study area encloses no area');
  });

  it('drops shapes finished with too few clicks', () => {
    const editor = new EditorController();
    editor.beginGate();
    editor.addVertex([-76.5, 39.3]);
    editor.finishShape();
    expect(editor.draft.gates).toHaveLength(0);
    editor.beginArea();
    editor.addVertex([-76.5, 39.3]);
    editor.addVertex([-76.4, 39.3]);
    editor.finishShape();
    expect(editor.draft.studyArea).toBeNull();
  });

  it('toggles gate direction and crossing sign independently', () => {
    const editor = new EditorController();
    editor.beginGate();
    editor.addVertex([-76.51, 39.3]);
    editor.addVertex([-76.49, 39.28]);
    editor.finishShape();
    const id = editor.draft.gates[0].gateId;
    editor.toggleDirection(id);
    expect(editor.draft.gates[0].positiveDirection).toBe('right_to_left');
    editor.toggleSign(id);
    expect(editor.draft.gates[0].sign).toBe(-1);
    const doc = JSON.parse(editor.serialize()) as QueryDocument;
    expect(doc.gates[0].positive_direction).toBe('right_to_left');
    expect(doc.gate_sequence[0].sign).toBe(-1);
    editor.toggleDirection(id);
    expect(editor.draft.gates[0].positiveDirection).toBe('left_to_right');
  });

  it('serializes per-period documents that differ only in the window', () => {
    const draft = weighStationDraft();
    draft.periodA = { start: '2026-07-20T04:00:00Z', end: '2026-07-21T04:00:00Z' };
    draft.periodB = { start: '2026-07-21T04:00:00Z', end: '2026-07-22T04:00:00Z' };
    const a = JSON.parse(serializeDraft(draft, draft.periodA)) as QueryDocument;
    const b = JSON.parse(serializeDraft(draft, draft.periodB)) as QueryDocument;
    expect(a.time_window).toEqual({ start: '2026-07-20T04:00:00Z', end: '2026-07-21T04:00:00Z' });
    expect(b.time_window).toEqual({ start: '2026-07-21T04:00:00Z', end: '2026-07-22T04:00:00Z' });
    expect({ ...a, time_window: null }).toEqual({ ...b, time_window: null });
  });
});
