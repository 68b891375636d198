import { describe, expect, it, vi } from 'vitest';

import comparisonJson from './fixtures/comparison.json';
import reportJson from './fixtures/report-main.json';
import {
  renderAvoidShare,
  renderComparison,
  renderHourly,
  renderReport,
  renderServiceError,
  renderShareTable,
  renderTravelTimes,
  signed,
} from '../src/results';
import type { ComparisonJson, ErrorEnvelope, QueryReport } from '../src/types';

const report = reportJson as unknown as QueryReport;
const comparison = comparisonJson as unknown as ComparisonJson;

function cellTexts(row: HTMLTableRowElement): string[] {
  return Array.from(row.cells).map((c) => c.textContent ?? '');
}

describe('share table rendering', () => {
  it('renders every number exactly as the response field', () => {
    const panel = renderShareTable(report.share_table);
    const rows = Array.from(panel.querySelectorAll<HTMLTableRowElement>('tbody tr'));
    expect(rows).toHaveLength(report.share_table.rows.length);
    rows.forEach((tr, i) => {
      const field = report.share_table.rows[i];
      expect(cellTexts(tr).slice(1)).toEqual([field.label, String(field.trips), field.display]);
    });
    const foot = panel.querySelector<HTMLTableRowElement>('tfoot tr')!;
    expect(cellTexts(foot)[2]).toBe(String(report.share_table.total));
  });

  it('matches the fixture snapshot row for row', () => {
    const panel = renderShareTable(report.share_table);
    const rendered = Array.from(panel.querySelectorAll<HTMLTableRowElement>('tbody tr')).map((tr) =>
      cellTexts(tr).slice(1).join('|'),
    );
    expect(rendered).toEqual([
      'Eisenhower Memorial Highway, I-270|552|94%',
      'Hyattstown South TWIS|21|4%',
      'Ridge Road, MD-27|5|0.9%',
      'Dickerson Road, MD-28|3|0.5%',
      'Frederick Road, MD-355|3|0.5%',
      'Old Hundred Road, MD-109|1|0.2%',
    ]);
  });
});

describe('travel time rendering', () => {
  it('renders trip counts and means bit-identically to the response', () => {
    const panel = renderTravelTimes(report.travel_times);
    expect(panel.querySelector('h3')!.textContent).toBe(
      `travel times, ${report.travel_times.gate_pair[0]} to ${report.travel_times.gate_pair[1]}`,
    );
    const rows = Array.from(panel.querySelectorAll<HTMLTableRowElement>('tbody tr'));
    rows.forEach((tr, i) => {
      const field = report.travel_times.rows[i];
      expect(cellTexts(tr)).toEqual([field.label, String(field.n_trips), String(field.mean_minutes)]);
    });
  });
});

describe('comparison rendering', () => {
  it('renders deltas with an explicit sign and untouched digits', () => {
    const panel = renderComparison(comparison);
    const rows = Array.from(panel.querySelectorAll<HTMLTableRowElement>('tbody tr'));
    const byLabel = new Map(rows.map((tr) => [cellTexts(tr)[0], cellTexts(tr)]));
    expect(byLabel.get('I-95')).toEqual(['I-95', '0.54', '0.28', '-26']);
    expect(byLabel.get('US-50')).toEqual(['US-50', '0.28', '0.44', '+16']);
    expect(byLabel.get('MD-2')).toEqual(['MD-2', '0.18', '0.28', '+10']);
    rows.forEach((tr, i) => {
      const field = comparison.rows[i];
      expect(cellTexts(tr)).toEqual([
        field.label,
        String(field.share_a),
        String(field.share_b),
        signed(field.delta_pp),
      ]);
    });
  });

  it('keeps full float precision when the service sends it', () => {
    const noisy: ComparisonJson = {
      total_a: 25,
      total_b: 25,
      rows: [{ label: 'US-50', share_a: 0.28, share_b: 0.44, delta_pp: 15.999999999999998 }],
    };
    const panel = renderComparison(noisy);
    const tr = panel.querySelector<HTMLTableRowElement>('tbody tr')!;
    expect(cellTexts(tr)[3]).toBe('+15.999999999999998');
  });
});

describe('hourly histogram rendering', () => {
  it('carries each bin count verbatim on its bar', () => {
    const labels = report.share_table.rows.map((r) => r.label);
    const panel = renderHourly(report.hourly, labels);
    const rects = Array.from(panel.querySelectorAll('rect'));
    const expected = Object.entries(report.hourly.bins).flatMap(([bin, counts]) =>
      Object.entries(counts).map(([label, count]) => `${bin}|${label}|${String(count)}`),
    );
    const got = rects.map(
      (r) => `${r.getAttribute('data-bin')}|${r.getAttribute('data-label')}|${r.getAttribute('data-count')}`,
    );
    expect(got.sort()).toEqual(expected.sort());
  });
});

describe('avoid share rendering', () => {
  it('renders the counts and display string from the response', () => {
    const panel = renderAvoidShare(report.avoid_share!);
    const nums = Array.from(panel.querySelectorAll('.num')).map((n) => n.textContent);
    expect(nums).toEqual([
      String(report.avoid_share!.off_primary),
      String(report.avoid_share!.window_trips),
      report.avoid_share!.display,
    ]);
    expect(panel.textContent).toContain('12 of 33');
    expect(panel.textContent).toContain('36%');
  });
});

describe('report states', () => {
  it('renders the full panel when trips matched', () => {
    const panel = renderReport(report);
    expect(panel.querySelector('.share-table')).not.toBeNull();
    expect(panel.querySelector('.travel-times')).not.toBeNull();
    expect(panel.querySelector('.hourly')).not.toBeNull();
    expect(panel.querySelector('.avoid-share')).not.toBeNull();
    expect(panel.querySelector('.empty-result')).toBeNull();
    expect(panel.textContent).toContain(report.query_hash.slice(0, 12));
  });

  it('shows an explicit zero-trips state', () => {
    const empty: QueryReport = {
      ...report,
      trip_set: { total: 0, entries: [] },
      route_sets: [],
      share_table: { total: 0, rows: [] },
    };
    const panel = renderReport(empty);
    expect(panel.querySelector('.empty-message')!.textContent).toBe('0 trips matched');
    expect(panel.querySelector('.share-table')).toBeNull();
  });

  it('renders service errors verbatim with a working retry control', () => {
    const envelope: ErrorEnvelope = {
      error: { code: 'unknown_reference', message: "unknown gate id 'gate-up'" },
    };
    const onRetry = vi.fn();
    const panel = renderServiceError(envelope, onRetry);
    expect(panel.querySelector('.error-envelope')!.textContent).toBe(JSON.stringify(envelope));
    (panel.querySelector('button.retry') as HTMLButtonElement).click();
    expect(onRetry).toHaveBeenCalledTimes(1);
  });
});
