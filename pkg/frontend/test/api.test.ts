import { describe, expect, it, vi } from 'vitest';

import { ApiClient, QuerySession, ServiceError, type QueryOutcome } from '../src/api';
import type { ErrorEnvelope, QueryReport } from '../src/types';

function reportFor(hash: string): QueryReport {
  return {
    manifest: { tool: 'detourkit', version: '0.1.0', inputs: {}, params: {} },
    query_hash: hash,
    trip_set: { total: 1, entries: [] },
    route_sets: [],
    share_table: { total: 1, rows: [] },
    travel_times: { gate_pair: ['a', 'b'], rows: [] },
    hourly: { tz: 'UTC', bin_hours: 1, bins: {} },
    avoid_share: null,
    diagnostics: { corpus_trips: 1, matched: 1, match_rejections: [], filtered_in: 1, unfolded: 0 },
  };
}

function jsonResponse(body: unknown, status = 200, headers: Record<string, string> = {}): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'content-type': 'application/json', ...headers },
  });
}

function deferred<T>() {
  let resolve!: (value: T) => void;
  const promise = new Promise<T>((r) => {
    resolve = r;
  });
  return { promise, resolve };
}

describe('query session sequencing', () => {
  it('discards a delayed response that was superseded by a newer submission', async () => {
    const slow = deferred<Response>();
    const fast = deferred<Response>();
    const pending = [slow, fast];
    const fetchFn = vi.fn(() => pending.shift()!.promise);
    const applied: QueryOutcome[] = [];
    const session = new QuerySession(new ApiClient('', fetchFn), (o) => applied.push(o));

    const first = session.submit('{"doc":"old"}');
    const second = session.submit('{"doc":"new"}');

    fast.resolve(jsonResponse(reportFor('hash-new')));
    const secondOutcome = await second;
    expect(secondOutcome.kind).toBe('report');

    slow.resolve(jsonResponse(reportFor('hash-old')));
    const firstOutcome = await first;
    expect(firstOutcome).toEqual({ kind: 'stale', seq: 1 });

    expect(applied).toHaveLength(1);
    expect(applied[0].kind).toBe('report');
    expect((applied[0] as { report: QueryReport }).report.query_hash).toBe('hash-new');
  });

  it('applies responses normally when each lands before the next submission', async () => {
    const fetchFn = vi.fn(async (_url: string, init?: RequestInit) => {
      const doc = JSON.parse(String(init?.body)) as { doc: string };
      return jsonResponse(reportFor(`hash-${doc.doc}`));
    });
    const applied: string[] = [];
    const session = new QuerySession(new ApiClient('', fetchFn), (o) => {
      if (o.kind === 'report') applied.push(o.report.query_hash);
    });
    await session.submit('{"doc":"one"}');
    await session.submit('{"doc":"two"}');
    expect(applied).toEqual(['hash-one', 'hash-two']);
  });

  it('marks a superseded failure stale instead of surfacing it', async () => {
    const slow = deferred<Response>();
    const fast = deferred<Response>();
    const pending = [slow, fast];
    const fetchFn = vi.fn(() => pending.shift()!.promise);
    const applied: QueryOutcome[] = [];
    const session = new QuerySession(new ApiClient('', fetchFn), (o) => applied.push(o));

    const first = session.submit('{}');
    const second = session.submit('{}');
    fast.resolve(jsonResponse(reportFor('hash-2')));
    await second;
    slow.resolve(jsonResponse({ error: { code: 'invalid_query', message: 'nope' } }, 400));
    const firstOutcome = await first;
    expect(firstOutcome.kind).toBe('stale');
    expect(applied).toHaveLength(1);
    expect(applied[0].kind).toBe('report');
  });
});

describe('service client', () => {
  it('exposes the cache header and posts the document text verbatim', async () => {
    const calls: Array<{ url: string; init?: RequestInit }> = [];
    const fetchFn = vi.fn(async (url: string, init?: RequestInit) => {
      calls.push({ url, init });
      return jsonResponse(reportFor('h'), 200, { 'x-cache': 'hit' });
    });
    const client = new ApiClient('http://svc', fetchFn);
    const docText = '{\n "gates": []\n}';
    const { cache } = await client.query(docText);
    expect(cache).toBe('hit');
    expect(calls[0].url).toBe('http://svc/query');
    expect(calls[0].init?.body).toBe(docText);
    expect((calls[0].init?.headers as Record<string, string>)['content-type']).toBe('application/json');
  });

  it('throws a ServiceError carrying the verbatim envelope', async () => {
    const envelope: ErrorEnvelope = {
      error: { code: 'unknown_reference', message: "no stored query result 'beef'" },
    };
    const fetchFn = vi.fn(async () => jsonResponse(envelope, 404));
    const client = new ApiClient('', fetchFn);
    const err = await client.compare('beef', 'beef').catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ServiceError);
    expect((err as ServiceError).status).toBe(404);
    expect((err as ServiceError).envelope).toEqual(envelope);
  });

  it('builds the compare and validate request bodies the service expects', async () => {
    const bodies: string[] = [];
    const fetchFn = vi.fn(async (url: string, init?: RequestInit) => {
      bodies.push(`${url} ${String(init?.body)}`);
      return jsonResponse({ points: [], skipped_weeks: [], summary: {} });
    });
    const client = new ApiClient('', fetchFn);
    await client.compare('aaaa', 'bbbb');
    await client.validate('vws-1', {
      gate_id: 'g',
      line: [
        [-77.2613, 39.229],
        [-77.2613, 39.231],
      ],
      positive_direction: 'left_to_right',
    });
    expect(bodies[0]).toBe('/compare {"a":"aaaa","b":"bbbb"}');
    expect(bodies[1]).toBe(
      '/validate {"station_id":"vws-1","gate":{"gate_id":"g","line":[[-77.2613,39.229],[-77.2613,39.231]],"positive_direction":"left_to_right"}}',
    );
  });

  it('requests the network extract with a comma-joined bbox', async () => {
    const urls: string[] = [];
    const fetchFn = vi.fn(async (url: string) => {
      urls.push(url);
      return jsonResponse({ count: 0, segments: [] });
    });
    const client = new ApiClient('http://svc', fetchFn);
    await client.network([-77.42, 39.21, -77.38, 39.3]);
    expect(urls[0]).toBe('http://svc/network?bbox=-77.42,39.21,-77.38,39.3');
  });
});
