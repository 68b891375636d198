/**
 * Typed client for the query service plus the single-flight session
 * rule: the UI keeps at most one query "current", and any response that
 * arrives for a superseded submission is discarded by sequence number.
 */

import type {
  ComparisonJson,
  CorrelationsJson,
  ErrorEnvelope,
  GateJson,
  NetworkExtract,
  QueryReport,
  StatusJson,
} from './types';

export class ServiceError extends Error {
  constructor(
    public readonly status: number,
    public readonly envelope: ErrorEnvelope,
  ) {
    super(envelope.error.message);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function asError(res: Response): Promise<ServiceError> {
  let envelope: ErrorEnvelope;
  try {
    envelope = (await res.json()) as ErrorEnvelope;
  } catch {
    envelope = { error: { code: 'bad_response', message: `HTTP ${res.status}` } };
  }
  return new ServiceError(res.status, envelope);
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (u, i) => fetch(u, i),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const res = await this.fetchFn(this.baseUrl + path);
    if (!res.ok) throw await asError(res);
    return (await res.json()) as T;
  }

  private async postJson<T>(path: string, body: string): Promise<T> {
    const res = await this.fetchFn(this.baseUrl + path, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body,
    });
    if (!res.ok) throw await asError(res);
    return (await res.json()) as T;
  }

  status(): Promise<StatusJson> {
    return this.getJson('/status');
  }

  network(bbox: [number, number, number, number]): Promise<NetworkExtract> {
    return this.getJson(`/network?bbox=${bbox.join(',')}`);
  }

  /** Posts the serialized document verbatim so the hash covers its exact content. */
  async query(documentText: string): Promise<{ report: QueryReport; cache: string }> {
    const res = await this.fetchFn(this.baseUrl + '/query', {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: documentText,
    });
    if (!res.ok) throw await asError(res);
    const report = (await res.json()) as QueryReport;
    return { report, cache: res.headers.get('x-cache') ?? '' };
  }

  compare(a: string, b: string): Promise<ComparisonJson> {
    return this.postJson('/compare', JSON.stringify({ a, b }));
  }

  validate(stationId: string, gate: GateJson, tz?: string): Promise<CorrelationsJson> {
    const body: Record<string, unknown> = { station_id: stationId, gate };
    if (tz !== undefined) body.tz = tz;
    return this.postJson('/validate', JSON.stringify(body));
  }
}

export type QueryOutcome =
  | { kind: 'report'; seq: number; report: QueryReport; cache: string }
  | { kind: 'error'; seq: number; error: ServiceError | Error }
  | { kind: 'stale'; seq: number };

/**
 * Serializes the submit loop: each submission takes the next sequence
 * number, and only the latest one may touch the screen.  A slow response
 * overtaken by a newer submission resolves as 'stale' and its payload is
 * dropped without rendering.
 */
export class QuerySession {
  private seq = 0;

  constructor(
    private readonly client: ApiClient,
    private readonly apply: (outcome: QueryOutcome) => void,
  ) {}

  get current(): number {
    return this.seq;
  }

  async submit(documentText: string): Promise<QueryOutcome> {
    const ticket = ++this.seq;
    let outcome: QueryOutcome;
    try {
      const { report, cache } = await this.client.query(documentText);
      outcome =
        ticket === this.seq
          ? { kind: 'report', seq: ticket, report, cache }
          : { kind: 'stale', seq: ticket };
    } catch (err) {
      outcome =
        ticket === this.seq
          ? { kind: 'error', seq: ticket, error: err as Error }
          : { kind: 'stale', seq: ticket };
    }
    if (outcome.kind !== 'stale') this.apply(outcome);
    return outcome;
  }
}
