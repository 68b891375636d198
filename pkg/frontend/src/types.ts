/**
 * Service contract types, mirroring docs/formats.md one to one.
 *
 * The UI never computes analytics; everything it shows comes straight
 * out of these shapes as returned by the HTTP service.
 */

export type LonLat = [number, number];

export interface StudyAreaJson {
  polygon: LonLat[];
}

export type GateDirection = 'left_to_right' | 'right_to_left';

export interface GateJson {
  gate_id: string;
  line: LonLat[];
  positive_direction: GateDirection;
}

export interface GateSequenceEntry {
  gate: string;
  sign: number;
}

export interface TimeWindowJson {
  start: string;
  end: string;
}

export interface QueryDocument {
  study_area?: StudyAreaJson;
  gates: GateJson[];
  gate_sequence: GateSequenceEntry[];
  time_window?: TimeWindowJson;
  require_order: boolean;
  tz: string;
  theta: number;
  active_hours: number[];
}

export interface TripSetEntryJson {
  trip_id: string;
  anchor: string;
  times: string[];
}

export interface TripSetJson {
  total: number;
  entries: TripSetEntryJson[];
}

export interface RouteSetJson {
  route_id: string;
  label: string;
  canonical: string[];
  members: string[];
  fold_scores: number[];
}

export interface ShareRowJson {
  label: string;
  trips: number;
  share: number;
  display: string;
}

export interface ShareTableJson {
  total: number;
  rows: ShareRowJson[];
}

export interface TravelTimeRowJson {
  label: string;
  n_trips: number;
  mean_minutes: number;
}

export interface TravelTimesJson {
  gate_pair: [string, string];
  rows: TravelTimeRowJson[];
}

export interface HourlyJson {
  tz: string;
  bin_hours: number;
  bins: Record<string, Record<string, number>>;
}

export interface AvoidShareJson {
  primary_label: string;
  window_trips: number;
  off_primary: number;
  share: number;
  display: string;
}

export interface MatchRejectionJson {
  trip_id: string;
  reason: string;
}

export interface DiagnosticsJson {
  corpus_trips: number;
  matched: number;
  match_rejections: MatchRejectionJson[];
  filtered_in: number;
  unfolded: number;
}

export interface ManifestJson {
  tool: string;
  version: string;
  inputs: Record<string, { path: string; sha256: string }>;
  params: Record<string, number | string>;
}

export interface QueryReport {
  manifest: ManifestJson;
  query_hash: string;
  trip_set: TripSetJson;
  route_sets: RouteSetJson[];
  share_table: ShareTableJson;
  travel_times: TravelTimesJson;
  hourly: HourlyJson;
  avoid_share: AvoidShareJson | null;
  diagnostics: DiagnosticsJson;
}

export interface ComparisonRowJson {
  label: string;
  share_a: number;
  share_b: number;
  delta_pp: number;
}

export interface ComparisonJson {
  total_a: number;
  total_b: number;
  rows: ComparisonRowJson[];
}

export interface CorrelationPointJson {
  station_id: string;
  week_start: string;
  week_index: number;
  r: number;
  n_days: number;
}

export interface BoxSummaryJson {
  min: number | null;
  q1: number | null;
  median: number | null;
  q3: number | null;
  max: number | null;
  n: number;
  n_undefined: number;
}

export interface CorrelationsJson {
  points: CorrelationPointJson[];
  skipped_weeks: string[];
  summary: BoxSummaryJson;
}

export interface StatusJson {
  status: string;
  version: string;
  network: { nodes: number; segments: number };
  corpus: { trips: number };
  counts: { stations: string[] };
  queries_cached: number;
}

export interface NetworkSegmentJson {
  segment_id: string;
  name: string;
  road_class: string;
  length_m: number;
  coords: LonLat[];
}

export interface NetworkExtract {
  count: number;
  segments: NetworkSegmentJson[];
}

export interface ErrorEnvelope {
  error: { code: string; message: string };
}
