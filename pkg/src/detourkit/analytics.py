"""Tabular analytics over folded routes and count series.

Route-share tables, per-route gate-to-gate travel times, period
comparisons, hourly binning with avoidance shares, and the Pearson
machinery used to validate probe counts against station ground truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import date, timedelta
from zoneinfo import ZoneInfo

import numpy as np

from .gates import Gate, TripSetEntry, detect_crossings
from .ingest import DailyCountSeries, Trip
from .routes import RouteSet


class AnalyticsError(Exception):
    pass


# -- route shares ----------------------------------------------------------------


def format_share(fraction: float) -> str:
    """Display form of a share: integer percent at >=1%, one decimal below."""
    pct = fraction * 100.0
    if pct >= 1.0 or pct == 0.0:
        return f"{pct:.0f}%"
    return f"{pct:.1f}%"


@dataclass
class ShareRow:
    label: str
    trips: int
    share: float
    display: str


@dataclass
class RouteShareTable:
    rows: list[ShareRow]
    total: int


def route_share_table(route_sets: list[RouteSet]) -> RouteShareTable:
    """Trips and share per route, largest first (ties by label)."""
    total = sum(len(rs.members) for rs in route_sets)
    if total == 0:
        return RouteShareTable(rows=[], total=0)
    tally: dict[str, int] = {}
    for rs in route_sets:
        tally[rs.label] = tally.get(rs.label, 0) + len(rs.members)
    rows = [
        ShareRow(label=label, trips=n, share=n / total, display=format_share(n / total))
        for label, n in sorted(tally.items(), key=lambda kv: (-kv[1], kv[0]))
    ]
    return RouteShareTable(rows=rows, total=total)


# -- travel times ----------------------------------------------------------------


@dataclass
class TravelTimeRow:
    label: str
    n_trips: int
    mean_minutes: float


@dataclass
class TravelTimeStats:
    gate_pair: tuple[str, str]
    rows: list[TravelTimeRow]


def travel_time_stats(
    entries: list[TripSetEntry],
    route_sets: list[RouteSet],
    gate_pair: tuple[str, str],
) -> TravelTimeStats:
    """Mean first-to-last gate travel time per route, in minutes.

    A trip's travel time runs from its (already refined) first-gate
    crossing to its last-gate crossing.  Trips that were filtered in but
    never folded into a RouteSet are not represented here.
    """
    by_id = {e.trip_id: e for e in entries}
    rows = []
    for rs in route_sets:
        minutes = []
        for tid in rs.members:
            e = by_id.get(tid)
            if e is None:
                raise AnalyticsError(f"route member {tid!r} has no crossing entry")
            minutes.append((e.times[-1] - e.times[0]).total_seconds() / 60.0)
        if minutes:
            rows.append(
                TravelTimeRow(
                    label=rs.label,
                    n_trips=len(minutes),
                    mean_minutes=sum(minutes) / len(minutes),
                )
            )
    rows.sort(key=lambda r: (-r.n_trips, r.label))
    return TravelTimeStats(gate_pair=gate_pair, rows=rows)


# -- period comparison -------------------------------------------------------------


@dataclass
class ComparisonRow:
    label: str
    share_a: float
    share_b: float
    delta_pp: float


@dataclass
class ShareComparison:
    rows: list[ComparisonRow]
    total_a: int
    total_b: int


def compare_periods(a: RouteShareTable, b: RouteShareTable) -> ShareComparison:
    """Per-label share deltas between two periods, in percentage points."""
    shares_a = {r.label: r.share for r in a.rows}
    shares_b = {r.label: r.share for r in b.rows}
    labels = set(shares_a) | set(shares_b)
    rows = [
        ComparisonRow(
            label=label,
            share_a=shares_a.get(label, 0.0),
            share_b=shares_b.get(label, 0.0),
            delta_pp=(shares_b.get(label, 0.0) - shares_a.get(label, 0.0)) * 100.0,
        )
        for label in labels
    ]
    rows.sort(key=lambda r: (-r.share_a, -r.share_b, r.label))
    return ShareComparison(rows=rows, total_a=a.total, total_b=b.total)


# -- hourly bins and avoidance -----------------------------------------------------


@dataclass
class HourlyMatrix:
    """Counts of trips per local time bin per route label.

    Bins are keyed by the bin-start local time as "YYYY-MM-DDTHH:00"; a
    trip lands in the bin of its first qualifying gate crossing.
    """

    tz: str
    bin_hours: int
    counts: dict[str, dict[str, int]] = field(default_factory=dict)

    def marginals(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for per_label in self.counts.values():
            for label, n in per_label.items():
                out[label] = out.get(label, 0) + n
        return out


def hourly_route_counts(
    entries: list[TripSetEntry],
    route_sets: list[RouteSet],
    tz: str,
    bin_hours: int = 1,
) -> HourlyMatrix:
    if 24 % bin_hours != 0:
        raise AnalyticsError(f"bin_hours must divide 24, got {bin_hours}")
    label_of: dict[str, str] = {}
    for rs in route_sets:
        for tid in rs.members:
            label_of[tid] = rs.label
    zone = ZoneInfo(tz)
    matrix = HourlyMatrix(tz=tz, bin_hours=bin_hours)
    for e in entries:
        label = label_of.get(e.trip_id)
        if label is None:
            continue
        local = e.anchor_t.astimezone(zone)
        hour = (local.hour // bin_hours) * bin_hours
        key = f"{local.date().isoformat()}T{hour:02d}:00"
        per_label = matrix.counts.setdefault(key, {})
        per_label[label] = per_label.get(label, 0) + 1
    return matrix


@dataclass
class AvoidShare:
    primary_label: str
    window_trips: int
    off_primary: int
    share: float
    display: str


def avoid_share(
    matrix: HourlyMatrix,
    active_hours: list[int],
    primary_label: str | None = None,
) -> AvoidShare | None:
    """Share of active-window trips that were not on the primary route.

    Only bins whose hour-of-day falls in active_hours count.  The primary
    route defaults to the most-used label within those bins (ties broken
    by label), standing in for the pathway trips were expected to take.
    Returns None when the window holds no trips.
    """
    wanted = set(active_hours)
    tally: dict[str, int] = {}
    for key, per_label in matrix.counts.items():
        hour = int(key[11:13])
        covered = {(hour + i) % 24 for i in range(matrix.bin_hours)}
        if covered & wanted:
            for label, n in per_label.items():
                tally[label] = tally.get(label, 0) + n
    total = sum(tally.values())
    if total == 0:
        return None
    if primary_label is None:
        primary_label = min(tally, key=lambda lb: (-tally[lb], lb))
    off = total - tally.get(primary_label, 0)
    return AvoidShare(
        primary_label=primary_label,
        window_trips=total,
        off_primary=off,
        share=off / total,
        display=format_share(off / total),
    )


# -- correlation -------------------------------------------------------------------


def pearson_r(xs, ys) -> float | None:
    """Pearson correlation coefficient, or None when a side has no variance."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise AnalyticsError(f"series shapes differ: {x.shape} vs {y.shape}")
    n = x.shape[0]
    if n < 2:
        raise AnalyticsError(f"need at least 2 points, got {n}")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        return None
    r = float(np.dot(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


@dataclass
class CorrelationPoint:
    station_id: str
    week_start: date
    week_index: int
    r: float | None
    n_days: int


@dataclass
class WeeklyCorrelations:
    points: list[CorrelationPoint]
    skipped_weeks: list[date]


def weekly_correlations(probe: DailyCountSeries, truth: DailyCountSeries) -> WeeklyCorrelations:
    """Per-week Pearson r between daily probe and ground-truth counts.

    Dates are aligned, then partitioned into Monday-start weeks.  A week
    yields a point only when all 7 days are present in both series;
    incomplete weeks inside the overlap span are reported as skipped.
    Weeks where a side is constant yield a point with r = None.
    """
    p = dict(probe.days)
    t = dict(truth.days)
    overlap = sorted(set(p) & set(t))
    if not overlap:
        raise AnalyticsError("count series have no overlapping dates")
    first, last = overlap[0], overlap[-1]
    monday = first - timedelta(days=first.weekday())
    points: list[CorrelationPoint] = []
    skipped: list[date] = []
    while monday <= last:
        week = [monday + timedelta(days=i) for i in range(7)]
        if all(d in p and d in t for d in week):
            r = pearson_r([p[d] for d in week], [t[d] for d in week])
            points.append(
                CorrelationPoint(
                    station_id=truth.station_id,
                    week_start=monday,
                    week_index=monday.isocalendar().week,
                    r=r,
                    n_days=7,
                )
            )
        else:
            skipped.append(monday)
        monday += timedelta(days=7)
    return WeeklyCorrelations(points=points, skipped_weeks=skipped)


@dataclass
class BoxSummary:
    minimum: float | None
    q1: float | None
    median: float | None
    q3: float | None
    maximum: float | None
    n: int
    n_undefined: int


def box_summary(points: list[CorrelationPoint]) -> BoxSummary:
    """Five-number summary over defined r values; undefined points counted aside."""
    vals = [pt.r for pt in points if pt.r is not None]
    n_undef = len(points) - len(vals)
    if not vals:
        return BoxSummary(None, None, None, None, None, 0, n_undef)
    arr = np.asarray(vals, dtype=np.float64)
    q1, med, q3 = (float(q) for q in np.percentile(arr, [25, 50, 75]))
    return BoxSummary(
        minimum=float(arr.min()),
        q1=q1,
        median=med,
        q3=q3,
        maximum=float(arr.max()),
        n=len(vals),
        n_undefined=n_undef,
    )


def probe_daily_counts(trips: list[Trip], gate: Gate, tz: str, station_id: str) -> DailyCountSeries:
    """Daily count of probe trips crossing a gate, by local day of first crossing.

    The span between the first and last observed day is zero-filled so
    the series aligns cleanly against station ground truth.
    """
    zone = ZoneInfo(tz)
    tally: dict[date, int] = {}
    for trip in trips:
        crossings = detect_crossings(trip, gate)
        if not crossings:
            continue
        d = min(c.t for c in crossings).astimezone(zone).date()
        tally[d] = tally.get(d, 0) + 1
    if not tally:
        return DailyCountSeries(station_id=station_id, timezone=tz, days=[])
    lo, hi = min(tally), max(tally)
    days = []
    d = lo
    while d <= hi:
        days.append((d, tally.get(d, 0)))
        d += timedelta(days=1)
    return DailyCountSeries(station_id=station_id, timezone=tz, days=days)


# -- serialization -----------------------------------------------------------------


def share_table_to_json(table: RouteShareTable) -> dict:
    return {
        "total": table.total,
        "rows": [
            {"label": r.label, "trips": r.trips, "share": r.share, "display": r.display}
            for r in table.rows
        ],
    }


def share_table_from_json(doc: dict) -> RouteShareTable:
    return RouteShareTable(
        rows=[
            ShareRow(
                label=r["label"],
                trips=int(r["trips"]),
                share=float(r["share"]),
                display=r["display"],
            )
            for r in doc["rows"]
        ],
        total=int(doc["total"]),
    )


def travel_times_to_json(stats: TravelTimeStats) -> dict:
    return {
        "gate_pair": list(stats.gate_pair),
        "rows": [
            {"label": r.label, "n_trips": r.n_trips, "mean_minutes": r.mean_minutes}
            for r in stats.rows
        ],
    }


def comparison_to_json(cmp: ShareComparison) -> dict:
    return {
        "total_a": cmp.total_a,
        "total_b": cmp.total_b,
        "rows": [
            {
                "label": r.label,
                "share_a": r.share_a,
                "share_b": r.share_b,
                "delta_pp": r.delta_pp,
            }
            for r in cmp.rows
        ],
    }


def hourly_to_json(matrix: HourlyMatrix) -> dict:
    return {
        "tz": matrix.tz,
        "bin_hours": matrix.bin_hours,
        "bins": {key: dict(sorted(v.items())) for key, v in sorted(matrix.counts.items())},
    }


def avoid_share_to_json(av: AvoidShare) -> dict:
    return {
        "primary_label": av.primary_label,
        "window_trips": av.window_trips,
        "off_primary": av.off_primary,
        "share": av.share,
        "display": av.display,
    }


def correlations_to_json(wc: WeeklyCorrelations) -> dict:
    return {
        "points": [
            {
                "station_id": pt.station_id,
                "week_start": pt.week_start.isoformat(),
                "week_index": pt.week_index,
                "r": pt.r,
                "n_days": pt.n_days,
            }
            for pt in wc.points
        ],
        "skipped_weeks": [d.isoformat() for d in wc.skipped_weeks],
        "summary": box_summary_to_json(box_summary(wc.points)),
    }


def box_summary_to_json(box: BoxSummary) -> dict:
    return {
        "min": box.minimum,
        "q1": box.q1,
        "median": box.median,
        "q3": box.q3,
        "max": box.maximum,
        "n": box.n,
        "n_undefined": box.n_undefined,
    }


# -- delimited-text rendering --------------------------------------------------------


def render_share_table(table: RouteShareTable) -> str:
    lines = ["label\ttrips\tshare"]
    for r in table.rows:
        lines.append(f"{r.label}\t{r.trips}\t{r.display}")
    lines.append(f"total\t{table.total}\t100%")
    return "\n".join(lines) + "\n"


def render_travel_times(stats: TravelTimeStats) -> str:
    lines = [f"# travel times between {stats.gate_pair[0]} and {stats.gate_pair[1]}"]
    lines.append("label\tn_trips\tmean_minutes")
    for r in stats.rows:
        lines.append(f"{r.label}\t{r.n_trips}\t{r.mean_minutes:.1f}")
    return "\n".join(lines) + "\n"


def render_comparison(cmp: ShareComparison) -> str:
    lines = ["label\tshare_a\tshare_b\tdelta_pp"]
    for r in cmp.rows:
        lines.append(
            f"{r.label}\t{format_share(r.share_a)}\t{format_share(r.share_b)}\t{r.delta_pp:+.1f}"
        )
    return "\n".join(lines) + "\n"


def render_hourly(matrix: HourlyMatrix) -> str:
    lines = ["bin_start_local\tlabel\tcount"]
    for key in sorted(matrix.counts):
        for label in sorted(matrix.counts[key]):
            lines.append(f"{key}\t{label}\t{matrix.counts[key][label]}")
    return "\n".join(lines) + "\n"


def render_correlations(wc: WeeklyCorrelations) -> str:
    lines = ["station_id\tweek_start\tweek_index\tr\tn_days"]
    for pt in wc.points:
        r_text = "undefined" if pt.r is None else f"{pt.r:.6f}"
        lines.append(f"{pt.station_id}\t{pt.week_start.isoformat()}\t{pt.week_index}\t{r_text}\t{pt.n_days}")
    return "\n".join(lines) + "\n"
