/** Client-side state, reduced from REST snapshots plus the event stream.
 *
 * The reducer is deterministic and dedups by log sequence number, so
 * replaying the same events (e.g. after a reconnect that overlaps the
 * backlog) cannot double-apply anything: given the same snapshots and
 * the same event sequence, the resulting state is identical.
 */
import type {
  AlertRecord,
  AreaDetail,
  Assessment,
  Declaration,
  FrequencySetting,
  ServiceStats,
  StreamEvent,
} from "./types.js";
import type { StreamStatus } from "./sse.js";

const SPARK_POINTS = 40;
const FEED_MAX = 100;
/** An area is stale once this many expected cycles pass in silence. */
export const STALE_CYCLES = 3;

export interface AreaView {
  detail: AreaDetail;
  sparkline: number[]; // recent percentages, oldest first
}

export interface DashboardState {
  areas: Record<string, AreaView>;
  alertFeed: AlertRecord[]; // every transition, newest first
  frequencies: Record<string, FrequencySetting>;
  stats: ServiceStats | null;
  connection: StreamStatus;
  lastSeq: number;
}

function emptyDetail(areaId: string): AreaDetail {
  return {
    area_id: areaId,
    level: "NFR",
    percentage: null,
    last_assessment: null,
    samples_today: 0,
    expected_period_s: 300,
    active_alert: null,
    declaration: null,
    recent: [],
  };
}

export function isStale(view: AreaView, nowS: number): boolean {
  const last = view.detail.last_assessment;
  if (!last) return false; // nothing expected yet
  return nowS - last.timestamp > STALE_CYCLES * view.detail.expected_period_s;
}

export function declarationActive(
  decl: Declaration | null,
  nowS: number,
): boolean {
  return decl !== null && decl.declared_at <= nowS && nowS < decl.expires_at;
}

export class DashboardStore {
  state: DashboardState = {
    areas: {},
    alertFeed: [],
    frequencies: {},
    stats: null,
    connection: "connecting",
    lastSeq: 0,
  };

  private listeners = new Set<(s: DashboardState) => void>();

  subscribe(fn: (s: DashboardState) => void): () => void {
    this.listeners.add(fn);
    return () => this.listeners.delete(fn);
  }

  private notify(): void {
    for (const fn of this.listeners) fn(this.state);
  }

  private view(areaId: string): AreaView {
    let v = this.state.areas[areaId];
    if (!v) {
      v = { detail: emptyDetail(areaId), sparkline: [] };
      this.state.areas[areaId] = v;
    }
    return v;
  }

  /** Replace area state from GET /areas (initial load or poll fallback). */
  applyAreas(details: AreaDetail[]): void {
    for (const d of details) {
      const prior = this.state.areas[d.area_id];
      const spark = d.recent.map((a) => a.percentage);
      this.state.areas[d.area_id] = {
        detail: d,
        // keep the longer local history if we already streamed more
        sparkline:
          prior && prior.sparkline.length > spark.length
            ? prior.sparkline
            : spark,
      };
    }
    this.notify();
  }

  applyAlertHistory(records: AlertRecord[]): void {
    // newest first in the feed; the endpoint returns oldest first
    this.state.alertFeed = records.slice(-FEED_MAX).reverse();
    this.notify();
  }

  applyStats(stats: ServiceStats): void {
    this.state.stats = stats;
    this.notify();
  }

  setConnection(status: StreamStatus): void {
    if (this.state.connection === status) return;
    this.state.connection = status;
    this.notify();
  }

  /** Reduce one stream event.  Returns false for duplicates. */
  applyEvent(ev: StreamEvent): boolean {
    if (ev.seq <= this.state.lastSeq) return false;
    this.state.lastSeq = ev.seq;
    switch (ev.kind) {
      case "assessment":
        this.onAssessment(ev.payload as Assessment);
        break;
      case "alert":
        this.onAlert(ev.payload as AlertRecord);
        break;
      case "declaration":
        this.onDeclaration(ev.payload as Declaration);
        break;
      case "frequency-change":
        this.onFrequency(ev.payload as FrequencySetting);
        break;
    }
    this.notify();
    return true;
  }

  private onAssessment(a: Assessment): void {
    const view = this.view(a.area_id);
    const d = view.detail;
    d.level = a.level;
    d.percentage = a.percentage;
    d.last_assessment = a;
    d.samples_today += 1;
    d.recent = [...d.recent.slice(-19), a];
    view.sparkline = [...view.sparkline.slice(-(SPARK_POINTS - 1)), a.percentage];
  }

  private onAlert(al: AlertRecord): void {
    const view = this.view(al.area_id);
    if (al.state === "active") {
      view.detail.active_alert = al;
    } else if (view.detail.active_alert?.alert_id === al.alert_id) {
      // superseded alerts are immediately replaced by the next active
      // event; cleared ones just go away
      view.detail.active_alert = al.state === "cleared" ? null : al;
    }
    const feed = this.state.alertFeed.filter(
      (x) => x.alert_id !== al.alert_id,
    );
    feed.unshift(al);
    this.state.alertFeed = feed.slice(0, FEED_MAX);
  }

  private onDeclaration(decl: Declaration): void {
    if (!decl.area_id) return;
    const view = this.view(decl.area_id);
    view.detail.declaration = {
      level: decl.level,
      declared_at: decl.declared_at,
      expires_at: decl.expires_at,
    };
  }

  private onFrequency(f: FrequencySetting): void {
    this.state.frequencies[f.device_id] = f;
  }
}
