import { describe, expect, it } from "vitest";
import {
  DashboardStore,
  declarationActive,
  isStale,
} from "../src/store.js";
import type {
  AlertRecord,
  AreaDetail,
  Assessment,
  StreamEvent,
} from "../src/types.js";

const T0 = 1_760_000_000;

function assessment(over: Partial<Assessment> = {}): Assessment {
  return {
    area_id: "ridge-07",
    timestamp: T0,
    percentage: 5.4,
    level: "NFR",
    window_used: "all",
    values: { temperature_c: 25 },
    averages: { temperature_c: 25 },
    activations: {},
    clamped: [],
    declaration_active: false,
    ...over,
  };
}

function alert(over: Partial<AlertRecord> = {}): AlertRecord {
  return {
    alert_id: "al-ridge-07-1760000000",
    area_id: "ridge-07",
    level: "HFR",
    percentage: 33.0,
    created_at: T0,
    triggered_by: "aa".repeat(16),
    state: "active",
    superseded_by: null,
    ...over,
  };
}

function ev(seq: number, kind: StreamEvent["kind"], payload: unknown): StreamEvent {
  return { seq, kind, payload } as StreamEvent;
}

describe("event reduction", () => {
  it("assessment events update the area card fields", () => {
    const s = new DashboardStore();
    s.applyEvent(ev(1, "assessment", assessment({ percentage: 12.5, level: "LFR" })));
    const view = s.state.areas["ridge-07"];
    expect(view.detail.level).toBe("LFR");
    expect(view.detail.percentage).toBe(12.5);
    expect(view.sparkline).toEqual([12.5]);
    expect(view.detail.samples_today).toBe(1);
  });

  it("drops duplicate sequence numbers", () => {
    const s = new DashboardStore();
    expect(s.applyEvent(ev(5, "assessment", assessment()))).toBe(true);
    expect(s.applyEvent(ev(5, "assessment", assessment({ percentage: 99 })))).toBe(false);
    expect(s.applyEvent(ev(4, "assessment", assessment({ percentage: 99 })))).toBe(false);
    expect(s.state.areas["ridge-07"].detail.percentage).toBe(5.4);
    expect(s.state.areas["ridge-07"].detail.samples_today).toBe(1);
  });

  it("replaying the same sequence yields identical state", () => {
    const events = [
      ev(1, "assessment", assessment()),
      ev(2, "assessment", assessment({ timestamp: T0 + 60, percentage: 28, level: "HFR" })),
      ev(3, "alert", alert()),
      ev(4, "declaration", { area_id: "ridge-07", level: "HFR", declared_at: T0, expires_at: T0 + 7200 }),
      ev(5, "frequency-change", { device_id: "356938035643809", period_s: 120, status: "pending" }),
    ];
    const a = new DashboardStore();
    const b = new DashboardStore();
    for (const e of events) a.applyEvent(e);
    // b sees the whole sequence twice (reconnect overlap)
    for (const e of events) b.applyEvent(e);
    for (const e of events) b.applyEvent(e);
    expect(JSON.stringify(b.state)).toBe(JSON.stringify(a.state));
  });

  it("an active alert lands on the area card and the feed", () => {
    const s = new DashboardStore();
    s.applyEvent(ev(1, "alert", alert()));
    expect(s.state.areas["ridge-07"].detail.active_alert?.level).toBe("HFR");
    expect(s.state.alertFeed).toHaveLength(1);
  });

  it("supersede chains keep one feed row per alert id", () => {
    const s = new DashboardStore();
    const first = alert();
    s.applyEvent(ev(1, "alert", first));
    s.applyEvent(
      ev(2, "alert", { ...first, state: "superseded", superseded_by: "al-ridge-07-x" }),
    );
    const second = alert({ alert_id: "al-ridge-07-x", level: "EFR", percentage: 61 });
    s.applyEvent(ev(3, "alert", second));
    expect(s.state.alertFeed.map((a) => a.alert_id)).toEqual([
      "al-ridge-07-x",
      first.alert_id,
    ]);
    expect(s.state.alertFeed[1].state).toBe("superseded");
    expect(s.state.areas["ridge-07"].detail.active_alert?.level).toBe("EFR");
  });

  it("a cleared alert leaves the area card", () => {
    const s = new DashboardStore();
    const a = alert();
    s.applyEvent(ev(1, "alert", a));
    s.applyEvent(ev(2, "alert", { ...a, state: "cleared" }));
    expect(s.state.areas["ridge-07"].detail.active_alert).toBeNull();
    expect(s.state.alertFeed[0].state).toBe("cleared");
  });

  it("frequency changes track pending then applied", () => {
    const s = new DashboardStore();
    const dev = "356938035643809";
    s.applyEvent(ev(1, "frequency-change", { device_id: dev, period_s: 60, status: "pending" }));
    expect(s.state.frequencies[dev].status).toBe("pending");
    s.applyEvent(ev(2, "frequency-change", { device_id: dev, period_s: 60, status: "applied" }));
    expect(s.state.frequencies[dev].status).toBe("applied");
  });
});

describe("snapshots", () => {
  const detail: AreaDetail = {
    area_id: "ridge-07",
    level: "LFR",
    percentage: 17.0,
    last_assessment: assessment({ percentage: 17.0, level: "LFR" }),
    samples_today: 4,
    expected_period_s: 180,
    active_alert: null,
    declaration: null,
    recent: [assessment({ percentage: 11 }), assessment({ percentage: 17 })],
  };

  it("applyAreas seeds cards and sparklines", () => {
    const s = new DashboardStore();
    s.applyAreas([detail]);
    expect(s.state.areas["ridge-07"].detail.samples_today).toBe(4);
    expect(s.state.areas["ridge-07"].sparkline).toEqual([11, 17]);
  });

  it("a poll snapshot does not shorten a longer streamed sparkline", () => {
    const s = new DashboardStore();
    for (let i = 1; i <= 5; i++) {
      s.applyEvent(ev(i, "assessment", assessment({ timestamp: T0 + i, percentage: i })));
    }
    s.applyAreas([detail]);
    expect(s.state.areas["ridge-07"].sparkline).toEqual([1, 2, 3, 4, 5]);
  });

  it("alert history arrives oldest-first and renders newest-first", () => {
    const s = new DashboardStore();
    s.applyAlertHistory([
      alert({ alert_id: "a1", created_at: T0 }),
      alert({ alert_id: "a2", created_at: T0 + 60 }),
    ]);
    expect(s.state.alertFeed.map((a) => a.alert_id)).toEqual(["a2", "a1"]);
  });
});

describe("derived flags", () => {
  it("stale after three missed cycles", () => {
    const view = {
      detail: {
        ...({} as AreaDetail),
        area_id: "x",
        expected_period_s: 60,
        last_assessment: assessment({ timestamp: T0 }),
      },
      sparkline: [],
    };
    expect(isStale(view, T0 + 179)).toBe(false);
    expect(isStale(view, T0 + 181)).toBe(true);
  });

  it("never stale before the first measurement", () => {
    const view = {
      detail: { ...({} as AreaDetail), expected_period_s: 60, last_assessment: null },
      sparkline: [],
    };
    expect(isStale(view, T0)).toBe(false);
  });

  it("declaration window is half-open", () => {
    const d = { level: "HFR" as const, declared_at: T0, expires_at: T0 + 100 };
    expect(declarationActive(d, T0 - 1)).toBe(false);
    expect(declarationActive(d, T0)).toBe(true);
    expect(declarationActive(d, T0 + 99)).toBe(true);
    expect(declarationActive(d, T0 + 100)).toBe(false);
    expect(declarationActive(null, T0)).toBe(false);
  });
});
