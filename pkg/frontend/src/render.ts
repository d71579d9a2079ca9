/** HTML-string renderers.
 *
 * Pure functions of (store state, current time) so the same state
 * always renders the same markup — which is also what makes them
 * testable without a DOM.
 */
import type { AlertRecord, EnvField, FrequencySetting } from "./types.js";
import { ENV_FIELDS, FIELD_UNITS } from "./types.js";
import type { AreaView, DashboardState } from "./store.js";
import { declarationActive, isStale } from "./store.js";

export function esc(s: unknown): string {
  return String(s)
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const LEVEL_LABEL: Record<string, string> = {
  NFR: "no risk",
  LFR: "low",
  HFR: "high",
  EFR: "extreme",
};

export function levelBadge(level: string): string {
  const cls = `badge lv-${level.toLowerCase()}`;
  return `<span class="${cls}">${esc(level)} · ${esc(LEVEL_LABEL[level] ?? "?")}</span>`;
}

function fmtTime(unixS: number): string {
  return new Date(unixS * 1000).toISOString().slice(11, 19) + "Z";
}

function fmtCountdown(secondsLeft: number): string {
  const s = Math.max(0, Math.floor(secondsLeft));
  const h = Math.floor(s / 3600);
  const m = Math.floor((s % 3600) / 60);
  return h > 0 ? `${h}h ${m}m` : `${m}m ${s % 60}s`;
}

/** Inline SVG polyline of recent percentages, fixed 0..100 scale. */
export function sparklineSvg(points: number[], w = 120, h = 28): string {
  if (points.length < 2) return `<svg class="spark" width="${w}" height="${h}"></svg>`;
  const step = w / (points.length - 1);
  const coords = points
    .map((p, i) => `${(i * step).toFixed(1)},${(h - (p / 100) * h).toFixed(1)}`)
    .join(" ");
  return (
    `<svg class="spark" width="${w}" height="${h}" viewBox="0 0 ${w} ${h}">` +
    `<polyline fill="none" stroke="currentColor" stroke-width="1.5" points="${coords}"/></svg>`
  );
}

export function renderReadings(values: Record<string, number>): string {
  const cells = ENV_FIELDS.map((f: EnvField) => {
    const v = values[f];
    const shown = v === undefined ? "--" : v.toFixed(1);
    return `<span class="reading" data-field="${f}">${esc(shown)}<small>${esc(FIELD_UNITS[f])}</small></span>`;
  });
  return `<div class="readings">${cells.join("")}</div>`;
}

export function renderAreaCard(view: AreaView, nowS: number): string {
  const d = view.detail;
  const last = d.last_assessment;
  const stale = isStale(view, nowS);
  const decl = declarationActive(d.declaration, nowS) ? d.declaration : null;
  const pct = d.percentage === null ? "--" : d.percentage.toFixed(1);
  let h = `<div class="card area-card" data-area="${esc(d.area_id)}" data-level="${d.level}">`;
  h += `<div class="card-head"><span class="area-name">${esc(d.area_id)}</span>${levelBadge(d.level)}`;
  if (stale) h += `<span class="stale" title="no report for ${STALE_HINT}">stale</span>`;
  h += `</div>`;
  h += `<div class="gauge"><b>${esc(pct)}</b><small>% risk</small>${sparklineSvg(view.sparkline)}</div>`;
  if (decl) {
    h += `<div class="decl-banner">declared ${levelBadge(decl.level)} · expires in ${esc(fmtCountdown(decl.expires_at - nowS))}</div>`;
  }
  if (d.active_alert) {
    h += `<div class="alert-banner lv-${d.active_alert.level.toLowerCase()}">⚠ ${esc(d.active_alert.level)} alert since ${esc(fmtTime(d.active_alert.created_at))}</div>`;
  }
  if (last) {
    h += renderReadings(last.values);
    h += `<div class="card-foot">window: <b data-role="window">${esc(last.window_used)}</b>`;
    h += ` · samples: ${d.samples_today} · every ${d.expected_period_s}s`;
    h += ` · at ${esc(fmtTime(last.timestamp))}</div>`;
  } else {
    h += `<div class="card-foot muted">no measurements yet</div>`;
  }
  h += `</div>`;
  return h;
}

const STALE_HINT = "3+ expected cycles";

export function renderAreaDetail(view: AreaView, nowS: number): string {
  const d = view.detail;
  const last = d.last_assessment;
  let h = `<div class="detail" data-area="${esc(d.area_id)}">`;
  h += renderAreaCard(view, nowS);
  if (last) {
    h += `<table class="avg-table"><tr><th>variable</th><th>last</th><th>average</th></tr>`;
    for (const f of ENV_FIELDS) {
      h += `<tr><td>${f}</td><td>${esc(last.values[f]?.toFixed(2) ?? "--")}</td>` +
        `<td>${esc(last.averages[f]?.toFixed(2) ?? "--")}</td></tr>`;
    }
    h += `</table>`;
    if (last.clamped.length) {
      h += `<div class="muted">clamped: ${esc(last.clamped.join(", "))}</div>`;
    }
  }
  h += `</div>`;
  return h;
}

export function renderAlertRow(al: AlertRecord): string {
  return (
    `<div class="alert-row st-${al.state}" data-alert="${esc(al.alert_id)}">` +
    `${levelBadge(al.level)} <b>${esc(al.area_id)}</b> at ${al.percentage.toFixed(1)}%` +
    ` <span class="al-state">${esc(al.state)}</span>` +
    `<span class="al-time">${esc(fmtTime(al.created_at))}</span></div>`
  );
}

export function renderAlertFeed(feed: AlertRecord[]): string {
  if (feed.length === 0) return `<div class="empty">No alerts.</div>`;
  return feed.map(renderAlertRow).join("");
}

export function renderFrequencies(
  frequencies: Record<string, FrequencySetting>,
): string {
  const ids = Object.keys(frequencies).sort();
  if (ids.length === 0) return `<div class="empty">No pending changes.</div>`;
  return ids
    .map((id) => {
      const f = frequencies[id];
      return (
        `<div class="freq-row st-${f.status}" data-device="${esc(id)}">` +
        `${esc(id)} → ${f.period_s}s <span class="freq-state">${esc(f.status)}</span></div>`
      );
    })
    .join("");
}

export function renderTopbar(state: DashboardState): string {
  const dot = state.connection === "live" ? "dot live" : "dot dead";
  const st = state.stats;
  let h = `<span class="${dot}"></span><span class="conn">${esc(state.connection)}</span>`;
  if (st) {
    h += `<span class="stat">areas <b>${st.areas}</b></span>` +
      `<span class="stat">accepted <b>${st.accepted}</b></span>` +
      `<span class="stat">rejected <b>${st.rejections}</b></span>` +
      `<span class="stat">alerts <b>${st.alerts_active}</b></span>`;
  }
  h += `<span class="stat">seq <b>${state.lastSeq}</b></span>`;
  return h;
}

/** The whole single-page layout from one state value. */
export function renderDashboard(
  state: DashboardState,
  nowS: number,
  selectedArea: string | null = null,
): string {
  const areaIds = Object.keys(state.areas).sort();
  const cards = areaIds
    .map((id) => renderAreaCard(state.areas[id], nowS))
    .join("");
  const detail =
    selectedArea && state.areas[selectedArea]
      ? renderAreaDetail(state.areas[selectedArea], nowS)
      : "";
  return (
    `<div class="topbar">${renderTopbar(state)}</div>` +
    `<div class="columns"><div class="area-grid">${cards || '<div class="empty">No areas yet.</div>'}</div>` +
    `<div class="side"><h3>Alerts</h3>${renderAlertFeed(state.alertFeed)}` +
    `<h3>Frequency changes</h3>${renderFrequencies(state.frequencies)}</div></div>` +
    detail
  );
}
