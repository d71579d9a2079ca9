/** Browser entry point: login, stream wiring, forms, poll fallback. */
import { ApiClient, ApiError } from "./api.js";
import { EventStream } from "./sse.js";
import { DashboardStore } from "./store.js";
import { renderDashboard } from "./render.js";
import type { RiskLevelName, StreamEvent } from "./types.js";

const POLL_FALLBACK_MS = 5000;

const api = new ApiClient(window.location.origin);
const store = new DashboardStore();
let stream: EventStream | null = null;
let selectedArea: string | null = null;
let pollTimer: number | null = null;

const $ = (id: string) => document.getElementById(id)!;

function draw(): void {
  $("app").innerHTML = renderDashboard(
    store.state,
    Date.now() / 1000,
    selectedArea,
  );
}

async function refreshSnapshots(): Promise<void> {
  const [areas, alerts, stats] = await Promise.all([
    api.areas(),
    api.alerts(),
    api.stats(),
  ]);
  store.applyAreas(areas);
  store.applyAlertHistory(alerts);
  store.applyStats(stats);
}

function connectStream(): void {
  stream?.stop();
  stream = new EventStream(api.baseUrl, () => api.token, {
    onMessage: (msg) => {
      if (msg.id === null) return;
      store.applyEvent({
        seq: Number(msg.id),
        kind: msg.event,
        payload: JSON.parse(msg.data),
      } as StreamEvent);
    },
    onStatus: (status) => {
      store.setConnection(status);
      if (status === "down" && pollTimer === null) {
        pollTimer = window.setInterval(() => {
          refreshSnapshots().catch(() => undefined);
        }, POLL_FALLBACK_MS);
      } else if (status === "live" && pollTimer !== null) {
        window.clearInterval(pollTimer);
        pollTimer = null;
      }
    },
    onAuthError: () => backToLogin(),
  });
  stream.start();
}

/** Expired or revoked token: stop everything and show the login form. */
function backToLogin(): void {
  stream?.stop();
  if (pollTimer !== null) {
    window.clearInterval(pollTimer);
    pollTimer = null;
  }
  api.logout();
  $("main").style.display = "none";
  $("login").style.display = "";
  showLoginError("session expired; sign in again");
}

function showLoginError(message: string): void {
  $("login-error").textContent = message;
}

async function onLogin(ev: Event): Promise<void> {
  ev.preventDefault();
  const username = ($("login-user") as HTMLInputElement).value;
  const password = ($("login-pass") as HTMLInputElement).value;
  try {
    await api.login(username, password);
  } catch (e) {
    showLoginError(e instanceof ApiError ? e.message : "login failed");
    return;
  }
  $("login").style.display = "none";
  $("main").style.display = "";
  await refreshSnapshots();
  connectStream();
  draw();
}

async function onDeclare(ev: Event): Promise<void> {
  ev.preventDefault();
  const area = ($("decl-area") as HTMLInputElement).value.trim();
  const level = ($("decl-level") as HTMLSelectElement).value as RiskLevelName;
  const hours = Number(($("decl-ttl") as HTMLInputElement).value);
  try {
    await api.declare(area, level, Math.round(hours * 3600));
    $("decl-error").textContent = "";
    await refreshSnapshots();
  } catch (e) {
    // leave state untouched; the server rejected the declaration
    $("decl-error").textContent =
      e instanceof ApiError ? e.message : "declaration failed";
  }
}

async function onFrequency(ev: Event): Promise<void> {
  ev.preventDefault();
  const device = ($("freq-device") as HTMLInputElement).value.trim();
  const period = Number(($("freq-period") as HTMLInputElement).value);
  if (!(period >= 30 && period <= 3600)) {
    $("freq-error").textContent = "period must be 30..3600 s";
    return; // mirror the server-side bound without a round trip
  }
  try {
    await api.setFrequency(device, period);
    $("freq-error").textContent = "";
  } catch (e) {
    $("freq-error").textContent =
      e instanceof ApiError ? e.message : "change failed";
  }
}

function onAppClick(ev: Event): void {
  const card = (ev.target as HTMLElement).closest(".area-card");
  if (!card) return;
  const area = card.getAttribute("data-area");
  selectedArea = selectedArea === area ? null : area;
  draw();
}

store.subscribe(draw);
window.setInterval(draw, 1000); // keep countdowns and staleness ticking

$("login-form").addEventListener("submit", (e) => void onLogin(e));
$("decl-form").addEventListener("submit", (e) => void onDeclare(e));
$("freq-form").addEventListener("submit", (e) => void onFrequency(e));
$("app").addEventListener("click", onAppClick);
