/** Payload shapes of the monitoring service's HTTP+JSON API. */

export type RiskLevelName = "NFR" | "LFR" | "HFR" | "EFR";

export const LEVEL_ORDER: RiskLevelName[] = ["NFR", "LFR", "HFR", "EFR"];

export const ENV_FIELDS = [
  "temperature_c",
  "humidity_pct",
  "wind_kmh",
  "rainfall_mm",
  "co2_ppm",
  "co_ppm",
  "o2_pct",
] as const;

export type EnvField = (typeof ENV_FIELDS)[number];

export const FIELD_UNITS: Record<EnvField, string> = {
  temperature_c: "°C",
  humidity_pct: "%",
  wind_kmh: "km/h",
  rainfall_mm: "mm",
  co2_ppm: "ppm",
  co_ppm: "ppm",
  o2_pct: "%",
};

export interface LoginResponse {
  token: string;
  role: string;
  expires_at: number; // unix seconds
}

/** One fuzzy risk assessment as it appears in API bodies and the stream. */
export interface Assessment {
  area_id: string;
  timestamp: number; // unix seconds
  percentage: number;
  level: RiskLevelName;
  window_used: number | "all";
  values: Record<string, number>;
  averages: Record<string, number>;
  activations: Record<string, Record<RiskLevelName, number>>;
  clamped: string[];
  declaration_active: boolean;
}

export interface AlertRecord {
  alert_id: string;
  area_id: string;
  level: RiskLevelName;
  percentage: number;
  created_at: number;
  triggered_by: string;
  state: "active" | "superseded" | "cleared";
  superseded_by: string | null;
}

export interface Declaration {
  area_id?: string;
  level: RiskLevelName;
  declared_at: number;
  expires_at: number;
}

export interface AreaDetail {
  area_id: string;
  level: RiskLevelName;
  percentage: number | null;
  last_assessment: Assessment | null;
  samples_today: number;
  expected_period_s: number;
  active_alert: AlertRecord | null;
  declaration: Declaration | null;
  recent: Assessment[];
}

export interface FrequencySetting {
  device_id: string;
  period_s: number;
  status: "pending" | "applied";
}

export interface ServiceStats {
  areas: number;
  accepted: number;
  rejections: number;
  rejection_log: { code: string; reason: string; device_id: string }[];
  alerts_active: number;
  log_seq: number;
}

/** One frame from GET /events after parsing. */
export interface StreamEvent {
  seq: number;
  kind: "assessment" | "alert" | "declaration" | "frequency-change";
  payload: Assessment | AlertRecord | Declaration | FrequencySetting;
}

export interface ApiErrorBody {
  code: string;
  message: string;
}
