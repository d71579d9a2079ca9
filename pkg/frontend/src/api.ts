/** Thin typed client over the service's REST surface.
 *
 * Every method maps to exactly one endpoint; no retries, no caching.
 * Mutating calls refuse to run without a held token so a logged-out
 * UI can never fire writes.
 */
import type {
  AlertRecord,
  ApiErrorBody,
  AreaDetail,
  Declaration,
  FrequencySetting,
  LoginResponse,
  RiskLevelName,
  ServiceStats,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  token: string | null = null;
  role: string | null = null;

  constructor(
    public baseUrl: string,
    private fetchImpl: FetchLike = (...a) => fetch(...a),
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const headers: Record<string, string> = {};
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    if (body !== undefined) headers["Content-Type"] = "application/json";
    const res = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!res.ok) {
      let parsed: ApiErrorBody = { code: "error", message: res.statusText };
      try {
        parsed = (await res.json()) as ApiErrorBody;
      } catch {
        /* non-JSON error body; keep the status text */
      }
      throw new ApiError(res.status, parsed.code, parsed.message);
    }
    return (await res.json()) as T;
  }

  private requireToken(): void {
    if (!this.token) throw new ApiError(401, "unauthorized", "not logged in");
  }

  async login(username: string, password: string): Promise<LoginResponse> {
    const out = await this.request<LoginResponse>("POST", "/auth/login", {
      username,
      password,
    });
    this.token = out.token;
    this.role = out.role;
    return out;
  }

  logout(): void {
    this.token = null;
    this.role = null;
  }

  areas(): Promise<AreaDetail[]> {
    return this.request("GET", "/areas");
  }

  area(areaId: string): Promise<AreaDetail> {
    return this.request("GET", `/areas/${encodeURIComponent(areaId)}`);
  }

  measurements(
    areaId: string,
    opts: { from?: number; to?: number; limit?: number } = {},
  ): Promise<Record<string, number | string>[]> {
    const q = new URLSearchParams();
    if (opts.from !== undefined) q.set("from", String(opts.from));
    if (opts.to !== undefined) q.set("to", String(opts.to));
    if (opts.limit !== undefined) q.set("limit", String(opts.limit));
    const suffix = q.toString() ? `?${q}` : "";
    return this.request(
      "GET",
      `/areas/${encodeURIComponent(areaId)}/measurements${suffix}`,
    );
  }

  alerts(opts: { state?: string; area?: string } = {}): Promise<AlertRecord[]> {
    const q = new URLSearchParams();
    if (opts.state) q.set("state", opts.state);
    if (opts.area) q.set("area", opts.area);
    const suffix = q.toString() ? `?${q}` : "";
    return this.request("GET", `/alerts${suffix}`);
  }

  stats(): Promise<ServiceStats> {
    return this.request("GET", "/stats");
  }

  async declare(
    areaId: string,
    level: RiskLevelName,
    ttlS: number,
  ): Promise<Declaration> {
    this.requireToken();
    return this.request(
      "POST",
      `/areas/${encodeURIComponent(areaId)}/declarations`,
      { level, ttl_s: ttlS },
    );
  }

  async setFrequency(
    deviceId: string,
    periodS: number,
  ): Promise<FrequencySetting> {
    this.requireToken();
    return this.request(
      "PUT",
      `/devices/${encodeURIComponent(deviceId)}/frequency`,
      { period_s: periodS },
    );
  }
}
