/** Server-Sent Events over fetch.
 *
 * The browser's EventSource cannot send an Authorization header, so
 * the stream is read through fetch + ReadableStream instead; this
 * also makes the client runnable under Node for tests.  Reconnects
 * resume from the last seen event id (the service's log sequence
 * number), and repeated failures flip a status flag the UI uses to
 * fall back to polling.
 */

export interface SseMessage {
  id: string | null;
  event: string;
  data: string;
}

/** Incremental parser: feed arbitrary chunks, get complete messages. */
export class SseParser {
  private buffer = "";
  private id: string | null = null;
  private event = "";
  private data: string[] = [];

  feed(chunk: string): SseMessage[] {
    this.buffer += chunk;
    const out: SseMessage[] = [];
    for (;;) {
      const nl = this.buffer.indexOf("\n");
      if (nl < 0) break;
      let line = this.buffer.slice(0, nl);
      this.buffer = this.buffer.slice(nl + 1);
      if (line.endsWith("\r")) line = line.slice(0, -1);
      const msg = this.line(line);
      if (msg) out.push(msg);
    }
    return out;
  }

  private line(line: string): SseMessage | null {
    if (line === "") {
      // blank line dispatches the accumulated message; an empty data
      // buffer (e.g. after a keep-alive comment) dispatches nothing
      if (this.data.length === 0) {
        this.event = "";
        return null;
      }
      const msg: SseMessage = {
        id: this.id,
        event: this.event || "message",
        data: this.data.join("\n"),
      };
      this.event = "";
      this.data = [];
      // per the SSE spec the last id persists across messages
      return msg;
    }
    if (line.startsWith(":")) return null; // comment / keep-alive
    const colon = line.indexOf(":");
    const field = colon < 0 ? line : line.slice(0, colon);
    let value = colon < 0 ? "" : line.slice(colon + 1);
    if (value.startsWith(" ")) value = value.slice(1);
    if (field === "id") this.id = value;
    else if (field === "event") this.event = value;
    else if (field === "data") this.data.push(value);
    // unknown fields (e.g. retry) are ignored
    return null;
  }
}

export type StreamStatus = "connecting" | "live" | "down";

class AuthRejected extends Error {
  constructor() {
    super("token rejected");
  }
}

export interface EventStreamOptions {
  /** Called for every dispatched SSE message. */
  onMessage: (msg: SseMessage) => void;
  onStatus?: (status: StreamStatus) => void;
  /** Rejected credentials; the stream stops instead of retrying. */
  onAuthError?: () => void;
  /** Resume position; overridden by the ids of received events. */
  lastId?: number;
  /** Delay before reconnecting after a drop (ms). */
  retryMs?: number;
  fetchImpl?: (url: string, init?: RequestInit) => Promise<Response>;
}

/** One resumable connection to GET /events. */
export class EventStream {
  lastId: number;
  private stopped = false;
  private controller: AbortController | null = null;
  private readonly retryMs: number;
  private readonly fetchImpl: (
    url: string,
    init?: RequestInit,
  ) => Promise<Response>;

  constructor(
    private baseUrl: string,
    private token: () => string | null,
    private opts: EventStreamOptions,
  ) {
    this.lastId = opts.lastId ?? 0;
    this.retryMs = opts.retryMs ?? 2000;
    this.fetchImpl = opts.fetchImpl ?? ((...a) => fetch(...a));
  }

  start(): void {
    this.stopped = false;
    void this.loop();
  }

  stop(): void {
    this.stopped = true;
    this.controller?.abort();
  }

  private status(s: StreamStatus): void {
    this.opts.onStatus?.(s);
  }

  private async loop(): Promise<void> {
    while (!this.stopped) {
      this.status("connecting");
      try {
        await this.connectOnce();
      } catch (e) {
        if (e instanceof AuthRejected) {
          // a dead token never comes back; hand control to the UI
          this.stopped = true;
          this.status("down");
          this.opts.onAuthError?.();
          return;
        }
      }
      if (this.stopped) break;
      this.status("down");
      await new Promise((r) => setTimeout(r, this.retryMs));
    }
  }

  private async connectOnce(): Promise<void> {
    const token = this.token();
    if (!token) throw new AuthRejected();
    this.controller = new AbortController();
    const url = `${this.baseUrl.replace(/\/+$/, "")}/events?since=${this.lastId}`;
    const res = await this.fetchImpl(url, {
      headers: {
        Authorization: `Bearer ${token}`,
        Accept: "text/event-stream",
      },
      signal: this.controller.signal,
    });
    if (res.status === 401) throw new AuthRejected();
    if (!res.ok || !res.body) {
      throw new Error(`stream rejected: ${res.status}`);
    }
    this.status("live");
    const parser = new SseParser();
    const reader = res.body.getReader();
    const decoder = new TextDecoder();
    for (;;) {
      const { done, value } = await reader.read();
      if (done) break;
      for (const msg of parser.feed(decoder.decode(value, { stream: true }))) {
        if (msg.id !== null) {
          const seq = Number(msg.id);
          if (Number.isFinite(seq)) this.lastId = seq;
        }
        this.opts.onMessage(msg);
      }
    }
  }
}
