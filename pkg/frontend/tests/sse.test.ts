import { describe, expect, it } from "vitest";
import { SseParser } from "../src/sse.js";

describe("SseParser", () => {
  it("parses a complete frame", () => {
    const p = new SseParser();
    const msgs = p.feed('id: 7\nevent: assessment\ndata: {"a":1}\n\n');
    expect(msgs).toEqual([
      { id: "7", event: "assessment", data: '{"a":1}' },
    ]);
  });

  it("reassembles frames split at arbitrary byte boundaries", () => {
    const frame = 'id: 12\nevent: alert\ndata: {"level":"EFR"}\n\n';
    for (let cut = 1; cut < frame.length - 1; cut++) {
      const p = new SseParser();
      const first = p.feed(frame.slice(0, cut));
      const rest = p.feed(frame.slice(cut));
      const all = [...first, ...rest];
      expect(all).toHaveLength(1);
      expect(all[0].id).toBe("12");
      expect(all[0].event).toBe("alert");
    }
  });

  it("ignores keep-alive comments", () => {
    const p = new SseParser();
    expect(p.feed(": keep-alive\n\n")).toEqual([]);
    // and a comment between frames does not corrupt them
    const msgs = p.feed("id: 1\ndata: x\n\n: ping\n\nid: 2\ndata: y\n\n");
    expect(msgs.map((m) => m.id)).toEqual(["1", "2"]);
  });

  it("joins multi-line data with newlines", () => {
    const p = new SseParser();
    const msgs = p.feed("data: line1\ndata: line2\n\n");
    expect(msgs[0].data).toBe("line1\nline2");
  });

  it("handles CRLF line endings", () => {
    const p = new SseParser();
    const msgs = p.feed("id: 3\r\nevent: alert\r\ndata: {}\r\n\r\n");
    expect(msgs).toEqual([{ id: "3", event: "alert", data: "{}" }]);
  });

  it("defaults the event name to message", () => {
    const p = new SseParser();
    expect(p.feed("data: hi\n\n")[0].event).toBe("message");
  });

  it("carries the last id into id-less frames", () => {
    const p = new SseParser();
    const msgs = p.feed("id: 5\ndata: a\n\ndata: b\n\n");
    expect(msgs.map((m) => m.id)).toEqual(["5", "5"]);
  });

  it("strips only one leading space from values", () => {
    const p = new SseParser();
    expect(p.feed("data:  padded\n\n")[0].data).toBe(" padded");
    const p2 = new SseParser();
    expect(p2.feed("data:tight\n\n")[0].data).toBe("tight");
  });
});
