import { describe, expect, it } from "vitest";

import { FrameDecoder, decodeMessage, encodeFrame, encodeMessage } from "../src/protocol.js";

describe("frame codec", () => {
  it("round-trips a message through length-delimited framing", () => {
    const msg = { kind: "ping", seq: 1, payload: { a: [1, 2.5, null] } };
    const frame = encodeFrame(encodeMessage(msg));
    const decoder = new FrameDecoder();
    const out = decoder.push(frame);
    expect(out.length).toBe(1);
    expect(decodeMessage(out[0])).toEqual(msg);
  });

  it("handles frames arriving in arbitrary chunks", () => {
    const msgs = [
      { kind: "ping", seq: 1, payload: {} },
      { kind: "state.get", seq: 2, payload: { x: "y" } },
    ];
    const bytes = new Uint8Array(
      msgs.flatMap((m) => Array.from(encodeFrame(encodeMessage(m)))),
    );
    const decoder = new FrameDecoder();
    const out: string[] = [];
    for (let i = 0; i < bytes.length; i += 3) {
      out.push(...decoder.push(bytes.slice(i, i + 3)));
    }
    expect(out.map((raw) => decodeMessage(raw))).toEqual(msgs);
  });

  it("rejects frames without kind/seq", () => {
    expect(() => decodeMessage("{}")).toThrow();
    expect(() => decodeMessage("[1,2]")).toThrow();
  });
});
