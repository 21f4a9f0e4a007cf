/**
 * Gateway message protocol: JSON messages with kind/seq/payload, carried
 * either over a websocket (browser) or 4-byte length-prefixed frames (TCP).
 */

export interface Message {
  kind: string;
  seq: number;
  payload: Record<string, unknown>;
}

export const CLIENT_KINDS = [
  "session.open",
  "session.close",
  "gaze.batch",
  "key.press",
  "view.set",
  "image.get",
  "state.get",
  "ping",
] as const;

export type BoxStatus = "candidate" | "extrapolated" | "accepted" | "rejected";

export interface BoxOverlay {
  slice_number: number;
  bbox: [number, number, number, number];
  status: BoxStatus;
  color: string;
  lesion_id: number | null;
}

export interface StateBroadcast {
  revision: number;
  recording: "red" | "green";
  pending: boolean;
  pending_at_limit: boolean;
  slice_number: number;
  modality: "PET" | "CT" | "fused" | "MIP";
  mip_angle: number;
  norm: [number, number];
  ct_window: number;
  n_lesions: number;
  boxes: BoxOverlay[];
  warnings: string[];
}

export interface SliceImage {
  slice_number: number;
  modality: string;
  mip_angle: number;
  width: number;
  height: number;
  png_base64: string;
}

export function encodeMessage(msg: Message): string {
  return JSON.stringify(msg);
}

export function decodeMessage(raw: string): Message {
  const msg = JSON.parse(raw);
  if (typeof msg !== "object" || msg === null || !("kind" in msg) || !("seq" in msg)) {
    throw new Error("malformed message: missing kind/seq");
  }
  return msg as Message;
}

/** 4-byte big-endian length prefix framing, shared with the TCP transport. */
export function encodeFrame(json: string): Uint8Array {
  const body = new TextEncoder().encode(json);
  const out = new Uint8Array(4 + body.length);
  new DataView(out.buffer).setUint32(0, body.length, false);
  out.set(body, 4);
  return out;
}

/** Incremental decoder for a length-prefixed byte stream. */
export class FrameDecoder {
  private buffer = new Uint8Array(0);

  push(chunk: Uint8Array): string[] {
    const merged = new Uint8Array(this.buffer.length + chunk.length);
    merged.set(this.buffer, 0);
    merged.set(chunk, this.buffer.length);
    this.buffer = merged;

    const frames: string[] = [];
    for (;;) {
      if (this.buffer.length < 4) break;
      const view = new DataView(this.buffer.buffer, this.buffer.byteOffset);
      const length = view.getUint32(0, false);
      if (this.buffer.length < 4 + length) break;
      const body = this.buffer.slice(4, 4 + length);
      frames.push(new TextDecoder().decode(body));
      this.buffer = this.buffer.slice(4 + length);
    }
    return frames;
  }
}
