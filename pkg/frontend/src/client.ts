/**
 * Workbench client: sequences commands, correlates acks, fans out
 * server-initiated broadcasts. The UI never mutates annotation state
 * itself; every box it draws traces to a state.broadcast revision.
 */

import { Message, SliceImage, StateBroadcast } from "./protocol.js";
import { Transport } from "./transport.js";

interface PendingRequest {
  resolve: (payload: Record<string, unknown>) => void;
  reject: (err: Error) => void;
}

export interface TrackerSample {
  device_time_stamp: number;
  system_time_stamp: number;
  [field: string]: number | [number, number] | [number, number, number] | null | number[];
}

export class WorkbenchClient {
  private seq = 0;
  private pending = new Map<number, PendingRequest>();
  private broadcastHandlers: Array<(state: StateBroadcast) => void> = [];
  private imageHandlers: Array<(image: SliceImage) => void> = [];

  constructor(private transport: Transport) {
    transport.onMessage((msg) => this.dispatch(msg));
    transport.onClose(() => {
      for (const [, entry] of this.pending) entry.reject(new Error("connection closed"));
      this.pending.clear();
    });
  }

  private dispatch(msg: Message): void {
    if (msg.kind === "ack" || msg.kind === "error") {
      const entry = this.pending.get(msg.seq);
      if (!entry) return; // duplicate or unknown seq: exactly-once per request
      this.pending.delete(msg.seq);
      if (msg.kind === "ack") entry.resolve(msg.payload ?? {});
      else entry.reject(new Error(String((msg.payload as any)?.message ?? "server error")));
      return;
    }
    if (msg.kind === "state.broadcast") {
      for (const handler of this.broadcastHandlers) {
        handler(msg.payload as unknown as StateBroadcast);
      }
      return;
    }
    if (msg.kind === "slice.image") {
      for (const handler of this.imageHandlers) {
        handler(msg.payload as unknown as SliceImage);
      }
    }
  }

  request(kind: string, payload: Record<string, unknown> = {}): Promise<Record<string, unknown>> {
    const seq = ++this.seq;
    return new Promise((resolve, reject) => {
      this.pending.set(seq, { resolve, reject });
      this.transport.send({ kind, seq, payload });
    });
  }

  onBroadcast(handler: (state: StateBroadcast) => void): void {
    this.broadcastHandlers.push(handler);
  }

  onSliceImage(handler: (image: SliceImage) => void): void {
    this.imageHandlers.push(handler);
  }

  // -- convenience commands ---------------------------------------------------

  openSession(opts: {
    study_path: string;
    reader_id: string;
    reader_role?: string;
    monitor?: [number, number];
    window_dim?: [number, number];
  }): Promise<Record<string, unknown>> {
    return this.request("session.open", opts);
  }

  closeSession(save: boolean): Promise<Record<string, unknown>> {
    return this.request("session.close", { save });
  }

  sendGazeBatch(ticks: TrackerSample[], gaps = 0): Promise<Record<string, unknown>> {
    const payload: Record<string, unknown> = { ticks };
    if (gaps > 0) payload.gaps = gaps; // declared, never fabricated samples
    return this.request("gaze.batch", payload);
  }

  keyPress(code: number, timestampUs: number): Promise<Record<string, unknown>> {
    return this.request("key.press", { code, timestamp_us: timestampUs });
  }

  setView(view: Record<string, unknown>): Promise<Record<string, unknown>> {
    return this.request("view.set", view);
  }

  getImage(): Promise<Record<string, unknown>> {
    return this.request("image.get");
  }

  getState(): Promise<Record<string, unknown>> {
    return this.request("state.get");
  }
}
