/**
 * Pointer-as-gaze source: samples the pointer on a drift-corrected 60Hz
 * clock, synthesizes full tracker records (so downstream code paths match
 * live-tracker sessions), batches up to 6 ticks per message and declares
 * timer gaps instead of fabricating samples.
 */

import { TrackerSample } from "./client.js";

export const TICK_MS = 1000 / 60;
export const MAX_BATCH = 6;

export interface StreamerOptions {
  send: (ticks: TrackerSample[], gaps: number) => void;
  pointer: () => { x: number; y: number } | null; // monitor px; null = unknown
  monitor: [number, number];
  windowRect: [number, number, number, number];
  originMm?: [number, number, number];
  nowUs?: () => number;
  setTimer?: (cb: () => void, ms: number) => unknown;
  clearTimer?: (id: unknown) => void;
}

export interface StreamerStats {
  sampled: number;
  sent: number;
  gaps: number;
}

function invalidEye(prefix: string, sample: Record<string, unknown>): void {
  sample[`${prefix}_gaze_point_on_display_area`] = [null, null];
  sample[`${prefix}_gaze_point_in_user_coordinate_system`] = [null, null, null];
  sample[`${prefix}_gaze_point_validity`] = 0;
  sample[`${prefix}_pupil_diameter`] = null;
  sample[`${prefix}_pupil_validity`] = 0;
  sample[`${prefix}_gaze_origin_in_user_coordinate_system`] = [null, null, null];
  sample[`${prefix}_gaze_origin_in_trackbox_coordinate_system`] = [null, null, null];
}

function validEye(
  prefix: string,
  sample: Record<string, unknown>,
  norm: [number, number],
  originMm: [number, number, number],
): void {
  sample[`${prefix}_gaze_point_on_display_area`] = [norm[0], norm[1]];
  sample[`${prefix}_gaze_point_in_user_coordinate_system`] = [null, null, null];
  sample[`${prefix}_gaze_point_validity`] = 1;
  sample[`${prefix}_pupil_diameter`] = 3.5;
  sample[`${prefix}_pupil_validity`] = 1;
  sample[`${prefix}_gaze_origin_in_user_coordinate_system`] = [...originMm];
  sample[`${prefix}_gaze_origin_in_trackbox_coordinate_system`] = [0.5, 0.5, 0.5];
}

export class PointerGazeStreamer {
  readonly stats: StreamerStats = { sampled: 0, sent: 0, gaps: 0 };
  private running = false;
  private timerId: unknown = null;
  private batch: TrackerSample[] = [];
  private pendingGaps = 0;
  private tickIndex = 0;
  private startMs = 0;
  private readonly nowUs: () => number;
  private readonly setTimer: (cb: () => void, ms: number) => unknown;
  private readonly clearTimer: (id: unknown) => void;

  constructor(private opts: StreamerOptions) {
    this.nowUs = opts.nowUs ?? (() => Date.now() * 1000);
    this.setTimer = opts.setTimer ?? ((cb, ms) => setTimeout(cb, ms));
    this.clearTimer = opts.clearTimer ?? ((id) => clearTimeout(id as any));
  }

  start(): void {
    if (this.running) return;
    this.running = true;
    this.tickIndex = 0;
    this.startMs = this.nowUs() / 1000;
    this.schedule();
  }

  stop(): void {
    this.running = false;
    if (this.timerId !== null) this.clearTimer(this.timerId);
    this.timerId = null;
    this.flush();
  }

  private schedule(): void {
    const target = this.startMs + (this.tickIndex + 1) * TICK_MS;
    const delay = Math.max(0, target - this.nowUs() / 1000);
    this.timerId = this.setTimer(() => this.onTimer(), delay);
  }

  private onTimer(): void {
    if (!this.running) return;
    const nowMs = this.nowUs() / 1000;
    // starving timers report a gap; the stream never backfills samples
    const behind = Math.floor((nowMs - this.startMs) / TICK_MS) - this.tickIndex - 1;
    if (behind > 0) {
      this.pendingGaps += behind;
      this.stats.gaps += behind;
      this.tickIndex += behind;
    }
    this.tickIndex += 1;
    this.sampleOnce();
    if (this.running) this.schedule();
  }

  private sampleOnce(): void {
    const ts = Math.round(this.nowUs());
    const sample: Record<string, unknown> = {
      device_time_stamp: ts,
      system_time_stamp: ts,
    };
    const position = this.opts.pointer();
    const inWindow =
      position !== null &&
      position.x >= this.opts.windowRect[0] &&
      position.x < this.opts.windowRect[0] + this.opts.windowRect[2] &&
      position.y >= this.opts.windowRect[1] &&
      position.y < this.opts.windowRect[1] + this.opts.windowRect[3];
    if (position !== null && inWindow) {
      const norm: [number, number] = [
        position.x / this.opts.monitor[0],
        position.y / this.opts.monitor[1],
      ];
      const origin = this.opts.originMm ?? [0, 0, 650];
      validEye("left", sample, norm, origin);
      validEye("right", sample, norm, origin);
    } else {
      invalidEye("left", sample);
      invalidEye("right", sample);
    }
    this.batch.push(sample as unknown as TrackerSample);
    this.stats.sampled += 1;
    if (this.batch.length >= MAX_BATCH) this.flush();
  }

  private flush(): void {
    if (this.batch.length === 0) return;
    const ticks = this.batch.splice(0);
    const gaps = this.pendingGaps;
    this.pendingGaps = 0;
    this.stats.sent += ticks.length;
    this.opts.send(ticks, gaps);
  }
}
