import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { PointerGazeStreamer, TICK_MS } from "../src/gazeStream.js";
import { TrackerSample } from "../src/client.js";

interface SentBatch {
  ticks: TrackerSample[];
  gaps: number;
}

function makeStreamer(pointer: () => { x: number; y: number } | null) {
  const sent: SentBatch[] = [];
  const streamer = new PointerGazeStreamer({
    send: (ticks, gaps) => sent.push({ ticks, gaps }),
    pointer,
    monitor: [2560, 1440],
    windowRect: [768, 208, 1024, 1024],
  });
  return { streamer, sent };
}

describe("pointer gaze streamer", () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });
  afterEach(() => {
    vi.useRealTimers();
  });

  it("delivers 300 +/- 15 ticks over five seconds", () => {
    const { streamer, sent } = makeStreamer(() => ({ x: 1000, y: 700 }));
    streamer.start();
    vi.advanceTimersByTime(5000);
    streamer.stop();
    const total = sent.reduce((n, b) => n + b.ticks.length, 0);
    expect(total).toBeGreaterThanOrEqual(285);
    expect(total).toBeLessThanOrEqual(315);
    expect(streamer.stats.sampled).toBe(total); // no silent drops
    expect(streamer.stats.sent).toBe(total);
  });

  it("batches at most six ticks per message", () => {
    const { streamer, sent } = makeStreamer(() => ({ x: 1000, y: 700 }));
    streamer.start();
    vi.advanceTimersByTime(1000);
    streamer.stop();
    expect(sent.length).toBeGreaterThan(0);
    for (const batch of sent) {
      expect(batch.ticks.length).toBeLessThanOrEqual(6);
    }
  });

  it("marks out-of-window pointer ticks invalid but still sends them", () => {
    const { streamer, sent } = makeStreamer(() => ({ x: 10, y: 10 }));
    streamer.start();
    vi.advanceTimersByTime(200);
    streamer.stop();
    const ticks = sent.flatMap((b) => b.ticks);
    expect(ticks.length).toBeGreaterThan(0);
    for (const tick of ticks) {
      expect(tick.left_gaze_point_validity).toBe(0);
      expect(tick.left_gaze_point_on_display_area).toEqual([null, null]);
    }
  });

  it("synthesizes full tracker records for in-window ticks", () => {
    const { streamer, sent } = makeStreamer(() => ({ x: 1280, y: 720 }));
    streamer.start();
    vi.advanceTimersByTime(200);
    streamer.stop();
    const tick = sent[0].ticks[0] as Record<string, unknown>;
    expect(tick.left_gaze_point_validity).toBe(1);
    expect(tick.right_gaze_point_validity).toBe(1);
    expect(tick.left_gaze_point_on_display_area).toEqual([0.5, 0.5]);
    expect(tick.left_gaze_origin_in_user_coordinate_system).toEqual([0, 0, 650]);
    expect(typeof tick.system_time_stamp).toBe("number");
  });

  it("timestamps are strictly monotonic at the 60Hz cadence", () => {
    const { streamer, sent } = makeStreamer(() => ({ x: 1280, y: 720 }));
    streamer.start();
    vi.advanceTimersByTime(1000);
    streamer.stop();
    const stamps = sent.flatMap((b) => b.ticks).map((t) => t.system_time_stamp);
    for (let i = 1; i < stamps.length; i++) {
      expect(stamps[i]).toBeGreaterThan(stamps[i - 1]);
    }
    const spanUs = stamps[stamps.length - 1] - stamps[0];
    expect(spanUs / (stamps.length - 1)).toBeCloseTo(TICK_MS * 1000, -3);
  });

  it("declares gaps when the timer starves instead of fabricating samples", () => {
    const sent: SentBatch[] = [];
    let now = 0;
    const timers: Array<{ cb: () => void; at: number }> = [];
    const streamer = new PointerGazeStreamer({
      send: (ticks, gaps) => sent.push({ ticks, gaps }),
      pointer: () => ({ x: 1000, y: 700 }),
      monitor: [2560, 1440],
      windowRect: [768, 208, 1024, 1024],
      nowUs: () => now * 1000,
      setTimer: (cb, ms) => {
        timers.push({ cb, at: now + ms });
        return timers.length - 1;
      },
      clearTimer: () => undefined,
    });
    streamer.start();
    // run 5 healthy ticks
    for (let i = 0; i < 5; i++) {
      const timer = timers.shift()!;
      now = timer.at;
      timer.cb();
    }
    // starve: jump 10 intervals before firing the pending callback
    const stalled = timers.shift()!;
    now = stalled.at + 10 * TICK_MS;
    stalled.cb();
    streamer.stop();
    expect(streamer.stats.gaps).toBeGreaterThanOrEqual(9);
    const declared = sent.reduce((n, b) => n + b.gaps, 0);
    expect(declared).toBe(streamer.stats.gaps);
    expect(streamer.stats.sampled).toBe(6); // never backfilled
  });
});
