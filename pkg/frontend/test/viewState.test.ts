import { describe, expect, it } from "vitest";

import { StateBroadcast } from "../src/protocol.js";
import { applyBroadcast, initialViewState, toggleOverlay } from "../src/viewState.js";

function broadcast(overrides: Partial<StateBroadcast> = {}): StateBroadcast {
  return {
    revision: 1,
    recording: "green",
    pending: false,
    pending_at_limit: false,
    slice_number: 4,
    modality: "PET",
    mip_angle: 0,
    norm: [0, 10],
    ct_window: 1,
    n_lesions: 0,
    boxes: [],
    warnings: [],
    ...overrides,
  };
}

describe("view state", () => {
  it("mirrors the broadcast fields", () => {
    const state = applyBroadcast(initialViewState(), broadcast({ slice_number: 7 }));
    expect(state.sliceNumber).toBe(7);
    expect(state.recording).toBe("recording");
    expect(state.revision).toBe(1);
  });

  it("maps red recording status to paused", () => {
    const state = applyBroadcast(initialViewState(), broadcast({ recording: "red" }));
    expect(state.recording).toBe("paused");
  });

  it("latest revision wins; stale broadcasts are dropped", () => {
    let state = applyBroadcast(initialViewState(), broadcast({ revision: 5, slice_number: 9 }));
    state = applyBroadcast(state, broadcast({ revision: 3, slice_number: 1 }));
    expect(state.sliceNumber).toBe(9);
    expect(state.revision).toBe(5);
  });

  it("overlay toggle is local and deletes nothing", () => {
    const base = applyBroadcast(
      initialViewState(),
      broadcast({
        boxes: [
          {
            slice_number: 4,
            bbox: [1, 2, 3, 4],
            status: "accepted",
            color: "green",
            lesion_id: 1,
          },
        ],
      }),
    );
    const hidden = toggleOverlay(base);
    expect(hidden.overlayVisible).toBe(false);
    expect(hidden.boxes.length).toBe(1); // still known, just not drawn
    expect(toggleOverlay(hidden).overlayVisible).toBe(true);
  });
});
