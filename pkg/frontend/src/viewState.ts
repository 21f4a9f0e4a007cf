/** Mirror of the latest server state revision plus local display toggles. */

import { BoxOverlay, StateBroadcast } from "./protocol.js";

export interface ViewState {
  revision: number;
  sliceNumber: number;
  modality: "PET" | "CT" | "fused" | "MIP";
  mipAngle: number;
  norm: [number, number];
  ctWindow: number;
  recording: "recording" | "paused";
  pendingConfirmation: boolean;
  pendingAtLimit: boolean;
  nLesions: number;
  boxes: BoxOverlay[];
  overlayVisible: boolean; // local-only Tab toggle; deletes nothing
  warnings: string[];
}

export function initialViewState(): ViewState {
  return {
    revision: -1,
    sliceNumber: 0,
    modality: "PET",
    mipAngle: 0,
    norm: [0, 10],
    ctWindow: 1,
    recording: "recording",
    pendingConfirmation: false,
    pendingAtLimit: false,
    nLesions: 0,
    boxes: [],
    overlayVisible: true,
    warnings: [],
  };
}

/** Latest-revision-wins: stale broadcasts never roll the view back. */
export function applyBroadcast(state: ViewState, payload: StateBroadcast): ViewState {
  if (payload.revision < state.revision) return state;
  return {
    ...state,
    revision: payload.revision,
    sliceNumber: payload.slice_number,
    modality: payload.modality,
    mipAngle: payload.mip_angle,
    norm: payload.norm,
    ctWindow: payload.ct_window,
    recording: payload.recording === "red" ? "paused" : "recording",
    pendingConfirmation: payload.pending,
    pendingAtLimit: payload.pending_at_limit,
    nLesions: payload.n_lesions,
    boxes: payload.boxes,
    warnings: payload.warnings,
  };
}

export function toggleOverlay(state: ViewState): ViewState {
  return { ...state, overlayVisible: !state.overlayVisible };
}
