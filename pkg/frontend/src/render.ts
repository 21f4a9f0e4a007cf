/**
 * Canvas rendering: the slice letterboxed in the annotation window, box
 * overlays color-coded by protocol state, patient header, hotkey legend and
 * the recording-status panel. Drawing goes through a minimal 2D-context
 * interface so tests can record operations.
 */

import { BoxOverlay } from "./protocol.js";
import { ViewState } from "./viewState.js";

export interface Context2D {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
  drawImage?(image: unknown, x: number, y: number, w: number, h: number): void;
}

export interface Rect {
  x: number;
  y: number;
  w: number;
  h: number;
}

export const IMAGE_SPACE = 512;
export const PENDING_BORDER_COLOR = "yellow";
export const RECORDING_COLORS = { recording: "green", paused: "red" };

export const HOTKEY_LEGEND: Array<[string, string]> = [
  ["s / d", "select lesion (certain / uncertain)"],
  ["a", "accept candidate"],
  ["f", "reject candidate"],
  ["r / e", "grow / shrink box"],
  ["p c o m", "PET / CT / fused / MIP"],
  ["l b 1-9", "contrast presets"],
  ["+ - < >", "contrast / slice"],
  ["z", "undo lesion"],
  ["Tab", "toggle overlay"],
  ["space", "pause recording"],
  ["q y n", "quit / save / discard"],
];

/** Fit an image into a window preserving aspect, centered. */
export function computeLetterbox(
  imgW: number,
  imgH: number,
  winX: number,
  winY: number,
  winW: number,
  winH: number,
): Rect {
  const scale = Math.min(winW / imgW, winH / imgH);
  const w = imgW * scale;
  const h = imgH * scale;
  return { x: winX + (winW - w) / 2, y: winY + (winH - h) / 2, w, h };
}

export function boxToScreen(box: BoxOverlay, frame: Rect): Rect {
  const [x, y, w, h] = box.bbox;
  const sx = frame.w / IMAGE_SPACE;
  const sy = frame.h / IMAGE_SPACE;
  return { x: frame.x + x * sx, y: frame.y + y * sy, w: w * sx, h: h * sy };
}

export interface PatientHeader {
  age: string;
  sex: string;
  diagnosis: string;
}

export function renderView(
  ctx: Context2D,
  state: ViewState,
  image: { width: number; height: number; bitmap?: unknown } | null,
  window: Rect,
  header: PatientHeader,
): void {
  // annotation window background + frame (yellow while awaiting accept/reject)
  ctx.fillStyle = "black";
  ctx.fillRect(window.x, window.y, window.w, window.h);
  ctx.strokeStyle = state.pendingConfirmation ? PENDING_BORDER_COLOR : "gray";
  ctx.lineWidth = state.pendingConfirmation ? 4 : 1;
  ctx.strokeRect(window.x, window.y, window.w, window.h);

  let frame = window;
  if (image) {
    frame = computeLetterbox(image.width, image.height, window.x, window.y, window.w, window.h);
    if (ctx.drawImage && image.bitmap) {
      ctx.drawImage(image.bitmap, frame.x, frame.y, frame.w, frame.h);
    }
  }

  if (state.overlayVisible) {
    for (const box of state.boxes) {
      const rect = boxToScreen(box, frame);
      ctx.strokeStyle = box.color;
      ctx.lineWidth = 2;
      ctx.strokeRect(rect.x, rect.y, rect.w, rect.h);
    }
  }

  // recording status panel (left)
  ctx.fillStyle = RECORDING_COLORS[state.recording];
  ctx.fillRect(8, 8, 140, 36);
  ctx.fillStyle = "black";
  ctx.font = "14px sans-serif";
  ctx.fillText(state.recording === "recording" ? "RECORDING" : "PAUSED", 16, 31);

  // patient header (top)
  ctx.fillStyle = "white";
  ctx.fillText(
    `age ${header.age}  sex ${header.sex}  dx ${header.diagnosis}`,
    window.x,
    Math.max(14, window.y - 8),
  );
  ctx.fillText(
    `slice ${state.sliceNumber}  ${state.modality}  norm [${state.norm[0].toFixed(1)}, ` +
      `${state.norm[1].toFixed(1)}]  lesions ${state.nLesions}`,
    window.x,
    window.y + window.h + 18,
  );

  // hotkey legend (right)
  let y = window.y + 16;
  for (const [keys, what] of HOTKEY_LEGEND) {
    ctx.fillText(`${keys}  ${what}`, window.x + window.w + 16, y);
    y += 18;
  }
}
