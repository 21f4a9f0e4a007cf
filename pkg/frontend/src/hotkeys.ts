/**
 * Hotkey table: every row maps to exactly one outgoing message; Tab stays
 * local (display toggle only) and the mouse wheel becomes view.set slice
 * changes, which are reconstructed from display samples rather than the key
 * log.
 */

export type HotkeyAction =
  | { type: "key.press"; code: number }
  | { type: "view.set"; view: Record<string, unknown> }
  | { type: "local"; action: "toggle-overlay" }
  | null;

const CODE: Record<string, number> = {
  " ": 32, // pause/unpause recording
  q: 113, // quit
  y: 121, // confirm save
  n: 110, // discard recording
  Enter: 13,
  p: 112, // PET only
  c: 99, // CT only
  o: 111, // fused overlay
  m: 109, // MIP projection
  l: 108, // liver contrast (SUV max ~5-6)
  b: 98, // brain contrast (SUV max > 20)
  "+": 43, // more PET contrast
  "-": 45, // less PET contrast
  ">": 62, // next slice
  "<": 60, // previous slice
  s: 115, // select, certain
  d: 100, // select, uncertain
  a: 97, // accept candidate (propagates to adjacent slices)
  f: 102, // reject candidate on current slice
  F: 70, // Shift+f: reject lesion across adjacent slices
  r: 114, // grow candidate box
  e: 101, // shrink candidate box
  z: 122, // undo accepted lesion
  x: 120, // clear rejections on the slice (platform extension)
};
for (let digit = 1; digit <= 9; digit++) {
  CODE[String(digit)] = 48 + digit; // CT windowing presets
}

export interface KeyLike {
  key: string;
  shiftKey?: boolean;
}

export function dispatchHotkey(event: KeyLike): HotkeyAction {
  if (event.key === "Tab") {
    return { type: "local", action: "toggle-overlay" };
  }
  let key = event.key;
  if (key === "f" && event.shiftKey) key = "F";
  const code = CODE[key];
  if (code === undefined) return null; // unmapped keys are ignored
  return { type: "key.press", code };
}

/** Mouse wheel: slice scrolling, sent as a view change. */
export function dispatchWheel(deltaY: number, currentSlice: number): HotkeyAction {
  if (deltaY === 0) return null;
  const next = deltaY > 0 ? currentSlice + 1 : currentSlice - 1;
  return { type: "view.set", view: { slice_number: Math.max(0, next) } };
}

export const KEY_CODES = CODE;
