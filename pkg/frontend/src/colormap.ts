/**
 * The documented fused-overlay constants: a 256-entry hot colormap and a
 * fixed 0.5 alpha above the PET window minimum. The gateway renders fused
 * slices server-side with exactly these constants; this module keeps the
 * contract testable and available for client-side experiments.
 */

export const FUSED_ALPHA = 0.5;

export function hotLut(): Uint8Array {
  const lut = new Uint8Array(256 * 3);
  for (let i = 0; i < 256; i++) {
    const x = i / 255;
    lut[i * 3] = Math.round(Math.min(1, Math.max(0, 3 * x)) * 255);
    lut[i * 3 + 1] = Math.round(Math.min(1, Math.max(0, 3 * x - 1)) * 255);
    lut[i * 3 + 2] = Math.round(Math.min(1, Math.max(0, 3 * x - 2)) * 255);
  }
  return lut;
}
