/**
 * Browser entry point: full-screen reader UI against the local gateway.
 *
 * Usage: serve this bundle next to a running gateway and open
 *   index.html?study=phantoms/p1&reader=obs1&ws=ws://127.0.0.1:8765
 */

import { WorkbenchClient } from "./client.js";
import { dispatchHotkey, dispatchWheel } from "./hotkeys.js";
import { PointerGazeStreamer } from "./gazeStream.js";
import { renderView } from "./render.js";
import { SliceImage } from "./protocol.js";
import { WebSocketTransport } from "./transport.js";
import { applyBroadcast, initialViewState, toggleOverlay } from "./viewState.js";

async function start(): Promise<void> {
  const params = new URLSearchParams(location.search);
  const wsUrl = params.get("ws") ?? "ws://127.0.0.1:8765";
  const study = params.get("study") ?? "phantoms/p1";
  const reader = params.get("reader") ?? "anonymous";

  const canvas = document.getElementById("workbench") as HTMLCanvasElement;
  canvas.width = window.innerWidth;
  canvas.height = window.innerHeight;
  const ctx = canvas.getContext("2d")!;

  const transport = WebSocketTransport.connect(wsUrl);
  const client = new WorkbenchClient(transport);

  let view = initialViewState();
  let image: { width: number; height: number; bitmap?: ImageBitmap } | null = null;
  let pointer: { x: number; y: number } | null = null;

  const monitor: [number, number] = [window.innerWidth, window.innerHeight];
  const windowDim = Math.min(monitor[0], monitor[1]) - 120;
  const ack = await client.openSession({
    study_path: study,
    reader_id: reader,
    monitor,
    window_dim: [windowDim, windowDim],
  });
  const windowRect = ack.window_rect as [number, number, number, number];
  const frame = { x: windowRect[0], y: windowRect[1], w: windowRect[2], h: windowRect[3] };
  const headerInfo = { age: params.get("age") ?? "?", sex: params.get("sex") ?? "?", diagnosis: params.get("dx") ?? "?" };

  const redraw = () => renderView(ctx, view, image, frame, headerInfo);

  client.onBroadcast((payload) => {
    const before = view.sliceNumber + view.modality + view.mipAngle + view.norm.join();
    view = applyBroadcast(view, payload);
    const after = view.sliceNumber + view.modality + view.mipAngle + view.norm.join();
    if (before !== after) void client.getImage(); // pull on view change
    redraw();
  });

  client.onSliceImage(async (slice: SliceImage) => {
    const raw = atob(slice.png_base64);
    const bytes = Uint8Array.from(raw, (ch) => ch.charCodeAt(0));
    const bitmap = await createImageBitmap(new Blob([bytes], { type: "image/png" }));
    image = { width: slice.width, height: slice.height, bitmap };
    redraw();
  });

  const streamer = new PointerGazeStreamer({
    send: (ticks, gaps) => void client.sendGazeBatch(ticks, gaps),
    pointer: () => pointer,
    monitor,
    windowRect,
  });
  streamer.start();

  canvas.addEventListener("pointermove", (event) => {
    pointer = { x: event.clientX, y: event.clientY };
  });
  canvas.addEventListener("pointerleave", () => {
    pointer = null;
  });
  canvas.addEventListener("wheel", (event) => {
    const action = dispatchWheel(event.deltaY, view.sliceNumber);
    if (action?.type === "view.set") void client.setView(action.view);
  });
  window.addEventListener("keydown", (event) => {
    const action = dispatchHotkey(event);
    if (!action) return;
    event.preventDefault();
    if (action.type === "local") {
      view = toggleOverlay(view);
      redraw();
    } else if (action.type === "key.press") {
      void client.keyPress(action.code, Math.round(Date.now() * 1000));
    } else if (action.type === "view.set") {
      void client.setView(action.view);
    }
  });
  window.addEventListener("beforeunload", () => {
    streamer.stop();
    transport.close();
  });

  await client.getImage();
  redraw();
}

void start();
