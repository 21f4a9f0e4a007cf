/** Transport abstraction so the client runs over websocket or test fakes. */

import { Message, decodeMessage, encodeMessage } from "./protocol.js";

export interface Transport {
  send(msg: Message): void;
  onMessage(handler: (msg: Message) => void): void;
  onClose(handler: () => void): void;
  close(): void;
}

/** Browser websocket transport; the gateway accepts the standard upgrade. */
export class WebSocketTransport implements Transport {
  private handlers: Array<(msg: Message) => void> = [];
  private closeHandlers: Array<() => void> = [];
  private queue: string[] = [];
  private open = false;

  constructor(private ws: WebSocket) {
    ws.onopen = () => {
      this.open = true;
      for (const raw of this.queue.splice(0)) ws.send(raw);
    };
    ws.onmessage = (event) => {
      const msg = decodeMessage(String(event.data));
      for (const handler of this.handlers) handler(msg);
    };
    ws.onclose = () => {
      for (const handler of this.closeHandlers) handler();
    };
  }

  static connect(url: string): WebSocketTransport {
    return new WebSocketTransport(new WebSocket(url));
  }

  send(msg: Message): void {
    const raw = encodeMessage(msg);
    if (this.open) this.ws.send(raw);
    else this.queue.push(raw);
  }

  onMessage(handler: (msg: Message) => void): void {
    this.handlers.push(handler);
  }

  onClose(handler: () => void): void {
    this.closeHandlers.push(handler);
  }

  close(): void {
    this.ws.close();
  }
}
