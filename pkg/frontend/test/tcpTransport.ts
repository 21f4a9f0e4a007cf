/** Node-only transport: length-delimited frames over TCP, for tests. */

import * as net from "node:net";

import { FrameDecoder, Message, decodeMessage, encodeFrame, encodeMessage } from "../src/protocol.js";
import { Transport } from "../src/transport.js";

export class TcpTransport implements Transport {
  private handlers: Array<(msg: Message) => void> = [];
  private closeHandlers: Array<() => void> = [];
  private decoder = new FrameDecoder();

  private constructor(private socket: net.Socket) {
    socket.on("data", (chunk: Buffer) => {
      for (const raw of this.decoder.push(new Uint8Array(chunk))) {
        const msg = decodeMessage(raw);
        for (const handler of this.handlers) handler(msg);
      }
    });
    socket.on("close", () => {
      for (const handler of this.closeHandlers) handler();
    });
  }

  static connect(host: string, port: number): Promise<TcpTransport> {
    return new Promise((resolve, reject) => {
      const socket = net.createConnection({ host, port }, () => {
        socket.off("error", reject);
        resolve(new TcpTransport(socket));
      });
      socket.once("error", reject);
    });
  }

  send(msg: Message): void {
    this.socket.write(encodeFrame(encodeMessage(msg)));
  }

  onMessage(handler: (msg: Message) => void): void {
    this.handlers.push(handler);
  }

  onClose(handler: () => void): void {
    this.closeHandlers.push(handler);
  }

  close(): void {
    this.socket.end();
  }
}
