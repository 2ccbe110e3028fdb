/**
 * Connection: one WebSocket, outbound seq assignment, schema validation on
 * both directions. Runs in the browser (native WebSocket) and under node
 * tests (caller provides a WebSocket-compatible constructor).
 */
import {
  parseInbound,
  validateEnvelope,
  type InboundMessage,
  type OutboundMessage,
} from "./protocol.js";

type SocketLike = {
  send(data: string): void;
  close(): void;
  addEventListener(type: string, cb: (ev: any) => void): void;
};

export class Connection {
  private seq = 0;
  private socket: SocketLike;
  onMessage: (msg: InboundMessage) => void = () => {};
  onClose: () => void = () => {};
  onOpen: () => void = () => {};

  constructor(socket: SocketLike) {
    this.socket = socket;
    socket.addEventListener("open", () => this.onOpen());
    socket.addEventListener("close", () => this.onClose());
    socket.addEventListener("message", (ev: MessageEvent) => {
      this.onMessage(parseInbound(String(ev.data)));
    });
  }

  send(msg: OutboundMessage): void {
    this.seq += 1;
    const env = { type: msg.type, seq: this.seq, payload: msg.payload };
    validateEnvelope(env);
    this.socket.send(JSON.stringify(env));
  }

  close(): void {
    this.socket.close();
  }
}
