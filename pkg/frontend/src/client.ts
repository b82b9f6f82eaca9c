// WebSocket client with reconnect. A dropped connection surfaces a status
// banner and reconnects with a fresh session (capped exponential backoff).

import { helloLine, parseMessage, ServerFrame } from "./protocol.js";

export type ConnectionStatus = "connecting" | "open" | "closed";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
}

export interface ClientOptions {
  onFrame: (frame: ServerFrame, receivedAtMs: number) => void;
  onStatus?: (status: ConnectionStatus) => void;
  makeSocket?: (url: string) => SocketLike;
  schedule?: (cb: () => void, ms: number) => unknown;
  now?: () => number;
  initialBackoffMs?: number;
  maxBackoffMs?: number;
}

export class SessionClient {
  private socket: SocketLike | null = null;
  private closed = false;
  private backoffMs: number;
  private readonly makeSocket: (url: string) => SocketLike;
  private readonly schedule: (cb: () => void, ms: number) => unknown;
  private readonly now: () => number;

  constructor(private readonly url: string, private readonly options: ClientOptions) {
    this.makeSocket =
      options.makeSocket ?? ((u) => new WebSocket(u) as unknown as SocketLike);
    this.schedule = options.schedule ?? ((cb, ms) => setTimeout(cb, ms));
    this.now = options.now ?? (() => performance.now());
    this.backoffMs = options.initialBackoffMs ?? 1000;
  }

  connect(): void {
    this.closed = false;
    this.open();
  }

  private open(): void {
    this.options.onStatus?.("connecting");
    const socket = this.makeSocket(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.backoffMs = this.options.initialBackoffMs ?? 1000;
      socket.send(helloLine());
      this.options.onStatus?.("open");
    };
    socket.onmessage = (ev) => {
      const at = this.now();
      for (const frame of parseMessage(String(ev.data))) {
        this.options.onFrame(frame, at);
      }
    };
    socket.onclose = () => {
      this.socket = null;
      this.options.onStatus?.("closed");
      if (!this.closed) {
        // fresh session on reconnect; server state is per-connection
        this.schedule(() => this.open(), this.backoffMs);
        this.backoffMs = Math.min(
          this.backoffMs * 2,
          this.options.maxBackoffMs ?? 8000,
        );
      }
    };
    socket.onerror = () => {
      // onclose handles the retry
    };
  }

  send(line: string): boolean {
    if (!this.socket) return false;
    try {
      this.socket.send(line);
      return true;
    } catch {
      return false;
    }
  }

  close(): void {
    this.closed = true;
    this.socket?.close();
  }
}
