// Live session feed with reconnect/backoff. On every (re)connect the view
// is rebuilt by refetching the full event log, so a dropped socket never
// leaves stale or missing state; records broadcast while the refetch was
// in flight are deduplicated against the fetched tail.

import { Rec } from "./types.js";

export interface WebSocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: string }) => void) | null;
  readyState?: number;
}

export type SocketStatus = "connecting" | "open" | "closed";

export interface LiveSocketOptions {
  makeSocket: (url: string) => WebSocketLike;
  fetchEvents: () => Promise<Rec[]>;
  onRecord: (rec: Rec) => void;
  onReset: () => void;
  onStatus?: (status: SocketStatus) => void;
  onReply?: (reply: Record<string, unknown>) => void;
  scheduler?: (fn: () => void, delayMs: number) => unknown;
  baseBackoffMs?: number;
  maxBackoffMs?: number;
}

const sameRecord = (a: Rec, b: Rec) =>
  a.t_ms === b.t_ms && a.recv_seq === b.recv_seq && a.kind === b.kind;

export class LiveSocket {
  private socket: WebSocketLike | null = null;
  private attempts = 0;
  private stopped = false;
  private syncing = false;
  private pendingLive: Rec[] = [];
  readonly url: string;

  constructor(url: string, private readonly opts: LiveSocketOptions) {
    this.url = url;
  }

  get backoffMs(): number {
    const base = this.opts.baseBackoffMs ?? 1000;
    const cap = this.opts.maxBackoffMs ?? 30000;
    return Math.min(base * 2 ** Math.max(0, this.attempts - 1), cap);
  }

  connect(): void {
    if (this.stopped) return;
    this.status("connecting");
    const socket = this.opts.makeSocket(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.attempts = 0;
      this.status("open");
      void this.resync();
    };
    socket.onmessage = (ev) => {
      let obj: Record<string, unknown>;
      try {
        obj = JSON.parse(ev.data);
      } catch {
        return;
      }
      if ("kind" in obj && "t_ms" in obj) {
        this.handleRecord(obj as unknown as Rec);
      } else {
        this.opts.onReply?.(obj);
      }
    };
    socket.onclose = () => this.handleDrop();
    socket.onerror = () => {
      // the close handler owns reconnection; some sockets fire both
    };
  }

  private handleRecord(rec: Rec): void {
    if (this.syncing) {
      this.pendingLive.push(rec);
    } else {
      this.opts.onRecord(rec);
    }
  }

  private async resync(): Promise<void> {
    this.syncing = true;
    this.pendingLive = [];
    let history: Rec[];
    try {
      history = await this.opts.fetchEvents();
    } catch {
      this.syncing = false;
      this.socket?.close();
      return;
    }
    this.opts.onReset();
    for (const rec of history) this.opts.onRecord(rec);
    const tail = history.slice(-64);
    for (const rec of this.pendingLive) {
      if (!tail.some((h) => sameRecord(h, rec))) {
        this.opts.onRecord(rec);
      }
    }
    this.pendingLive = [];
    this.syncing = false;
  }

  private handleDrop(): void {
    this.socket = null;
    this.status("closed");
    if (this.stopped) return;
    this.attempts += 1;
    const schedule = this.opts.scheduler ?? ((fn, ms) => setTimeout(fn, ms));
    schedule(() => this.connect(), this.backoffMs);
  }

  send(obj: Record<string, unknown>): boolean {
    if (!this.socket) return false;
    this.socket.send(JSON.stringify(obj));
    return true;
  }

  close(): void {
    this.stopped = true;
    this.socket?.close();
    this.socket = null;
  }

  private status(status: SocketStatus): void {
    this.opts.onStatus?.(status);
  }
}
