// The socket client: feeds frames into a ViewState and sends commands.
// The WebSocket implementation is injected so the same class runs in the
// browser (global WebSocket) and under node tests (the `ws` package).

import { Command, encodeCommand, EventFrame, parseServerMessage } from "./protocol.js";
import { ViewState } from "./view.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  addEventListener(type: "open" | "close" | "error", fn: () => void): void;
  addEventListener(type: "message", fn: (ev: { data: unknown }) => void): void;
}

export type SocketFactory = (url: string) => SocketLike;

export class TabletopClient {
  readonly view: ViewState;
  private socket: SocketLike;
  private frameListeners: Array<(frame: EventFrame) => void> = [];
  private errorListeners: Array<(message: string) => void> = [];

  constructor(url: string, makeSocket: SocketFactory, view?: ViewState) {
    this.view = view ?? new ViewState();
    this.socket = makeSocket(url);
    this.socket.addEventListener("open", () => (this.view.status = "open"));
    this.socket.addEventListener("close", () => (this.view.status = "closed"));
    this.socket.addEventListener("error", () => (this.view.status = "error"));
    this.socket.addEventListener("message", (ev) => this.onMessage(String(ev.data)));
  }

  private onMessage(raw: string): void {
    const msg = parseServerMessage(raw);
    if (msg === null) {
      this.view.noteMalformed();
      return;
    }
    if ("error" in msg) {
      for (const fn of this.errorListeners) fn(msg.error);
      return;
    }
    if (this.view.ingest(msg)) {
      for (const fn of this.frameListeners) fn(msg);
    }
  }

  send(cmd: Command): void {
    this.socket.send(encodeCommand(cmd));
  }

  /** Start an optimistic drag: the robot follows the pointer locally until
   * the drag-end command round-trips and the next frame reconciles it. */
  beginDrag(robotId: number, x_mm: number, y_mm: number): void {
    this.view.pendingDrag = { robotId, x_mm, y_mm };
    this.view.selectedRobot = robotId;
  }

  updateDrag(x_mm: number, y_mm: number): void {
    if (this.view.pendingDrag) {
      this.view.pendingDrag = { ...this.view.pendingDrag, x_mm, y_mm };
    }
  }

  onFrame(fn: (frame: EventFrame) => void): void {
    this.frameListeners.push(fn);
  }

  onError(fn: (message: string) => void): void {
    this.errorListeners.push(fn);
  }

  /** Resolve on the next frame matching the predicate (default: any). */
  nextFrame(
    predicate: (frame: EventFrame) => boolean = () => true,
    timeoutMs = 10_000,
  ): Promise<EventFrame> {
    return new Promise((resolve, reject) => {
      const timer = setTimeout(
        () => reject(new Error(`no matching frame within ${timeoutMs} ms`)),
        timeoutMs,
      );
      const fn = (frame: EventFrame) => {
        if (predicate(frame)) {
          clearTimeout(timer);
          this.frameListeners = this.frameListeners.filter((f) => f !== fn);
          resolve(frame);
        }
      };
      this.frameListeners.push(fn);
    });
  }

  close(): void {
    this.socket.close();
  }
}
