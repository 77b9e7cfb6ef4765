/**
 * Session logic between the view and a line transport.
 *
 * Rules: reconnect with exponential backoff on drop; at most one message
 * in flight awaiting its reply; pose updates are coalesced latest-wins and
 * throttled to at most 20 messages per second; a busy refusal from the
 * backend surfaces as a status, not an exception. All outbound traffic is
 * encoded through the schema validator, so the UI cannot emit an invalid
 * message.
 */

import {
  ClientMessage,
  FrameMessage,
  HelloMessage,
  RecordedMessage,
  encodeClientMessage,
  parseServerLine,
} from "./schema.js";
import type { Transport, TransportFactory } from "./transport.js";

export type SessionStatus = "connecting" | "connected" | "busy" | "reconnecting" | "stopped";

export interface SessionCallbacks {
  onStatus?(status: SessionStatus): void;
  onHello?(hello: HelloMessage): void;
  onFrame?(frame: FrameMessage, latencyMs: number): void;
  onRecorded?(message: RecordedMessage): void;
  onErrorReply?(reason: string): void;
}

export interface SessionOptions {
  /** Minimum milliseconds between outbound pose messages (default 50 = 20/s). */
  minPoseIntervalMs?: number;
  /** First reconnect delay; doubles per attempt up to maxBackoffMs. */
  backoffMs?: number;
  maxBackoffMs?: number;
  now?(): number;
}

const DEFAULTS = { minPoseIntervalMs: 50, backoffMs: 300, maxBackoffMs: 5000 };

interface PendingSend {
  kind: "pose" | "preset" | "record";
  sentAt: number;
}

export class Session {
  private transport: Transport | null = null;
  private status: SessionStatus = "stopped";
  private pending: PendingSend[] = [];
  private queuedPose: ClientMessage | null = null;
  private queuedOther: ClientMessage[] = [];
  private lastPoseSentAt = -Infinity;
  private poseTimer: ReturnType<typeof setTimeout> | null = null;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;
  private backoff: number;
  private stopped = true;
  private readonly opts: Required<Pick<SessionOptions, "minPoseIntervalMs" | "backoffMs" | "maxBackoffMs">>;
  private readonly now: () => number;

  hello: HelloMessage | null = null;

  constructor(
    private readonly factory: TransportFactory,
    private readonly callbacks: SessionCallbacks = {},
    options: SessionOptions = {},
  ) {
    this.opts = { ...DEFAULTS, ...options };
    this.backoff = this.opts.backoffMs;
    this.now = options.now ?? Date.now;
  }

  currentStatus(): SessionStatus {
    return this.status;
  }

  async start(): Promise<void> {
    this.stopped = false;
    await this.connect();
  }

  stop(): void {
    this.stopped = true;
    if (this.poseTimer) clearTimeout(this.poseTimer);
    if (this.reconnectTimer) clearTimeout(this.reconnectTimer);
    this.poseTimer = null;
    this.reconnectTimer = null;
    this.transport?.close();
    this.transport = null;
    this.setStatus("stopped");
  }

  /** Queue the latest pose; earlier unsent poses are discarded. */
  updatePose(angles: number[], wrist: [number, number, number]): void {
    this.queuedPose = { type: "pose", angles: angles.slice(), wrist: wrist.slice() as number[] };
    this.tryFlush();
  }

  applyPreset(gesture: number): void {
    this.queuedOther.push({ type: "preset", gesture });
    this.tryFlush();
  }

  record(label: number, count: number): void {
    this.queuedOther.push({ type: "record", label, count });
    this.tryFlush();
  }

  // ---- internals ----

  private setStatus(status: SessionStatus): void {
    if (this.status !== status) {
      this.status = status;
      this.callbacks.onStatus?.(status);
    }
  }

  private async connect(): Promise<void> {
    this.setStatus(this.hello ? "reconnecting" : "connecting");
    this.pending = [];
    try {
      this.transport = await this.factory({
        onLine: (line) => this.handleLine(line),
        onClose: () => this.handleClose(),
      });
    } catch {
      this.scheduleReconnect();
    }
  }

  private handleClose(): void {
    this.transport = null;
    this.pending = [];
    if (!this.stopped) this.scheduleReconnect();
  }

  private scheduleReconnect(): void {
    if (this.stopped) return;
    if (this.status !== "busy") this.setStatus("reconnecting");
    const delay = this.backoff;
    this.backoff = Math.min(this.backoff * 2, this.opts.maxBackoffMs);
    this.reconnectTimer = setTimeout(() => void this.connect(), delay);
  }

  private handleLine(line: string): void {
    const message = parseServerLine(line);
    if (message === null) return; // malformed replies are ignored with a diagnostic
    if (message.type === "hello") {
      this.hello = message;
      this.backoff = this.opts.backoffMs;
      this.setStatus("connected");
      this.tryFlush();
      return;
    }
    if (message.type === "error" && this.pending.length === 0) {
      // unsolicited error before hello = session refused (busy)
      if (message.reason.startsWith("busy")) {
        this.setStatus("busy");
      }
      this.callbacks.onErrorReply?.(message.reason);
      return;
    }
    const pending = this.pending.shift();
    const latency = pending ? this.now() - pending.sentAt : 0;
    if (message.type === "frame") {
      this.callbacks.onFrame?.(message, latency);
    } else if (message.type === "recorded") {
      this.callbacks.onRecorded?.(message);
    } else {
      this.callbacks.onErrorReply?.(message.reason);
    }
    this.tryFlush();
  }

  private tryFlush(): void {
    if (!this.transport || this.status !== "connected") return;
    if (this.pending.length > 0) return; // one in-flight message at a time

    const other = this.queuedOther.shift();
    if (other) {
      this.sendNow(other);
      return;
    }
    if (!this.queuedPose) return;

    const since = this.now() - this.lastPoseSentAt;
    const wait = this.opts.minPoseIntervalMs - since;
    if (wait > 0) {
      if (!this.poseTimer) {
        this.poseTimer = setTimeout(() => {
          this.poseTimer = null;
          this.tryFlush();
        }, wait);
      }
      return;
    }
    const pose = this.queuedPose;
    this.queuedPose = null;
    this.lastPoseSentAt = this.now();
    this.sendNow(pose);
  }

  private sendNow(message: ClientMessage): void {
    if (!this.transport) return;
    this.pending.push({ kind: message.type, sentAt: this.now() });
    this.transport.send(encodeClientMessage(message));
  }
}
