/**
 * SessionClient: the one stateful piece of the console.
 *
 * It owns the socket, a scene mirror, the console log and the cue overlays.
 * Every server frame lands in one ordered queue and is applied in arrival
 * order; rendering reads the resulting state and never blocks input. The
 * client holds no scene truth of its own: reconnecting (or noticing a
 * revision gap) replaces the mirror with a fresh snapshot from the service.
 *
 * The socket is injected as a factory so tests can drive the client with a
 * scripted fake and node can use the ws package; the browser passes a thin
 * adapter over the native WebSocket.
 */

import { OrbitCamera } from "./camera.js";
import type { Hit } from "./raycast.js";
import { SceneMirror } from "./mirror.js";
import { DEFAULT_WPM, wordTimings } from "./timestamps.js";
import type { ClientFrame, MetricsReport, ServerFrame } from "./protocol.js";
import { parseServerFrame } from "./protocol.js";
import { Vec3, dot, mul, sub, triple } from "./vec.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export type ConnectionStatus = "idle" | "connecting" | "live" | "closed";

export interface ConsoleEntry {
  kind: "message" | "warning" | "error" | "status";
  text: string;
  t_ms: number;
}

export interface PointOverlay {
  cueId: string | null;
  position: Vec3;
  normal: Vec3;
  confirmed: boolean;
}

export interface LineOverlay {
  cueId: string | null;
  start: Vec3;
  end: Vec3;
  project: Vec3;
  confirmed: boolean;
}

export interface SessionInfo {
  mode: string;
  task: string;
  revision: number;
  metrics: MetricsReport;
}

export interface ClientOptions {
  clock?: () => number;
  reconnectDelayMs?: number;
}

export class SessionClient {
  readonly mirror = new SceneMirror();
  readonly consoleLog: ConsoleEntry[] = [];
  points: PointOverlay[] = [];
  lines: LineOverlay[] = [];
  selection: string[] = [];
  metrics: MetricsReport | null = null;
  info: SessionInfo | null = null;
  status: ConnectionStatus = "idle";

  /** Fired after every applied frame; the render loop hangs off this. */
  onchange: () => void = () => {};

  private ws: SocketLike | null = null;
  private epoch = 0;
  private wantLive = false;
  private resyncInFlight = false;
  private queue: ServerFrame[] = [];
  private draining = false;
  private pendingPoints: PointOverlay[] = [];
  private pendingLines: LineOverlay[] = [];
  private poseTimer: ReturnType<typeof setInterval> | null = null;
  private readonly clock: () => number;
  private readonly reconnectDelayMs: number;

  constructor(
    private readonly url: string,
    private readonly factory: SocketFactory,
    opts: ClientOptions = {},
  ) {
    this.clock = opts.clock ?? (() => Date.now());
    this.reconnectDelayMs = opts.reconnectDelayMs ?? 250;
  }

  // ── connection ──────────────────────────────────────────────────────────

  connect(): void {
    this.wantLive = true;
    this.open();
  }

  close(): void {
    this.wantLive = false;
    this.stopPoseTicker();
    this.ws?.close();
    this.ws = null;
    this.status = "closed";
    this.onchange();
  }

  /** Drop the socket but stay subscribed; reconnect kicks in immediately. */
  reconnectNow(): void {
    this.ws?.close();
  }

  private open(): void {
    const epoch = ++this.epoch;
    this.status = "connecting";
    this.onchange();
    const ws = this.factory(this.url);
    this.ws = ws;
    ws.onopen = () => {
      if (epoch !== this.epoch) return;
      ws.send(JSON.stringify({ type: "hello" }));
    };
    ws.onmessage = (ev) => {
      if (epoch !== this.epoch) return;
      const frame = parseServerFrame(ev.data);
      if (frame) this.enqueue(frame);
    };
    ws.onclose = () => {
      if (epoch !== this.epoch) return;
      this.ws = null;
      if (this.wantLive) {
        this.status = "connecting";
        this.logStatus("connection lost, reconnecting");
        setTimeout(() => {
          if (this.wantLive && epoch === this.epoch) this.open();
        }, this.reconnectDelayMs);
      } else {
        this.status = "closed";
      }
      this.onchange();
    };
  }

  // ── frame queue ─────────────────────────────────────────────────────────

  private enqueue(frame: ServerFrame): void {
    this.queue.push(frame);
    if (this.draining) return;
    this.draining = true;
    try {
      while (this.queue.length > 0) this.applyFrame(this.queue.shift()!);
    } finally {
      this.draining = false;
    }
  }

  private applyFrame(frame: ServerFrame): void {
    switch (frame.type) {
      case "hello": {
        this.info = frame.session;
        this.metrics = frame.session.metrics;
        this.mirror.loadSnapshot(frame.scene, frame.session.revision);
        this.resyncInFlight = false;
        const fresh = this.status !== "live";
        this.status = "live";
        this.logStatus(
          (fresh ? "connected" : "resynced") + ` at revision ${frame.session.revision}`,
        );
        break;
      }
      case "event.revision":
        if (!this.mirror.applyRevision(frame.revision, frame.objects)) this.requestResync();
        break;
      case "event.message":
        this.log("message", frame.content, frame.t_ms);
        break;
      case "event.warning": {
        const line = frame.line ? ` [${frame.line}]` : "";
        const detail = frame.detail ? `: ${frame.detail}` : "";
        this.log("warning", `${frame.reason}${detail}${line}`, frame.t_ms);
        break;
      }
      case "event.cue":
        this.confirmCue(frame.cue_id, frame.kind);
        break;
      case "event.metrics":
        this.metrics = frame.metrics;
        break;
      case "event.stream_end": {
        const err = frame.error ? `, error ${frame.error}` : "";
        this.log("status", `applied ${frame.applied}, skipped ${frame.skipped}${err}`, frame.t_ms);
        break;
      }
      case "event.error":
        this.log("error", frame.detail, this.clock());
        break;
    }
    this.onchange();
  }

  private confirmCue(cueId: string, kind: "point" | "line"): void {
    const pending = kind === "point" ? this.pendingPoints : this.pendingLines;
    const overlay = pending.shift();
    if (overlay) {
      overlay.cueId = cueId;
      overlay.confirmed = true;
    }
  }

  private log(kind: ConsoleEntry["kind"], text: string, tMs: number): void {
    this.consoleLog.push({ kind, text, t_ms: tMs });
  }

  private logStatus(text: string): void {
    this.log("status", text, this.clock());
  }

  private requestResync(): void {
    if (this.resyncInFlight) return;
    this.resyncInFlight = true;
    this.send({ type: "session.info" });
  }

  private send(frame: ClientFrame): boolean {
    if (!this.ws || this.status !== "live") return false;
    this.ws.send(JSON.stringify(frame));
    return true;
  }

  // ── input API ───────────────────────────────────────────────────────────

  /** Stream one typed utterance as word frames. Returns the word count. */
  sendWords(text: string, wpm: number = DEFAULT_WPM, t0: number = this.clock()): number {
    const timings = wordTimings(text, t0, wpm);
    for (const w of timings) {
      this.send({ type: "word", t_ms: w.t_ms, text: w.text, start_ms: w.start_ms, end_ms: w.end_ms });
    }
    return timings.length;
  }

  finalize(displayText?: string): void {
    this.send(
      displayText === undefined
        ? { type: "finalize", t_ms: this.clock() }
        : { type: "finalize", t_ms: this.clock(), display_text: displayText },
    );
  }

  /**
   * Words plus finalize, the Enter-key path. An empty or whitespace-only
   * utterance sends nothing at all.
   */
  sendUtterance(text: string, wpm: number = DEFAULT_WPM): boolean {
    if (this.status !== "live" || text.trim() === "") return false;
    this.sendWords(text, wpm);
    this.finalize(text);
    return true;
  }

  /** Point cue from a pick; the overlay confirms when the service echoes. */
  point(hit: Hit, tMs: number = this.clock()): void {
    const overlay: PointOverlay = {
      cueId: null,
      position: hit.position,
      normal: hit.normal,
      confirmed: false,
    };
    const sent = this.send({
      type: "point",
      t_ms: tMs,
      target: hit.id,
      position: triple(hit.position),
      normal: triple(hit.normal),
    });
    if (!sent) return;
    this.points.push(overlay);
    this.pendingPoints.push(overlay);
  }

  /**
   * Line cue from a drag. The end is sent as-is and additionally projected
   * onto the start surface's plane, which is what grounds "along this line"
   * phrases on a wall or the floor.
   */
  line(start: Hit, end: { position: Vec3; normal: Vec3 }, startMs: number, durationMs: number): void {
    const offset = dot(sub(end.position, start.position), start.normal);
    const projected = sub(end.position, mul(start.normal, offset));
    const overlay: LineOverlay = {
      cueId: null,
      start: start.position,
      end: end.position,
      project: projected,
      confirmed: false,
    };
    const sent = this.send({
      type: "line",
      t_ms: startMs,
      start_ms: startMs,
      duration_ms: durationMs,
      start: { object: start.id, position: triple(start.position), normal: triple(start.normal) },
      end: { object: start.id, position: triple(end.position), normal: triple(end.normal) },
      project: { object: start.id, position: triple(projected), normal: triple(start.normal) },
    });
    if (!sent) return;
    this.lines.push(overlay);
    this.pendingLines.push(overlay);
  }

  select(ids: string[]): void {
    if (this.send({ type: "select", t_ms: this.clock(), ids })) this.selection = ids;
  }

  /** Direct-manipulation channel: one API line, applied immediately. */
  apply(line: string): void {
    this.send({ type: "apply", t_ms: this.clock(), line });
  }

  clearCues(): void {
    this.points = [];
    this.lines = [];
    this.pendingPoints = [];
    this.pendingLines = [];
  }

  // ── head-pose synthesis ─────────────────────────────────────────────────

  startPoseTicker(camera: OrbitCamera, intervalMs = 100): void {
    this.stopPoseTicker();
    this.poseTimer = setInterval(() => {
      if (this.status === "live") this.send(camera.poseFrame(this.clock()));
    }, intervalMs);
  }

  stopPoseTicker(): void {
    if (this.poseTimer !== null) {
      clearInterval(this.poseTimer);
      this.poseTimer = null;
    }
  }
}
