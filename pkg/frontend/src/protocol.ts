/**
 * Wire protocol types for the session service (see docs/protocol.md in the
 * service repo). Every frame is one JSON text message over a WebSocket.
 * Scene documents carry numbers as two-decimal strings; the mirror parses
 * them back into floats.
 */

export type Vec3Doc = { x: string; y: string; z: string };

export interface BoundaryDoc {
  Central: Vec3Doc;
  Size: Vec3Doc;
  Forward: Vec3Doc;
  Up: Vec3Doc;
  Right: Vec3Doc;
}

export interface ObjectDoc {
  object_id: string;
  object_name: string;
  position: Vec3Doc;
  scale: Vec3Doc;
  boundary: BoundaryDoc;
}

export interface PrefabDoc {
  prefab_id: string;
  description: string;
  remarks: string;
  dimensions: Vec3Doc;
}

export interface EnvironmentDoc {
  name: string;
  boundary: BoundaryDoc;
}

export interface SceneDoc {
  room: { center: Vec3Doc; dimensions: Vec3Doc };
  prefabs: PrefabDoc[];
  environment: EnvironmentDoc[];
  objects: ObjectDoc[];
}

export interface TargetReport {
  prefab_id: string;
  index: number;
  level: string;
  distance_m: number;
  coarse_t_ms: number | null;
  fine_t_ms: number | null;
}

export interface MetricsReport {
  revision: number;
  targets: TargetReport[];
  hand_distance_m: number;
  first_action_latency_ms: number[];
}

export interface HelloReply {
  type: "hello";
  protocol: number;
  session: { mode: string; task: string; revision: number; metrics: MetricsReport };
  scene: SceneDoc;
}

export type EventFrame =
  | { type: "event.revision"; t_ms: number; revision: number; line: string; objects: ObjectDoc[] }
  | { type: "event.message"; t_ms: number; content: string; debug: boolean }
  | { type: "event.warning"; t_ms: number; reason: string; detail: string; line?: string }
  | { type: "event.cue"; t_ms: number; cue_id: string; kind: "point" | "line" }
  | { type: "event.metrics"; t_ms: number; metrics: MetricsReport }
  | { type: "event.stream_end"; t_ms: number; applied: number; skipped: number; error: string | null }
  | { type: "event.error"; detail: string };

export type ServerFrame = HelloReply | EventFrame;

export interface LineEndDoc {
  object: string;
  position: [number, number, number];
  normal: [number, number, number];
}

export type IngestFrame =
  | { type: "word"; t_ms: number; text: string; start_ms: number; end_ms: number }
  | {
      type: "pose";
      t_ms: number;
      position: [number, number, number];
      forward: [number, number, number];
      right: [number, number, number];
    }
  | {
      type: "point";
      t_ms: number;
      target: string;
      position: [number, number, number];
      normal: [number, number, number];
    }
  | {
      type: "line";
      t_ms: number;
      start_ms: number;
      duration_ms: number;
      start: LineEndDoc;
      end: LineEndDoc;
      project: LineEndDoc;
    }
  | { type: "select"; t_ms: number; ids: string[] }
  | { type: "hand"; t_ms: number; left?: [number, number, number]; right?: [number, number, number] }
  | { type: "finalize"; t_ms: number; display_text?: string }
  | { type: "apply"; t_ms: number; line: string };

export type ClientFrame = { type: "hello" } | { type: "session.info" } | IngestFrame;

export function parseServerFrame(data: unknown): ServerFrame | null {
  if (typeof data !== "string") return null;
  try {
    const doc = JSON.parse(data);
    if (doc && typeof doc === "object" && typeof doc.type === "string") return doc as ServerFrame;
  } catch {
    /* not JSON: drop */
  }
  return null;
}
