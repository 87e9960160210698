/**
 * Canvas renderer: oriented boxes with painter's-algorithm depth sorting.
 * Everything drawn is a pure function of ViewState, so the picture after a
 * resync is exactly the picture a fresh client would draw.
 */

import { OrbitCamera } from "./camera.js";
import type { Box, SceneMirror, SceneObject } from "./mirror.js";
import type { Hit } from "./raycast.js";
import type { LineOverlay, PointOverlay } from "./session.js";
import { Vec3, add, dist, dot, mul, sub, v3 } from "./vec.js";

export interface ViewState {
  mirror: SceneMirror;
  camera: OrbitCamera;
  selection: string[];
  points: PointOverlay[];
  lines: LineOverlay[];
  hover: Hit | null;
  /** wall-clock ms; while now < shakeUntil the view jitters (missed click) */
  shakeUntil: number;
  now: number;
}

const LIGHT_DIR = v3(0.45, 0.8, 0.35);

interface Corner2 {
  x: number;
  y: number;
}

function corners(box: Box): Vec3[] {
  const r = mul(box.right, box.size.x / 2);
  const u = mul(box.up, box.size.y / 2);
  const f = mul(box.forward, box.size.z / 2);
  const out: Vec3[] = [];
  for (const sr of [-1, 1])
    for (const su of [-1, 1])
      for (const sf of [-1, 1])
        out.push(add(box.central, add(mul(r, sr), add(mul(u, su), mul(f, sf)))));
  return out;
}

// corner index is (sr<<2 | su<<1 | sf) with -1 mapped to 0
const FACES: { axis: "right" | "up" | "forward"; sign: number; idx: [number, number, number, number] }[] = [
  { axis: "right", sign: -1, idx: [0, 1, 3, 2] },
  { axis: "right", sign: 1, idx: [4, 5, 7, 6] },
  { axis: "up", sign: -1, idx: [0, 1, 5, 4] },
  { axis: "up", sign: 1, idx: [2, 3, 7, 6] },
  { axis: "forward", sign: -1, idx: [0, 2, 6, 4] },
  { axis: "forward", sign: 1, idx: [1, 3, 7, 5] },
];

const EDGES: [number, number][] = [
  [0, 1], [2, 3], [4, 5], [6, 7],
  [0, 2], [1, 3], [4, 6], [5, 7],
  [0, 4], [1, 5], [2, 6], [3, 7],
];

function hueOf(name: string): number {
  let h = 0;
  for (let i = 0; i < name.length; i++) h = (h * 31 + name.charCodeAt(i)) >>> 0;
  return h % 360;
}

export class Renderer {
  constructor(private readonly ctx: CanvasRenderingContext2D) {}

  draw(state: ViewState, w: number, h: number): void {
    const { ctx } = this;
    const cam = state.camera;
    ctx.save();
    ctx.clearRect(0, 0, w, h);
    ctx.fillStyle = "#14161c";
    ctx.fillRect(0, 0, w, h);

    if (state.now < state.shakeUntil) {
      ctx.translate((Math.random() - 0.5) * 10, (Math.random() - 0.5) * 10);
    }

    this.drawFloorGrid(state.mirror, cam, w, h);

    for (const env of state.mirror.environment) {
      this.strokeBox(env.box, cam, w, h, "rgba(120, 136, 164, 0.28)");
    }

    const camPos = cam.pose().position;
    const sorted = [...state.mirror.objects].sort(
      (a, b) => dist(b.box.central, camPos) - dist(a.box.central, camPos),
    );
    for (const obj of sorted) this.drawObject(obj, state, cam, w, h, camPos);

    this.drawCues(state, cam, w, h);
    if (state.hover) this.drawLabel(state.hover, cam, w, h);
    ctx.restore();
  }

  private projectAll(points: Vec3[], cam: OrbitCamera, w: number, h: number): (Corner2 | null)[] {
    return points.map((p) => {
      const s = cam.project(p, w, h);
      return s ? { x: s.x, y: s.y } : null;
    });
  }

  private drawFloorGrid(mirror: SceneMirror, cam: OrbitCamera, w: number, h: number): void {
    const { ctx } = this;
    const c = mirror.room.center;
    const d = mirror.room.dimensions;
    const y = mirror.floorY();
    ctx.strokeStyle = "rgba(92, 104, 128, 0.35)";
    ctx.lineWidth = 1;
    const x0 = c.x - d.x / 2;
    const x1 = c.x + d.x / 2;
    const z0 = c.z - d.z / 2;
    const z1 = c.z + d.z / 2;
    for (let x = Math.ceil(x0); x <= Math.floor(x1); x++) {
      this.strokeSegment(v3(x, y, z0), v3(x, y, z1), cam, w, h);
    }
    for (let z = Math.ceil(z0); z <= Math.floor(z1); z++) {
      this.strokeSegment(v3(x0, y, z), v3(x1, y, z), cam, w, h);
    }
  }

  private strokeSegment(a: Vec3, b: Vec3, cam: OrbitCamera, w: number, h: number): void {
    const pa = cam.project(a, w, h);
    const pb = cam.project(b, w, h);
    if (!pa || !pb) return;
    const { ctx } = this;
    ctx.beginPath();
    ctx.moveTo(pa.x, pa.y);
    ctx.lineTo(pb.x, pb.y);
    ctx.stroke();
  }

  private strokeBox(box: Box, cam: OrbitCamera, w: number, h: number, style: string): void {
    const pts = this.projectAll(corners(box), cam, w, h);
    const { ctx } = this;
    ctx.strokeStyle = style;
    ctx.lineWidth = 1;
    ctx.beginPath();
    for (const [a, b] of EDGES) {
      const pa = pts[a];
      const pb = pts[b];
      if (!pa || !pb) continue;
      ctx.moveTo(pa.x, pa.y);
      ctx.lineTo(pb.x, pb.y);
    }
    ctx.stroke();
  }

  private drawObject(
    obj: SceneObject,
    state: ViewState,
    cam: OrbitCamera,
    w: number,
    h: number,
    camPos: Vec3,
  ): void {
    const { ctx } = this;
    const pts = this.projectAll(corners(obj.box), cam, w, h);
    const hue = hueOf(obj.name.replace(/\s+\d+$/, ""));
    const selected = state.selection.includes(obj.id);
    const hovered = state.hover?.kind === "object" && state.hover.id === obj.id;

    const axes = { right: obj.box.right, up: obj.box.up, forward: obj.box.forward };
    for (const face of FACES) {
      const normal = mul(axes[face.axis], face.sign);
      const faceCenter = add(
        obj.box.central,
        mul(normal, { right: obj.box.size.x, up: obj.box.size.y, forward: obj.box.size.z }[face.axis] / 2),
      );
      if (dot(normal, sub(faceCenter, camPos)) >= 0) continue;
      const quad = face.idx.map((i) => pts[i]);
      if (quad.some((p) => p === null)) continue;
      const shade = 0.45 + 0.4 * Math.max(0, dot(normal, LIGHT_DIR));
      const light = Math.round(34 + shade * 38);
      ctx.fillStyle = `hsl(${hue} 42% ${light}%)`;
      ctx.beginPath();
      ctx.moveTo(quad[0]!.x, quad[0]!.y);
      for (const p of quad.slice(1)) ctx.lineTo(p!.x, p!.y);
      ctx.closePath();
      ctx.fill();
    }

    if (selected || hovered) {
      this.strokeBox(obj.box, cam, w, h, selected ? "#ffd166" : "#9fb6ff");
    }
  }

  private drawCues(state: ViewState, cam: OrbitCamera, w: number, h: number): void {
    const { ctx } = this;
    for (const point of state.points) {
      const s = cam.project(point.position, w, h);
      if (!s) continue;
      ctx.strokeStyle = point.confirmed ? "#67e8a2" : "rgba(103, 232, 162, 0.4)";
      ctx.fillStyle = ctx.strokeStyle;
      ctx.lineWidth = 2;
      ctx.beginPath();
      ctx.arc(s.x, s.y, 5, 0, Math.PI * 2);
      ctx.stroke();
      const tip = cam.project(add(point.position, mul(point.normal, 0.25)), w, h);
      if (tip) {
        ctx.beginPath();
        ctx.moveTo(s.x, s.y);
        ctx.lineTo(tip.x, tip.y);
        ctx.stroke();
      }
    }
    for (const line of state.lines) {
      const a = cam.project(line.start, w, h);
      const b = cam.project(line.end, w, h);
      const p = cam.project(line.project, w, h);
      ctx.lineWidth = 2;
      ctx.strokeStyle = line.confirmed ? "#f2c063" : "rgba(242, 192, 99, 0.4)";
      if (a && b) {
        ctx.beginPath();
        ctx.moveTo(a.x, a.y);
        ctx.lineTo(b.x, b.y);
        ctx.stroke();
      }
      if (a && p) {
        ctx.setLineDash([4, 4]);
        ctx.beginPath();
        ctx.moveTo(a.x, a.y);
        ctx.lineTo(p.x, p.y);
        ctx.stroke();
        ctx.setLineDash([]);
      }
    }
  }

  private drawLabel(hover: Hit, cam: OrbitCamera, w: number, h: number): void {
    const { ctx } = this;
    const s = cam.project(hover.position, w, h);
    if (!s) return;
    const text = hover.name;
    ctx.font = "12px system-ui, sans-serif";
    const pad = 5;
    const width = ctx.measureText(text).width + pad * 2;
    const x = Math.min(Math.max(s.x + 10, 4), w - width - 4);
    const y = Math.max(s.y - 28, 4);
    ctx.fillStyle = "rgba(18, 20, 26, 0.92)";
    ctx.strokeStyle = "rgba(159, 182, 255, 0.6)";
    ctx.beginPath();
    ctx.roundRect(x, y, width, 20, 4);
    ctx.fill();
    ctx.stroke();
    ctx.fillStyle = "#dce3f2";
    ctx.fillText(text, x + pad, y + 14);
  }
}
