/**
 * Turns raw pointer input into point and line cues.
 *
 * A press-release within the drag threshold is a click: hit something and a
 * point cue goes out, hit nothing and the canvas shakes instead, with no
 * frame sent. A longer drag becomes a line cue from the press hit to the
 * release hit; when the release ray misses everything the end is synthesized
 * at the press depth so a stroke can run off a wall's edge without dying.
 */

import type { Hit } from "./raycast.js";
import type { Ray } from "./camera.js";
import { Vec3, add, mul } from "./vec.js";

export interface PickResult {
  hit: Hit | null;
  ray: Ray;
}

export interface GestureHandlers {
  onPoint(hit: Hit, tMs: number): void;
  onLine(start: Hit, end: { position: Vec3; normal: Vec3 }, startMs: number, durationMs: number): void;
  onMiss(): void;
}

const DRAG_THRESHOLD_PX = 6;

export class PointerTracker {
  private downAt: { x: number; y: number; tMs: number } | null = null;

  constructor(
    private readonly pickAt: (x: number, y: number) => PickResult,
    private readonly handlers: GestureHandlers,
    private readonly clock: () => number = () => Date.now(),
  ) {}

  get active(): boolean {
    return this.downAt !== null;
  }

  down(x: number, y: number): void {
    this.downAt = { x, y, tMs: this.clock() };
  }

  cancel(): void {
    this.downAt = null;
  }

  up(x: number, y: number): void {
    const start = this.downAt;
    this.downAt = null;
    if (!start) return;
    const moved = Math.hypot(x - start.x, y - start.y);
    if (moved < DRAG_THRESHOLD_PX) {
      const { hit } = this.pickAt(x, y);
      if (hit) this.handlers.onPoint(hit, start.tMs);
      else this.handlers.onMiss();
      return;
    }

    const begin = this.pickAt(start.x, start.y);
    if (!begin.hit) {
      this.handlers.onMiss();
      return;
    }
    const finish = this.pickAt(x, y);
    const end = finish.hit
      ? { position: finish.hit.position, normal: finish.hit.normal }
      : {
          // release ray missed: hold the press depth along the new ray
          position: add(finish.ray.origin, mul(finish.ray.dir, begin.hit.t)),
          normal: begin.hit.normal,
        };
    this.handlers.onLine(begin.hit, end, start.tMs, this.clock() - start.tMs);
  }
}
