import { beforeEach, describe, expect, it } from "vitest";
import { PointerTracker, PickResult } from "../src/gestures.js";
import type { Hit } from "../src/raycast.js";
import { v3 } from "../src/vec.js";

const floorHit = (x: number, z: number): Hit => ({
  kind: "environment",
  id: "Floor",
  name: "Floor",
  t: 5,
  position: v3(x, 0.05, z),
  normal: v3(0, 1, 0),
});

describe("PointerTracker", () => {
  let points: { hit: Hit; tMs: number }[];
  let lines: { start: Hit; end: { position: ReturnType<typeof v3> }; durationMs: number }[];
  let misses: number;
  let pickMap: Map<string, Hit | null>;
  let clockNow: number;
  let tracker: PointerTracker;

  const pickAt = (x: number, y: number): PickResult => ({
    hit: pickMap.get(`${x},${y}`) ?? null,
    ray: { origin: v3(x, 10, y), dir: v3(0, -1, 0) },
  });

  beforeEach(() => {
    points = [];
    lines = [];
    misses = 0;
    pickMap = new Map();
    clockNow = 1000;
    tracker = new PointerTracker(
      pickAt,
      {
        onPoint: (hit, tMs) => points.push({ hit, tMs }),
        onLine: (start, end, _startMs, durationMs) => lines.push({ start, end, durationMs }),
        onMiss: () => misses++,
      },
      () => clockNow,
    );
  });

  it("treats a short press as a click and stamps press time", () => {
    pickMap.set("100,102", floorHit(3, 4));
    tracker.down(100, 100);
    clockNow = 1400;
    tracker.up(100, 102);
    expect(points).toHaveLength(1);
    expect(points[0]!.tMs).toBe(1000);
    expect(lines).toHaveLength(0);
  });

  it("shakes on a missed click and sends nothing", () => {
    tracker.down(50, 50);
    tracker.up(51, 50);
    expect(misses).toBe(1);
    expect(points).toHaveLength(0);
  });

  it("turns a drag between two hits into a line with its duration", () => {
    pickMap.set("10,10", floorHit(1, 1));
    pickMap.set("90,90", floorHit(6, 6));
    tracker.down(10, 10);
    clockNow = 1750;
    tracker.up(90, 90);
    expect(lines).toHaveLength(1);
    expect(lines[0]!.start.position.x).toBe(1);
    expect(lines[0]!.end.position.x).toBe(6);
    expect(lines[0]!.durationMs).toBe(750);
  });

  it("synthesizes the drag end at press depth when the release ray misses", () => {
    pickMap.set("10,10", floorHit(1, 1));
    tracker.down(10, 10);
    tracker.up(200, 80);
    expect(lines).toHaveLength(1);
    // release ray origin (200, 10, 80) downward, press hit at t=5
    expect(lines[0]!.end.position).toEqual(v3(200, 5, 80));
  });

  it("shakes when the drag never started on anything", () => {
    tracker.down(10, 10);
    tracker.up(200, 200);
    expect(misses).toBe(1);
    expect(lines).toHaveLength(0);
  });

  it("can be cancelled", () => {
    pickMap.set("10,10", floorHit(1, 1));
    tracker.down(10, 10);
    tracker.cancel();
    tracker.up(10, 10);
    expect(points).toHaveLength(0);
    expect(misses).toBe(0);
  });
});
