/**
 * Orbit camera plus the projection math the renderer and the picker share.
 * One source of truth: a pixel the renderer painted and the ray the picker
 * casts through that pixel agree by construction (see camera tests).
 */

import { Vec3, add, cross, dot, mul, normalize, sub, triple, v3 } from "./vec.js";

export interface CameraPose {
  position: Vec3;
  forward: Vec3;
  right: Vec3;
  up: Vec3;
}

export interface Ray {
  origin: Vec3;
  dir: Vec3;
}

const WORLD_UP = v3(0, 1, 0);
const MIN_PITCH = -0.2;
const MAX_PITCH = 1.45;

export class OrbitCamera {
  target: Vec3;
  yaw = Math.PI;
  pitch = 0.6;
  distance = 10;
  fovY = (60 * Math.PI) / 180;

  constructor(target: Vec3 = v3(4.49, 1.0, 4.39)) {
    this.target = target;
  }

  orbit(dYaw: number, dPitch: number): void {
    this.yaw += dYaw;
    this.pitch = Math.min(MAX_PITCH, Math.max(MIN_PITCH, this.pitch + dPitch));
  }

  zoom(factor: number): void {
    this.distance = Math.min(40, Math.max(1.5, this.distance * factor));
  }

  pose(): CameraPose {
    const cp = Math.cos(this.pitch);
    // pitch > 0 looks down; yaw 0 looks along +z
    const forward = normalize(v3(cp * Math.sin(this.yaw), -Math.sin(this.pitch), cp * Math.cos(this.yaw)));
    const position = sub(this.target, mul(forward, this.distance));
    const right = normalize(cross(WORLD_UP, forward));
    const up = cross(forward, right);
    return { position, forward, right, up };
  }

  /** World point to canvas pixel; null when behind the near plane. */
  project(p: Vec3, w: number, h: number): { x: number; y: number; depth: number } | null {
    const pose = this.pose();
    const rel = sub(p, pose.position);
    const depth = dot(rel, pose.forward);
    if (depth < 0.05) return null;
    const f = h / 2 / Math.tan(this.fovY / 2);
    return {
      x: w / 2 + (dot(rel, pose.right) * f) / depth,
      y: h / 2 - (dot(rel, pose.up) * f) / depth,
      depth,
    };
  }

  /** Canvas pixel to world ray, inverse of project. */
  screenRay(x: number, y: number, w: number, h: number): Ray {
    const pose = this.pose();
    const f = h / 2 / Math.tan(this.fovY / 2);
    const dir = normalize(
      add(pose.forward, add(mul(pose.right, (x - w / 2) / f), mul(pose.up, (h / 2 - y) / f))),
    );
    return { origin: pose.position, dir };
  }

  /** Head-pose ingest triple for the service (position, forward, right). */
  poseFrame(tMs: number): {
    type: "pose";
    t_ms: number;
    position: [number, number, number];
    forward: [number, number, number];
    right: [number, number, number];
  } {
    const pose = this.pose();
    return {
      type: "pose",
      t_ms: tMs,
      position: triple(pose.position),
      forward: triple(pose.forward),
      right: triple(pose.right),
    };
  }
}
