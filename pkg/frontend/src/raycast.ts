/**
 * Picking against the mirrored scene.
 *
 * Boxes are oriented: extents run along the boundary triad (size.x along
 * right, size.y along up, size.z along forward). Degenerate slabs (walls,
 * the floor) get a hair of synthetic thickness so the slab test can hit
 * them; the reported position is snapped back onto the true surface, which
 * is why a floor click lands at exactly floor height.
 */

import type { Ray } from "./camera.js";
import type { Box, SceneMirror } from "./mirror.js";
import { Vec3, add, dot, mul, sub, v3 } from "./vec.js";

export interface Hit {
  kind: "object" | "environment";
  /** object_id for objects, environment name otherwise */
  id: string;
  name: string;
  t: number;
  position: Vec3;
  normal: Vec3;
}

const FLAT_PAD = 0.01;

interface BoxHit {
  t: number;
  normal: Vec3;
  /** hit point snapped onto the struck face's true plane */
  position: Vec3;
}

export function rayBox(ray: Ray, box: Box): BoxHit | null {
  const rel = sub(ray.origin, box.central);
  const axes = [box.right, box.up, box.forward];
  const extents = [box.size.x, box.size.y, box.size.z];
  let tEnter = -Infinity;
  let tExit = Infinity;
  let enterAxis = -1;
  let enterSign = 0;

  for (let i = 0; i < 3; i++) {
    const axis = axes[i];
    const half = Math.max(extents[i] / 2, FLAT_PAD);
    const o = dot(rel, axis);
    const d = dot(ray.dir, axis);
    if (Math.abs(d) < 1e-12) {
      if (Math.abs(o) > half) return null;
      continue;
    }
    let t0 = (-half - o) / d;
    let t1 = (half - o) / d;
    if (t0 > t1) [t0, t1] = [t1, t0];
    if (t0 > tEnter) {
      tEnter = t0;
      enterAxis = i;
      enterSign = -Math.sign(d);
    }
    tExit = Math.min(tExit, t1);
    if (tEnter > tExit) return null;
  }

  if (enterAxis < 0 || tEnter < 0) return null;
  const axis = axes[enterAxis];
  const raw = add(ray.origin, mul(ray.dir, tEnter));
  // project onto the face plane: the pad on degenerate slabs must not leak
  // into the reported point, a floor click sits at floor height
  const offset = enterSign * (extents[enterAxis] / 2) - dot(sub(raw, box.central), axis);
  return {
    t: tEnter,
    normal: mul(axis, enterSign),
    position: add(raw, mul(axis, offset)),
  };
}

function roomReference(mirror: SceneMirror): Vec3 {
  // room.center sits at floor height; picking wants the mid-height point
  const c = mirror.room.center;
  return v3(c.x, c.y + mirror.room.dimensions.y / 2, c.z);
}

/**
 * Nearest interactable surface under the ray, or null (a sky click).
 * Environment surfaces count only when their struck face looks into the
 * room, so an orbit camera outside the walls picks through the near wall
 * and the ceiling instead of hitting their back sides.
 */
export function pick(ray: Ray, mirror: SceneMirror): Hit | null {
  let best: Hit | null = null;

  const consider = (kind: Hit["kind"], id: string, name: string, bh: BoxHit | null) => {
    if (!bh || (best && bh.t >= best.t)) return;
    best = { kind, id, name, t: bh.t, position: bh.position, normal: bh.normal };
  };

  for (const o of mirror.objects) consider("object", o.id, o.name, rayBox(ray, o.box));

  const ref = roomReference(mirror);
  for (const e of mirror.environment) {
    const bh = rayBox(ray, e.box);
    if (!bh) continue;
    if (dot(bh.normal, sub(ref, bh.position)) <= 0) continue;
    consider("environment", e.name, e.name, bh);
  }
  return best;
}
