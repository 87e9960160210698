/** Minimal 3D vector helpers shared by the mirror, camera and picker. */

export interface Vec3 {
  x: number;
  y: number;
  z: number;
}

export const v3 = (x: number, y: number, z: number): Vec3 => ({ x, y, z });

export const add = (a: Vec3, b: Vec3): Vec3 => v3(a.x + b.x, a.y + b.y, a.z + b.z);
export const sub = (a: Vec3, b: Vec3): Vec3 => v3(a.x - b.x, a.y - b.y, a.z - b.z);
export const mul = (a: Vec3, s: number): Vec3 => v3(a.x * s, a.y * s, a.z * s);
export const dot = (a: Vec3, b: Vec3): number => a.x * b.x + a.y * b.y + a.z * b.z;

export const cross = (a: Vec3, b: Vec3): Vec3 =>
  v3(a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x);

export const len = (a: Vec3): number => Math.hypot(a.x, a.y, a.z);
export const dist = (a: Vec3, b: Vec3): number => len(sub(a, b));

export function normalize(a: Vec3): Vec3 {
  const l = len(a);
  return l > 1e-12 ? mul(a, 1 / l) : v3(0, 0, 0);
}

/** Render a component the way the wire protocol does: two decimals. */
export const fmt2 = (n: number): string => n.toFixed(2);

export const triple = (a: Vec3): [number, number, number] => [a.x, a.y, a.z];
