// Shared scene-document builders for the unit tests. Shapes follow
// docs/protocol.md; numbers ride as two-decimal strings like on the wire.

import type { BoundaryDoc, ObjectDoc, SceneDoc, Vec3Doc } from "../src/protocol.js";

export const d3 = (x: number, y: number, z: number): Vec3Doc => ({
  x: x.toFixed(2),
  y: y.toFixed(2),
  z: z.toFixed(2),
});

export function axisBoundary(central: [number, number, number], size: [number, number, number]): BoundaryDoc {
  return {
    Central: d3(...central),
    Size: d3(...size),
    Forward: d3(0, 0, 1),
    Up: d3(0, 1, 0),
    Right: d3(1, 0, 0),
  };
}

export function objectDoc(
  id: string,
  name: string,
  position: [number, number, number],
  size: [number, number, number],
  central?: [number, number, number],
): ObjectDoc {
  return {
    object_id: id,
    object_name: name,
    position: d3(...position),
    scale: d3(1, 1, 1),
    boundary: axisBoundary(central ?? [position[0], position[1] + size[1] / 2, position[2]], size),
  };
}

/** An 11 m square room with a flat floor and ceiling plus one wall. */
export function sceneDoc(objects: ObjectDoc[] = []): SceneDoc {
  return {
    room: { center: d3(4.49, 0.05, 4.39), dimensions: d3(11, 3, 11) },
    prefabs: [
      {
        prefab_id: "Chair",
        description: "A wooden chair.",
        remarks: "Anchor: Bottom Center.",
        dimensions: d3(0.46, 0.88, 0.52),
      },
    ],
    environment: [
      { name: "Floor", boundary: axisBoundary([4.49, 0.05, 4.39], [10.74, 0, 10.74]) },
      { name: "Ceiling", boundary: axisBoundary([4.49, 2.95, 4.39], [10.74, 0, 10.74]) },
      { name: "Wall_X_Negative", boundary: axisBoundary([9.94, 1.28, 4.53], [0, 2.6, 10.75]) },
    ],
    objects,
  };
}
