/**
 * Client-side copy of the server's scene.
 *
 * The mirror holds no truth of its own: a hello snapshot replaces everything,
 * and every revision event replaces the object list wholesale. If a revision
 * number arrives out of sequence the mirror flags itself stale so the client
 * can ask for a fresh snapshot instead of guessing.
 */

import type { BoundaryDoc, EnvironmentDoc, ObjectDoc, PrefabDoc, SceneDoc, Vec3Doc } from "./protocol.js";
import { Vec3, v3 } from "./vec.js";

export interface Box {
  central: Vec3;
  size: Vec3;
  right: Vec3;
  up: Vec3;
  forward: Vec3;
}

export interface SceneObject {
  id: string;
  name: string;
  position: Vec3;
  scale: Vec3;
  box: Box;
}

export interface EnvObject {
  name: string;
  box: Box;
}

export const vecOf = (d: Vec3Doc): Vec3 => v3(Number(d.x), Number(d.y), Number(d.z));

export const boxOf = (d: BoundaryDoc): Box => ({
  central: vecOf(d.Central),
  size: vecOf(d.Size),
  right: vecOf(d.Right),
  up: vecOf(d.Up),
  forward: vecOf(d.Forward),
});

const objectOf = (d: ObjectDoc): SceneObject => ({
  id: d.object_id,
  name: d.object_name,
  position: vecOf(d.position),
  scale: vecOf(d.scale),
  box: boxOf(d.boundary),
});

export class SceneMirror {
  revision = 0;
  stale = false;
  room = { center: v3(0, 0, 0), dimensions: v3(0, 0, 0) };
  prefabs: PrefabDoc[] = [];
  environment: EnvObject[] = [];
  objects: SceneObject[] = [];
  private docs: ObjectDoc[] = [];

  loadSnapshot(scene: SceneDoc, revision: number): void {
    this.room = { center: vecOf(scene.room.center), dimensions: vecOf(scene.room.dimensions) };
    this.prefabs = scene.prefabs;
    this.environment = scene.environment.map((e: EnvironmentDoc) => ({ name: e.name, box: boxOf(e.boundary) }));
    this.replaceObjects(scene.objects);
    this.revision = revision;
    this.stale = false;
  }

  /**
   * Apply one revision event. Returns false (and marks the mirror stale)
   * when the revision number is not the next one; the caller should then
   * request a resync. Re-delivered older revisions are ignored.
   */
  applyRevision(revision: number, objects: ObjectDoc[]): boolean {
    if (revision <= this.revision) return true;
    if (revision !== this.revision + 1) {
      this.stale = true;
      return false;
    }
    this.replaceObjects(objects);
    this.revision = revision;
    return true;
  }

  private replaceObjects(docs: ObjectDoc[]): void {
    this.docs = docs;
    this.objects = docs.map(objectOf);
  }

  get(id: string): SceneObject | undefined {
    return this.objects.find((o) => o.id === id);
  }

  byName(name: string): SceneObject | undefined {
    return this.objects.find((o) => o.name === name);
  }

  /** Resting height for floor hits; falls back to the room base. */
  floorY(): number {
    const floor = this.environment.find((e) => e.name === "Floor");
    return floor ? floor.box.central.y : this.room.center.y - this.room.dimensions.y / 2;
  }

  /**
   * Canonical serialization of the object list. Two clients looking at the
   * same server state produce byte-identical keys, revision aside, because
   * the docs already carry two-decimal strings.
   */
  sceneKey(): string {
    const sorted = [...this.docs].sort((a, b) => (a.object_id < b.object_id ? -1 : 1));
    return JSON.stringify(sorted);
  }
}
