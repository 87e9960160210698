/**
 * Browser wiring: one SessionClient, one OrbitCamera, one render loop.
 *
 * Controls: left click places a point cue, left drag draws a line cue,
 * right drag orbits, the wheel zooms, shift+click selects an object,
 * alt+drag slides an object across its floor plane and commits the move
 * on release through the apply channel.
 */

import { OrbitCamera } from "./camera.js";
import { PointerTracker } from "./gestures.js";
import { pick, Hit } from "./raycast.js";
import { Renderer } from "./render.js";
import { SessionClient, SocketFactory, SocketLike } from "./session.js";
import { fmt2, add, mul, sub, v3, Vec3 } from "./vec.js";
import type { PrefabDoc } from "./protocol.js";

const browserSocket: SocketFactory = (url) => {
  const ws = new WebSocket(url);
  const shim: SocketLike = {
    send: (d) => ws.send(d),
    close: () => ws.close(),
    onopen: null,
    onmessage: null,
    onclose: null,
  };
  ws.onopen = () => shim.onopen?.();
  ws.onmessage = (ev) => shim.onmessage?.({ data: ev.data });
  ws.onclose = () => shim.onclose?.();
  return shim;
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

const canvas = el<HTMLCanvasElement>("view");
const statusEl = el<HTMLSpanElement>("status");
const sayEl = el<HTMLInputElement>("say");
const wpmEl = el<HTMLInputElement>("wpm");
const consoleEl = el<HTMLDivElement>("console");
const metricsEl = el<HTMLDivElement>("metrics");
const menuBtn = el<HTMLButtonElement>("menu-btn");
const menuEl = el<HTMLDivElement>("menu");
const prefabListEl = el<HTMLDivElement>("prefab-list");
const minimap = el<HTMLCanvasElement>("minimap");
const reconnectBtn = el<HTMLButtonElement>("reconnect-btn");
const micBtn = el<HTMLButtonElement>("mic-btn");

const params = new URLSearchParams(location.search);
const wsUrl = params.get("ws") ?? `ws://${location.hostname || "127.0.0.1"}:8765`;

const client = new SessionClient(wsUrl, browserSocket);
const camera = new OrbitCamera();
const renderer = new Renderer(canvas.getContext("2d")!);

let hover: Hit | null = null;
let shakeUntil = 0;
let dirty = true;
let renderedConsoleCount = 0;
let hoveredPrefab: PrefabDoc | null = null;

// ── sizing ──────────────────────────────────────────────────────────────────

function viewSize(): { w: number; h: number } {
  return { w: canvas.clientWidth, h: canvas.clientHeight };
}

function fitCanvas(): void {
  const dpr = window.devicePixelRatio || 1;
  canvas.width = Math.round(canvas.clientWidth * dpr);
  canvas.height = Math.round(canvas.clientHeight * dpr);
  canvas.getContext("2d")!.setTransform(dpr, 0, 0, dpr, 0, 0);
  dirty = true;
}
new ResizeObserver(fitCanvas).observe(canvas);

// ── pointer handling ─────────────────────────────────────────────────────────

const pickAt = (x: number, y: number) => {
  const { w, h } = viewSize();
  const ray = camera.screenRay(x, y, w, h);
  return { hit: pick(ray, client.mirror), ray };
};

const tracker = new PointerTracker(pickAt, {
  onPoint: (hit, tMs) => {
    client.point(hit, tMs);
    dirty = true;
  },
  onLine: (start, end, startMs, durationMs) => {
    client.line(start, end, startMs, durationMs);
    dirty = true;
  },
  onMiss: () => {
    shakeUntil = performance.now() + 220;
    dirty = true;
  },
});

let orbiting = false;
let dragging: { id: string; planeY: number; grab: Vec3 } | null = null;
let last = { x: 0, y: 0 };

function planePoint(x: number, y: number, planeY: number): Vec3 | null {
  const { w, h } = viewSize();
  const ray = camera.screenRay(x, y, w, h);
  if (Math.abs(ray.dir.y) < 1e-6) return null;
  const t = (planeY - ray.origin.y) / ray.dir.y;
  return t > 0 ? add(ray.origin, mul(ray.dir, t)) : null;
}

canvas.addEventListener("contextmenu", (e) => e.preventDefault());

canvas.addEventListener("pointerdown", (e) => {
  canvas.setPointerCapture(e.pointerId);
  last = { x: e.offsetX, y: e.offsetY };
  if (e.button === 2 || e.ctrlKey) {
    orbiting = true;
    return;
  }
  if (e.button !== 0) return;
  const { hit } = pickAt(e.offsetX, e.offsetY);
  if (e.shiftKey) {
    if (hit?.kind === "object") client.select(client.selection.includes(hit.id) ? [] : [hit.id]);
    dirty = true;
    return;
  }
  if (e.altKey && hit?.kind === "object") {
    const obj = client.mirror.get(hit.id)!;
    dragging = { id: hit.id, planeY: hit.position.y, grab: sub(hit.position, obj.position) };
    return;
  }
  tracker.down(e.offsetX, e.offsetY);
});

canvas.addEventListener("pointermove", (e) => {
  const x = e.offsetX;
  const y = e.offsetY;
  if (orbiting) {
    camera.orbit((x - last.x) * 0.008, (y - last.y) * 0.008);
    dirty = true;
  } else if (!tracker.active && !dragging) {
    const result = pickAt(x, y);
    if (result.hit?.name !== hover?.name || result.hit?.id !== hover?.id) {
      hover = result.hit;
      dirty = true;
    }
  }
  last = { x, y };
});

canvas.addEventListener("pointerup", (e) => {
  if (orbiting) {
    orbiting = false;
    return;
  }
  if (dragging) {
    const spot = planePoint(e.offsetX, e.offsetY, dragging.planeY);
    const obj = client.mirror.get(dragging.id);
    if (spot && obj) {
      const target = sub(spot, dragging.grab);
      client.apply(`MOVE("${dragging.id}", ${fmt2(target.x)}, ${fmt2(obj.position.y)}, ${fmt2(target.z)});`);
    }
    dragging = null;
    return;
  }
  if (e.button === 0) tracker.up(e.offsetX, e.offsetY);
});

canvas.addEventListener("wheel", (e) => {
  e.preventDefault();
  camera.zoom(Math.exp(e.deltaY * 0.001));
  dirty = true;
});

// ── instruction input ────────────────────────────────────────────────────────

function currentWpm(): number {
  const n = Number(wpmEl.value);
  return Number.isFinite(n) && n >= 30 ? n : 150;
}

sayEl.addEventListener("keydown", (e) => {
  if (e.key !== "Enter") return;
  if (client.sendUtterance(sayEl.value, currentWpm())) sayEl.value = "";
});

// speech input only where the browser offers it; typing always works
type Recognition = {
  lang: string;
  continuous: boolean;
  interimResults: boolean;
  start(): void;
  stop(): void;
  onresult: ((ev: { results: ArrayLike<ArrayLike<{ transcript: string }> & { isFinal: boolean }> }) => void) | null;
  onend: (() => void) | null;
};
const RecognitionCtor = (window as unknown as { SpeechRecognition?: new () => Recognition; webkitSpeechRecognition?: new () => Recognition }).SpeechRecognition ??
  (window as unknown as { webkitSpeechRecognition?: new () => Recognition }).webkitSpeechRecognition;

if (!RecognitionCtor) {
  micBtn.style.display = "none";
} else {
  let active: Recognition | null = null;
  micBtn.addEventListener("click", () => {
    if (active) {
      active.stop();
      return;
    }
    const rec = new RecognitionCtor();
    rec.lang = "en-US";
    rec.continuous = false;
    rec.interimResults = false;
    rec.onresult = (ev) => {
      const result = ev.results[ev.results.length - 1];
      if (result?.isFinal) client.sendUtterance(result[0]?.transcript ?? "", currentWpm());
    };
    rec.onend = () => {
      active = null;
      micBtn.classList.remove("recording");
    };
    active = rec;
    micBtn.classList.add("recording");
    rec.start();
  });
}

// ── menu and mini-room ───────────────────────────────────────────────────────

menuBtn.addEventListener("click", () => {
  menuEl.classList.toggle("open");
  if (menuEl.classList.contains("open")) rebuildMenu();
});

function rebuildMenu(): void {
  prefabListEl.textContent = "";
  for (const prefab of client.mirror.prefabs) {
    const row = document.createElement("div");
    row.className = "prefab";
    const dims = prefab.dimensions;
    row.innerHTML = `<b>${prefab.prefab_id}</b> <span class="dims">${dims.x}×${dims.y}×${dims.z} m</span><p>${prefab.description}</p>`;
    row.addEventListener("mouseenter", () => {
      hoveredPrefab = prefab;
      drawMinimap();
    });
    row.addEventListener("mouseleave", () => {
      if (hoveredPrefab === prefab) hoveredPrefab = null;
      drawMinimap();
    });
    prefabListEl.appendChild(row);
  }
  drawMinimap();
}

function drawMinimap(): void {
  const ctx = minimap.getContext("2d")!;
  const w = minimap.width;
  const h = minimap.height;
  ctx.clearRect(0, 0, w, h);
  ctx.fillStyle = "#191c24";
  ctx.fillRect(0, 0, w, h);
  const room = client.mirror.room;
  if (room.dimensions.x === 0) return;
  const pad = 12;
  const sx = (w - pad * 2) / room.dimensions.x;
  const sz = (h - pad * 2) / room.dimensions.z;
  const s = Math.min(sx, sz);
  const toMap = (p: { x: number; z: number }) => ({
    x: pad + (p.x - (room.center.x - room.dimensions.x / 2)) * s,
    y: pad + (p.z - (room.center.z - room.dimensions.z / 2)) * s,
  });
  ctx.strokeStyle = "#5c6880";
  const o = toMap({ x: room.center.x - room.dimensions.x / 2, z: room.center.z - room.dimensions.z / 2 });
  ctx.strokeRect(o.x, o.y, room.dimensions.x * s, room.dimensions.z * s);
  ctx.fillStyle = "#8b97b8";
  for (const obj of client.mirror.objects) {
    const c = toMap(obj.box.central);
    ctx.fillRect(c.x - (obj.box.size.x * s) / 2, c.y - (obj.box.size.z * s) / 2, Math.max(2, obj.box.size.x * s), Math.max(2, obj.box.size.z * s));
  }
  if (hoveredPrefab) {
    const dims = { x: Number(hoveredPrefab.dimensions.x), z: Number(hoveredPrefab.dimensions.z) };
    const c = toMap(room.center);
    ctx.strokeStyle = "#67e8a2";
    ctx.setLineDash([3, 3]);
    ctx.strokeRect(c.x - (dims.x * s) / 2, c.y - (dims.z * s) / 2, dims.x * s, dims.z * s);
    ctx.setLineDash([]);
  }
}

// ── console, metrics, status ─────────────────────────────────────────────────

function syncPanels(): void {
  for (; renderedConsoleCount < client.consoleLog.length; renderedConsoleCount++) {
    const entry = client.consoleLog[renderedConsoleCount]!;
    const div = document.createElement("div");
    div.className = `entry ${entry.kind}`;
    div.textContent = entry.text;
    consoleEl.appendChild(div);
  }
  consoleEl.scrollTop = consoleEl.scrollHeight;

  statusEl.textContent = `${client.status} · rev ${client.mirror.revision}`;
  statusEl.dataset.state = client.status;

  if (client.metrics) {
    const targets = client.metrics.targets
      .map((t) => `${t.prefab_id}[${t.index}] ${t.level} (${t.distance_m.toFixed(2)} m)`)
      .join(" · ");
    metricsEl.textContent = targets
      ? `${targets} · hands ${client.metrics.hand_distance_m.toFixed(2)} m`
      : `hands ${client.metrics.hand_distance_m.toFixed(2)} m`;
  }
  if (menuEl.classList.contains("open")) drawMinimap();
}

reconnectBtn.addEventListener("click", () => client.reconnectNow());

// ── render loop ──────────────────────────────────────────────────────────────

client.onchange = () => {
  dirty = true;
  syncPanels();
};

function frame(): void {
  const now = performance.now();
  if (dirty || now < shakeUntil) {
    const { w, h } = viewSize();
    renderer.draw(
      {
        mirror: client.mirror,
        camera,
        selection: client.selection,
        points: client.points,
        lines: client.lines,
        hover,
        shakeUntil,
        now,
      },
      w,
      h,
    );
    dirty = false;
  }
  requestAnimationFrame(frame);
}

fitCanvas();
client.connect();
client.startPoseTicker(camera);
requestAnimationFrame(frame);
