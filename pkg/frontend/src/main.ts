// Wiring: pointer sampler -> websocket -> reducer -> canvas/panels.

import { SessionClient } from "./client.js";
import { clampStandoff, DEFAULT_WALL, GazeSampler, WallView } from "./gazesource.js";
import { initialState, reduceFrame, UiState } from "./indicator.js";
import { AttentionSettings, configLine, gazeLine } from "./protocol.js";
import { metricsHtml, poseCardHtml, SceneOverlay, WallView2D } from "./view.js";

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing #${id}`);
  return el as T;
}

const params = new URLSearchParams(window.location.search);
const serverUrl =
  params.get("server") ??
  `${window.location.protocol === "https:" ? "wss" : "ws"}://${window.location.host}/ws`;

const wall: WallView = {
  ...DEFAULT_WALL,
  standoffM: clampStandoff(parseFloat(params.get("standoff") ?? "2.0")),
};

const canvas = byId<HTMLCanvasElement>("wall");
const banner = byId<HTMLDivElement>("banner");
const metricsEl = byId<HTMLDivElement>("metrics");
const poseCard = byId<HTMLDivElement>("pose-card");
const toastEl = byId<HTMLDivElement>("toast");
const latencyEl = byId<HTMLDivElement>("latency");

const view = new WallView2D(canvas, wall);
let state: UiState = initialState();
let pointerPx: [number, number] | null = null;
let lastLatencyMs = 0;

const sceneUrl = params.get("scene");
if (sceneUrl) {
  fetch(sceneUrl)
    .then((r) => r.json())
    .then((scene: SceneOverlay) => {
      view.overlay = scene;
      render();
    })
    .catch(() => showToast(`failed to load scene ${sceneUrl}`));
}

function render(): void {
  view.render(state, pointerPx);
  metricsEl.innerHTML = metricsHtml(state);
  poseCard.innerHTML = poseCardHtml(state);
  poseCard.style.display = state.pose ? "block" : "none";
  latencyEl.textContent = `render latency ${lastLatencyMs.toFixed(1)} ms`;
}

function showToast(text: string): void {
  toastEl.textContent = text;
  toastEl.style.opacity = "1";
  setTimeout(() => (toastEl.style.opacity = "0"), 2500);
}

const client = new SessionClient(serverUrl, {
  onFrame: (frame, receivedAtMs) => {
    if (frame.type === "error") showToast(`${frame.code}: ${frame.detail}`);
    state = reduceFrame(state, frame);
    render(); // synchronous: event-to-render latency stays far below 200 ms
    lastLatencyMs = performance.now() - receivedAtMs;
  },
  onStatus: (status) => {
    banner.textContent =
      status === "open" ? "" : status === "connecting" ? "connecting…" : "connection lost — retrying";
    banner.style.display = status === "open" ? "none" : "block";
    if (status !== "open") {
      state = initialState(); // fresh session on reconnect
      render();
    }
  },
});
client.connect();

const sampler = new GazeSampler(wall, (msg) => client.send(gazeLine(msg)));
sampler.setCanvasSize(canvas.width, canvas.height);

canvas.addEventListener("pointermove", (ev) => {
  const rect = canvas.getBoundingClientRect();
  pointerPx = [
    ((ev.clientX - rect.left) / rect.width) * canvas.width,
    ((ev.clientY - rect.top) / rect.height) * canvas.height,
  ];
  sampler.setPointer(pointerPx[0], pointerPx[1]);
  render();
});
canvas.addEventListener("pointerleave", () => {
  pointerPx = null;
  sampler.clearPointer();
  render();
});
sampler.start();

// live threshold tuning: edits are pushed to the session as config frames
const settingIds: (keyof AttentionSettings)[] = [
  "focusing_fr",
  "focusing_msl_m",
  "inspecting_fr",
  "inspecting_msl_m",
  "inspecting_mfd_ms",
];
for (const id of settingIds) {
  const input = byId<HTMLInputElement>(id);
  input.addEventListener("change", () => {
    const value = parseFloat(input.value);
    if (Number.isFinite(value)) {
      client.send(configLine({ [id]: value }));
      showToast(`${id} → ${value}`);
    }
  });
}

render();
