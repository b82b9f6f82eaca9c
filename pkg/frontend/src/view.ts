// Canvas + DOM rendering. Everything drawn here comes from server frames
// (via UiState) or static scene overlays; no pipeline math happens here.

import { wallToCanvas, WallView } from "./gazesource.js";
import { UiState } from "./indicator.js";

export interface SceneOverlay {
  defects: { id: string; polygon: [number, number][] }[];
}

const MODE_COLORS: Record<string, string> = {
  focusing: "#4da3ff",
  inspecting: "#ff5d5d",
  result: "#52d273",
};

export class WallView2D {
  private readonly ctx: CanvasRenderingContext2D;

  constructor(
    private readonly canvas: HTMLCanvasElement,
    public wall: WallView,
    public overlay: SceneOverlay | null = null,
  ) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("2d canvas unavailable");
    this.ctx = ctx;
  }

  private toPx(u: number, v: number): [number, number] {
    return wallToCanvas(u, v, this.canvas.width, this.canvas.height, this.wall);
  }

  render(state: UiState, pointer: [number, number] | null): void {
    const { ctx, canvas } = this;
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    this.drawGrid();
    if (this.overlay) this.drawOverlay();
    this.drawFixationTrail(state);
    if (state.hull.length >= 2) this.drawHull(state);
    if (state.visible && state.mode) this.drawIndicator(state);
    if (pointer) this.drawPointer(pointer);
  }

  private drawGrid(): void {
    const { ctx, canvas, wall } = this;
    ctx.strokeStyle = "#223047";
    ctx.lineWidth = 1;
    for (let u = Math.ceil(-wall.widthM / 2); u <= wall.widthM / 2; u += 0.5) {
      const [x] = this.toPx(u, 0);
      ctx.beginPath();
      ctx.moveTo(x, 0);
      ctx.lineTo(x, canvas.height);
      ctx.stroke();
    }
    for (let v = Math.ceil(-wall.heightM / 2); v <= wall.heightM / 2; v += 0.5) {
      const [, y] = this.toPx(0, v);
      ctx.beginPath();
      ctx.moveTo(0, y);
      ctx.lineTo(canvas.width, y);
      ctx.stroke();
    }
  }

  private drawOverlay(): void {
    const { ctx } = this;
    ctx.strokeStyle = "#7f8ea8";
    ctx.setLineDash([6, 4]);
    ctx.lineWidth = 1.5;
    for (const defect of this.overlay!.defects) {
      ctx.beginPath();
      defect.polygon.forEach(([u, v], i) => {
        const [x, y] = this.toPx(u, v);
        if (i === 0) ctx.moveTo(x, y);
        else ctx.lineTo(x, y);
      });
      ctx.closePath();
      ctx.stroke();
    }
    ctx.setLineDash([]);
  }

  private drawFixationTrail(state: UiState): void {
    const { ctx } = this;
    state.recentFixations.forEach(([wx, wy], i) => {
      const [x, y] = this.toPx(wx, wy);
      const alpha = (i + 1) / state.recentFixations.length;
      ctx.fillStyle = `rgba(160, 190, 255, ${0.15 + 0.35 * alpha})`;
      ctx.beginPath();
      ctx.arc(x, y, 4, 0, 2 * Math.PI);
      ctx.fill();
    });
  }

  private drawHull(state: UiState): void {
    const { ctx } = this;
    ctx.strokeStyle = MODE_COLORS.inspecting;
    ctx.fillStyle = "rgba(255, 93, 93, 0.12)";
    ctx.lineWidth = 2;
    ctx.beginPath();
    state.hull.forEach(([wx, wy], i) => {
      const [x, y] = this.toPx(wx, wy);
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.closePath();
    ctx.fill();
    ctx.stroke();
  }

  private drawIndicator(state: UiState): void {
    const anchor = state.anchor;
    if (!anchor) return;
    const [x, y] = this.toPx(anchor[0], anchor[1]);
    const color = MODE_COLORS[state.mode ?? "focusing"];
    const { ctx } = this;
    // drone proxy: body + rotor arms, colored by mode
    ctx.strokeStyle = color;
    ctx.fillStyle = color;
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.arc(x, y - 26, 6, 0, 2 * Math.PI);
    ctx.fill();
    for (const dx of [-12, 12]) {
      ctx.beginPath();
      ctx.arc(x + dx, y - 26, 4, 0, 2 * Math.PI);
      ctx.stroke();
    }
    ctx.beginPath();
    ctx.moveTo(x - 12, y - 26);
    ctx.lineTo(x + 12, y - 26);
    ctx.stroke();
  }

  private drawPointer(pointer: [number, number]): void {
    const { ctx } = this;
    ctx.strokeStyle = "#d7e1f3";
    ctx.lineWidth = 1;
    ctx.beginPath();
    ctx.arc(pointer[0], pointer[1], 7, 0, 2 * Math.PI);
    ctx.stroke();
  }
}

export function poseCardHtml(state: UiState): string {
  const pose = state.pose;
  if (!pose) return "";
  const d = pose.defect;
  const fmt = (x: number, digits = 3) => x.toFixed(digits);
  return [
    `<h3>${d.kind === "crack" ? "Crack" : "Area defect"} · ${d.orientation}</h3>`,
    `<div>size ${fmt(d.w)} × ${fmt(d.h)} m · area ${fmt(d.area_m2, 4)} m²</div>`,
    `<div>rotation ${fmt(d.theta_z_deg, 1)}°</div>`,
    `<div>camera at [${pose.position.map((v) => fmt(v, 2)).join(", ")}]</div>`,
    `<div>pan ${fmt(pose.pan_deg, 1)}° · tilt ${fmt(pose.tilt_deg, 1)}° · standoff ${fmt(pose.standoff_m)} m</div>`,
  ].join("");
}

export function metricsHtml(state: UiState): string {
  const a = state.lastAttention;
  if (!a) return "waiting for data…";
  const msl = a.msl_m === null ? "—" : `${a.msl_m.toFixed(3)} m`;
  return (
    `<span class="level level-${a.level}">${a.level}</span>` +
    ` · FR ${(a.fr * 100).toFixed(0)}% · MFD ${a.mfd_ms.toFixed(0)} ms · MSL ${msl}`
  );
}
