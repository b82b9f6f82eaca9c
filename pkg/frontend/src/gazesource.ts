// Pointer-as-gaze: maps canvas coordinates onto a virtual wall plane and
// emits gaze messages at a fixed rate while the pointer is over the canvas.
//
// Frame convention (matches the service): right-handed, Y points down. The
// wall occupies the z = 0 plane, x to the right, y down; its surface normal
// faces the virtual eye at (0, 0, -standoff). Canvas pixels map linearly to
// wall meters, so a stationary pointer is a stationary 3D gaze hit.

import { GazeMessage } from "./protocol.js";

export interface WallView {
  widthM: number;   // wall extent covered by the canvas, meters
  heightM: number;
  standoffM: number; // virtual eye distance from the wall
}

export const DEFAULT_WALL: WallView = { widthM: 3.5, heightM: 2.0, standoffM: 2.0 };

export function clampStandoff(value: number): number {
  if (!Number.isFinite(value)) return DEFAULT_WALL.standoffM;
  return Math.min(6.0, Math.max(1.0, value));
}

/** Canvas pixel -> wall-plane meters, origin at the wall center. */
export function canvasToWall(
  xPx: number,
  yPx: number,
  canvasW: number,
  canvasH: number,
  wall: WallView,
): [number, number] {
  return [
    (xPx / canvasW - 0.5) * wall.widthM,
    (yPx / canvasH - 0.5) * wall.heightM,
  ];
}

export function wallToCanvas(
  u: number,
  v: number,
  canvasW: number,
  canvasH: number,
  wall: WallView,
): [number, number] {
  return [(u / wall.widthM + 0.5) * canvasW, (v / wall.heightM + 0.5) * canvasH];
}

export function pointerToGaze(
  xPx: number,
  yPx: number,
  canvasW: number,
  canvasH: number,
  wall: WallView,
  tUs: number,
): GazeMessage {
  const [u, v] = canvasToWall(xPx, yPx, canvasW, canvasH, wall);
  return {
    type: "gaze",
    t_us: tUs,
    origin: [0, 0, -wall.standoffM],
    hit: [u, v, 0],
    normal: [0, 0, -1],
  };
}

export interface SamplerOptions {
  rateHz?: number;
  now?: () => number; // milliseconds, monotonic; defaults to performance.now
  schedule?: (cb: () => void, ms: number) => unknown;
  cancel?: (handle: unknown) => void;
}

/**
 * Fixed-rate gaze sampler. The pointer position is latched between events,
 * so a stationary pointer keeps sampling (that is what makes fixations);
 * when the pointer leaves the canvas, sampling pauses rather than
 * fabricating samples. Timestamps are strictly increasing microseconds.
 */
export class GazeSampler {
  private pointer: [number, number] | null = null;
  private canvasSize: [number, number] = [1, 1];
  private handle: unknown = null;
  private lastTUs = 0;
  private readonly periodMs: number;
  private readonly now: () => number;
  private readonly schedule: (cb: () => void, ms: number) => unknown;
  private readonly cancel: (handle: unknown) => void;

  constructor(
    public wall: WallView,
    private readonly emit: (msg: GazeMessage) => void,
    options: SamplerOptions = {},
  ) {
    const rate = options.rateHz ?? 40; // default comfortably above the 30 Hz floor
    if (rate < 30) throw new Error("sampler rate must be at least 30 Hz");
    this.periodMs = 1000 / rate;
    this.now = options.now ?? (() => performance.now());
    this.schedule = options.schedule ?? ((cb, ms) => setTimeout(cb, ms));
    this.cancel = options.cancel ?? ((h) => clearTimeout(h as number));
  }

  setCanvasSize(w: number, h: number): void {
    this.canvasSize = [w, h];
  }

  setPointer(xPx: number, yPx: number): void {
    this.pointer = [xPx, yPx];
  }

  clearPointer(): void {
    this.pointer = null; // pause: no fabricated samples while outside
  }

  start(): void {
    if (this.handle !== null) return;
    const tick = () => {
      this.handle = this.schedule(tick, this.periodMs);
      this.sampleOnce();
    };
    this.handle = this.schedule(tick, this.periodMs);
  }

  stop(): void {
    if (this.handle !== null) {
      this.cancel(this.handle);
      this.handle = null;
    }
  }

  private sampleOnce(): void {
    if (!this.pointer) return;
    let tUs = Math.round(this.now() * 1000);
    if (tUs <= this.lastTUs) tUs = this.lastTUs + 1; // keep strictly monotonic
    this.lastTUs = tUs;
    const [x, y] = this.pointer;
    const [w, h] = this.canvasSize;
    this.emit(pointerToGaze(x, y, w, h, this.wall, tUs));
  }
}
