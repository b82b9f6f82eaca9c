// Wire protocol shared with the session service: newline-delimited JSON,
// one frame per line. The UI only renders server-sent values; it never
// recomputes pipeline math.

export type AttentionLevel = "scanning" | "focusing" | "inspecting";

export interface AttentionFrame {
  type: "attention";
  seq: number;
  session_id: string;
  level: AttentionLevel;
  fr: number;
  mfd_ms: number;
  msl_m: number | null; // null while fewer than two fixations are in the window
  t_us: number;
}

export interface FixationFrame {
  type: "fixation";
  seq: number;
  session_id: string;
  centroid: [number, number, number];
  duration_ms: number;
  t_us: number;
}

export interface CollectionFrame {
  type: "collection";
  seq: number;
  session_id: string;
  n_fixations: number;
  hull_area_m2: number;
  stopped: boolean;
  hull_world: [number, number, number][];
  t_us: number;
}

export interface DefectInfo {
  w: number;
  h: number;
  theta_z_deg: number;
  area_m2: number;
  kind: "crack" | "area";
  orientation: "horizontal" | "vertical";
  center: [number, number, number];
}

export interface PoseFrame {
  type: "pose";
  seq: number;
  session_id: string;
  defect: DefectInfo;
  position: [number, number, number];
  pan_deg: number;
  tilt_deg: number;
  standoff_m: number;
  t_us: number;
}

export interface ErrorFrame {
  type: "error";
  seq: number;
  session_id: string;
  code: string;
  detail: string;
}

export type ServerFrame =
  | AttentionFrame
  | FixationFrame
  | CollectionFrame
  | PoseFrame
  | ErrorFrame;

const SERVER_TYPES = new Set(["attention", "fixation", "collection", "pose", "error"]);

/** Parse one NDJSON line; unknown or malformed frames return null. */
export function parseFrame(line: string): ServerFrame | null {
  const text = line.trim();
  if (!text) return null;
  let data: unknown;
  try {
    data = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof data !== "object" || data === null) return null;
  const frame = data as { type?: unknown };
  if (typeof frame.type !== "string" || !SERVER_TYPES.has(frame.type)) return null;
  return data as ServerFrame;
}

/** Split a websocket message that may carry several NDJSON lines. */
export function parseMessage(text: string): ServerFrame[] {
  const frames: ServerFrame[] = [];
  for (const line of text.split("\n")) {
    const frame = parseFrame(line);
    if (frame) frames.push(frame);
  }
  return frames;
}

export interface GazeMessage {
  type: "gaze";
  t_us: number;
  origin: [number, number, number];
  hit: [number, number, number];
  normal: [number, number, number];
}

export function gazeLine(msg: GazeMessage): string {
  return JSON.stringify(msg) + "\n";
}

export function helloLine(version = 1): string {
  return JSON.stringify({ type: "hello", version }) + "\n";
}

export interface AttentionSettings {
  focusing_fr: number;
  focusing_msl_m: number;
  inspecting_fr: number;
  inspecting_msl_m: number;
  inspecting_mfd_ms: number;
}

export function configLine(attention: Partial<AttentionSettings>): string {
  return JSON.stringify({ type: "config", attention }) + "\n";
}
