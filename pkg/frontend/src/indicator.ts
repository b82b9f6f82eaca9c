// UI state as a pure reducer over server frames. Indicator visibility is a
// function of the *last attention frame only* (hidden while scanning); the
// hull overlay and pose card hold whatever the server sent last.

import {
  AttentionFrame,
  CollectionFrame,
  ErrorFrame,
  FixationFrame,
  PoseFrame,
  ServerFrame,
} from "./protocol.js";

export type IndicatorMode = "focusing" | "inspecting" | "result";

export interface UiState {
  lastAttention: AttentionFrame | null;
  visible: boolean;
  mode: IndicatorMode | null;
  anchor: [number, number, number] | null; // last fixation centroid (world)
  hull: [number, number, number][];        // growing hull during collection
  collecting: { n: number; areaM2: number } | null;
  pose: PoseFrame | null;
  lastError: ErrorFrame | null;
  recentFixations: [number, number, number][];
}

export function initialState(): UiState {
  return {
    lastAttention: null,
    visible: false,
    mode: null,
    anchor: null,
    hull: [],
    collecting: null,
    pose: null,
    lastError: null,
    recentFixations: [],
  };
}

const FIXATION_TRAIL = 24;

export function reduceFrame(state: UiState, frame: ServerFrame): UiState {
  switch (frame.type) {
    case "attention":
      return reduceAttention(state, frame);
    case "fixation":
      return reduceFixation(state, frame);
    case "collection":
      return reduceCollection(state, frame);
    case "pose":
      return reducePose(state, frame);
    case "error":
      return { ...state, lastError: frame };
  }
}

function reduceAttention(state: UiState, frame: AttentionFrame): UiState {
  const visible = frame.level !== "scanning";
  let mode: IndicatorMode | null;
  if (!visible) {
    mode = null;
  } else if (state.mode === "result") {
    mode = "result"; // keep the result color until the dwell ends or a new collection starts
  } else {
    mode = frame.level === "inspecting" ? "inspecting" : "focusing";
  }
  return { ...state, lastAttention: frame, visible, mode };
}

function reduceFixation(state: UiState, frame: FixationFrame): UiState {
  const trail = [...state.recentFixations, frame.centroid].slice(-FIXATION_TRAIL);
  return { ...state, anchor: frame.centroid, recentFixations: trail };
}

function reduceCollection(state: UiState, frame: CollectionFrame): UiState {
  const next: UiState = {
    ...state,
    hull: frame.hull_world,
    collecting: { n: frame.n_fixations, areaM2: frame.hull_area_m2 },
  };
  if (frame.n_fixations === 1) {
    next.pose = null; // a fresh collection clears the previous result card
    if (next.mode === "result") next.mode = "inspecting";
  }
  return next;
}

function reducePose(state: UiState, frame: PoseFrame): UiState {
  return {
    ...state,
    pose: frame,
    collecting: null,
    mode: state.visible ? "result" : state.mode,
  };
}
