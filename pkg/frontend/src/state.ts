/**
 * Pure view state. Reducers never mutate; every update returns a fresh
 * object so rendering stays a pure function of state.
 */

import type { FrameMessage, HelloMessage } from "./schema.js";
import { JOINT_COUNT } from "./schema.js";

export interface JointRange {
  finger: string;
  joint: string;
  min: number;
  max: number;
}

export interface UiPoseState {
  /** Joint slider values in canonical channel order, degrees. */
  angles: number[];
  /** Wrist roll, pitch, yaw in degrees. */
  wrist: [number, number, number];
  /** Slider limits mirrored from the backend's ROM table. */
  ranges: JointRange[];
  wristRange: [number, number];
  /** Class index of the last applied preset, or null after manual edits. */
  activePreset: number | null;
  recording: boolean;
}

export interface UiFrameView {
  voltages: number[];
  codes: number[];
  probs: number[];
  word: string;
  /** Round-trip latency estimate for the last reply, milliseconds. */
  latencyMs: number;
  updates: number;
}

export function initialPoseState(hello: HelloMessage): UiPoseState {
  return {
    angles: new Array(JOINT_COUNT).fill(0),
    wrist: [0, 0, 0],
    ranges: hello.joints.map((j) => ({ ...j })),
    wristRange: [hello.wrist_range[0] ?? -180, hello.wrist_range[1] ?? 180],
    activePreset: null,
    recording: false,
  };
}

export function emptyFrameView(): UiFrameView {
  return { voltages: [], codes: [], probs: [], word: "", latencyMs: 0, updates: 0 };
}

const clamp = (v: number, lo: number, hi: number) => Math.min(Math.max(v, lo), hi);

/** Move one joint slider; the value is clamped into its ROM range. */
export function setJointAngle(state: UiPoseState, index: number, value: number): UiPoseState {
  const range = state.ranges[index];
  if (!range) return state;
  const angles = state.angles.slice();
  angles[index] = clamp(value, range.min, range.max);
  return { ...state, angles, activePreset: null };
}

export function setWristAngle(state: UiPoseState, axis: 0 | 1 | 2, value: number): UiPoseState {
  const wrist: [number, number, number] = [...state.wrist];
  wrist[axis] = clamp(value, state.wristRange[0], state.wristRange[1]);
  return { ...state, wrist, activePreset: null };
}

/** Snap every slider to a preset's canonical pose. */
export function applyPresetPose(
  state: UiPoseState,
  hello: HelloMessage,
  gestureIndex: number,
): UiPoseState {
  const pose = hello.poses[gestureIndex];
  if (!pose) return state;
  return {
    ...state,
    angles: pose.angles.slice(),
    wrist: [pose.wrist[0] ?? 0, pose.wrist[1] ?? 0, pose.wrist[2] ?? 0],
    activePreset: gestureIndex,
  };
}

export function setRecording(state: UiPoseState, recording: boolean): UiPoseState {
  return { ...state, recording };
}

/** Fold a frame reply into the view; raw probabilities, no renormalizing. */
export function applyFrame(view: UiFrameView, frame: FrameMessage, latencyMs: number): UiFrameView {
  return {
    voltages: frame.voltages.slice(),
    codes: frame.codes.slice(),
    probs: frame.probs.slice(),
    word: frame.word,
    latencyMs,
    updates: view.updates + 1,
  };
}

export function argmax(values: number[]): number {
  let best = 0;
  for (let i = 1; i < values.length; i++) {
    if ((values[i] ?? -Infinity) > (values[best] ?? -Infinity)) best = i;
  }
  return best;
}
