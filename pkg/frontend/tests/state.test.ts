import { describe, expect, it } from "vitest";

import type { HelloMessage } from "../src/schema.js";
import {
  applyFrame,
  applyPresetPose,
  argmax,
  emptyFrameView,
  initialPoseState,
  setJointAngle,
  setWristAngle,
} from "../src/state.js";
import { HELLO_FIXTURE } from "./helpers.js";

const hello = HELLO_FIXTURE as HelloMessage;

describe("pose state", () => {
  it("mirrors the backend ROM as slider ranges", () => {
    const state = initialPoseState(hello);
    expect(state.ranges).toHaveLength(14);
    expect(state.ranges[3]).toEqual({ finger: "index", joint: "pip", min: 0, max: 110 });
    expect(state.wristRange).toEqual([-180, 180]);
  });

  it("clamps slider values into the ROM so invalid poses cannot be built", () => {
    const state = initialPoseState(hello);
    const over = setJointAngle(state, 3, 500);
    expect(over.angles[3]).toBe(110);
    const under = setJointAngle(state, 3, -20);
    expect(under.angles[3]).toBe(0);
    const wrist = setWristAngle(state, 1, 999);
    expect(wrist.wrist[1]).toBe(180);
  });

  it("updates are pure: the previous state is untouched", () => {
    const state = initialPoseState(hello);
    const next = setJointAngle(state, 0, 45);
    expect(state.angles[0]).toBe(0);
    expect(next.angles[0]).toBe(45);
    expect(next).not.toBe(state);
  });

  it("manual slider edits clear the active preset", () => {
    const state = applyPresetPose(initialPoseState(hello), hello, 1);
    expect(state.activePreset).toBe(1);
    expect(setJointAngle(state, 2, 10).activePreset).toBeNull();
  });

  it("presets copy the canonical pose from hello", () => {
    const state = applyPresetPose(initialPoseState(hello), hello, 1);
    expect(state.angles).toEqual(hello.poses[1]!.angles);
    expect(state.wrist).toEqual(hello.poses[1]!.wrist);
  });

  it("out-of-range preset indices are ignored", () => {
    const state = initialPoseState(hello);
    expect(applyPresetPose(state, hello, 99)).toBe(state);
  });
});

describe("frame view", () => {
  it("stores raw probabilities without renormalization", () => {
    const probs = [0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1, 0.05, 0.01];
    const view = applyFrame(
      emptyFrameView(),
      {
        type: "frame",
        voltages: new Array(14).fill(2.0),
        codes: new Array(14).fill(400),
        probs,
        word: "w0",
      },
      12.5,
    );
    expect(view.probs).toEqual(probs); // sums to 4.56, left as-is
    expect(view.latencyMs).toBe(12.5);
    expect(view.updates).toBe(1);
  });

  it("argmax picks the first maximum", () => {
    expect(argmax([0.2, 0.9, 0.9, 0.1])).toBe(1);
    expect(argmax([0.5])).toBe(0);
  });
});
